use super::fit::{eval_quadratic, quadratic_fit};
use super::{History, Policy, ScaleCounters, TickContext};
use crate::time::SimTime;

/// Degree-2 least-squares forecast of demand one interval past the newest sample.
/// Abscissae are measured in intervals relative to the newest sample.
pub fn reg_predict(history: &History, interval: SimTime) -> Option<f64> {
    let newest = history.iter().last()?.t;
    let step = interval.as_millis().max(1) as f64;
    let xs: Vec<f64> = history
        .iter()
        .map(|s| (s.t.as_millis() as f64 - newest.as_millis() as f64) / step)
        .collect();
    let coeffs = quadratic_fit(&xs, &history.demands())?;
    Some(eval_quadratic(coeffs, 1.0))
}

/// Reactive scale-up when underprovisioned; otherwise the regression forecast.
pub fn reg_decide(history: &History, demand: u64, supply: u64, interval: SimTime) -> u64 {
    if demand > supply {
        return demand;
    }
    match reg_predict(history, interval) {
        Some(p) if p.is_finite() => p.round().max(0.0) as u64,
        _ => demand,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Reg;

impl Policy for Reg {
    fn decide(&mut self, ctx: &TickContext<'_>, history: &History, counters: &mut ScaleCounters) -> u64 {
        let s = ctx.sample;
        if s.demand_vms <= s.supply_vms {
            counters.count_instruction(history.len() as u64 + 1);
        } else {
            counters.count_instruction(1);
        }
        reg_decide(history, s.demand_vms, s.supply_vms, ctx.interval)
    }
}
