use super::fit::linear_fit;
use super::{History, Policy, ScaleCounters, TickContext, Tunables};
use crate::time::SimTime;

/// Slope-following controller with scale-down hysteresis.
///
/// Returns the target and the updated count of consecutive ticks that wanted to shrink.
pub fn adapt_decide(
    history: &History,
    demand: u64,
    supply: u64,
    interval: SimTime,
    below_streak: u32,
    hysteresis: u32,
) -> (u64, u32) {
    let raw = if history.len() < 2 {
        demand as f64
    } else {
        let xs: Vec<f64> = history.iter().map(|s| s.t.as_secs_f64()).collect();
        let slope = linear_fit(&xs, &history.demands()).map_or(0.0, |(_, b)| b);
        demand as f64 + (slope * interval.as_secs_f64()).round()
    };
    let raw = raw.max(0.0) as u64;
    if raw >= supply {
        return (raw, 0);
    }
    let streak = below_streak + 1;
    if streak >= hysteresis {
        (raw, streak)
    } else {
        (supply, streak)
    }
}

#[derive(Debug, Clone)]
pub struct Adapt {
    hysteresis: u32,
    below_streak: u32,
}

impl Adapt {
    pub fn new(t: &Tunables) -> Self {
        Adapt {
            hysteresis: t.hysteresis_ticks.max(1),
            below_streak: 0,
        }
    }
}

impl Policy for Adapt {
    fn decide(&mut self, ctx: &TickContext<'_>, history: &History, counters: &mut ScaleCounters) -> u64 {
        counters.count_instruction(history.len() as u64 + 2);
        let s = ctx.sample;
        let (target, streak) = adapt_decide(
            history,
            s.demand_vms,
            s.supply_vms,
            ctx.interval,
            self.below_streak,
            self.hysteresis,
        );
        self.below_streak = streak;
        target
    }

    fn store_size(&self) -> usize {
        1
    }
}
