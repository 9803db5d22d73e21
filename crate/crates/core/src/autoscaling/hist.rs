use std::collections::BTreeMap;

use super::{History, Policy, ScaleCounters, TickContext, Tunables};

/// Nearest-rank percentile of a `value -> count` histogram.
pub fn nearest_rank_percentile(histogram: &BTreeMap<u64, u64>, p: f64) -> Option<u64> {
    let n: u64 = histogram.values().sum();
    if n == 0 {
        return None;
    }
    let rank = ((p.clamp(0.0, 100.0) / 100.0) * n as f64).ceil().max(1.0) as u64;
    let mut seen = 0;
    for (&value, &count) in histogram {
        seen += count;
        if seen >= rank {
            return Some(value);
        }
    }
    histogram.keys().next_back().copied()
}

/// VMs needed to serve `predicted_arrivals` tasks of `avg_cpu_seconds` each per interval,
/// raised to demand whenever the system is underprovisioned.
pub fn hist_target(predicted_arrivals: u64, avg_cpu_seconds: f64, interval_s: f64, demand: u64, supply: u64) -> u64 {
    let predicted = (predicted_arrivals as f64 * avg_cpu_seconds / interval_s.max(1e-9)).ceil();
    let predicted = if predicted.is_finite() {
        predicted.max(0.0) as u64
    } else {
        demand
    };
    if demand > supply {
        predicted.max(demand)
    } else {
        predicted
    }
}

/// Per-bucket histograms of observed arrival rates (tasks per tick) with a reactive
/// correction for bursts.
#[derive(Debug, Clone)]
pub struct Hist {
    bucket_ms: u64,
    cycle: u64,
    percentile: f64,
    histograms: BTreeMap<u64, BTreeMap<u64, u64>>,
    arrived_tasks: u64,
    arrived_cpu_seconds: f64,
}

impl Hist {
    pub fn new(t: &Tunables) -> Self {
        Hist {
            bucket_ms: (t.hist_bucket_s * 1000.0).round().max(1.0) as u64,
            cycle: t.hist_buckets_per_cycle.max(1),
            percentile: t.hist_percentile,
            histograms: BTreeMap::new(),
            arrived_tasks: 0,
            arrived_cpu_seconds: 0.0,
        }
    }

    pub fn buckets(&self) -> usize {
        self.histograms.len()
    }
}

impl Policy for Hist {
    fn decide(&mut self, ctx: &TickContext<'_>, _: &History, counters: &mut ScaleCounters) -> u64 {
        let s = ctx.sample;
        let bucket = (ctx.now.as_millis() / self.bucket_ms) % self.cycle;
        let histogram = self.histograms.entry(bucket).or_default();
        *histogram.entry(s.arrivals_since_last_tick).or_default() += 1;
        self.arrived_tasks += s.arrivals_since_last_tick;
        self.arrived_cpu_seconds += ctx.arrived_cpu_seconds;
        counters.count_instruction(histogram.len() as u64 + 2);

        if self.arrived_tasks == 0 {
            return s.demand_vms;
        }
        let Some(predicted) = nearest_rank_percentile(histogram, self.percentile) else {
            return s.demand_vms;
        };
        let avg = self.arrived_cpu_seconds / self.arrived_tasks as f64;
        hist_target(predicted, avg, ctx.interval.as_secs_f64(), s.demand_vms, s.supply_vms)
    }

    fn store_size(&self) -> usize {
        self.histograms.values().map(BTreeMap::len).sum::<usize>() + 2
    }
}
