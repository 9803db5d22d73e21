use super::{History, Policy, ScaleCounters, TickContext, Tunables};

/// Threshold rule: grow to demand when utilization reaches `up`; shrink to demand when it
/// falls to `down` and at least one cluster is fully idle; otherwise hold.
pub fn react_decide(demand: u64, supply: u64, idle_clusters: usize, up: f64, down: f64) -> u64 {
    if supply == 0 {
        return demand;
    }
    let utilization = demand as f64 / supply as f64;
    if utilization >= up || (utilization <= down && idle_clusters > 0) {
        demand
    } else {
        supply
    }
}

#[derive(Debug, Clone)]
pub struct React {
    up: f64,
    down: f64,
}

impl React {
    pub fn new(t: &Tunables) -> Self {
        React {
            up: t.up_threshold,
            down: t.down_threshold,
        }
    }
}

impl Policy for React {
    fn decide(&mut self, ctx: &TickContext<'_>, _: &History, counters: &mut ScaleCounters) -> u64 {
        counters.count_instruction(2);
        let s = ctx.sample;
        react_decide(s.demand_vms, s.supply_vms, ctx.idle_clusters, self.up, self.down)
    }
}
