use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{History, Policy, ScaleCounters, TickContext};
use crate::time::SimTime;
use crate::workload::{TaskGraph, TaskPhase};

/// Builds a partial FCFS execution plan for the next interval and returns the number of VMs
/// it occupies.
///
/// Running tasks keep their VMs. Each eligible task reuses the earliest-free planned VMs
/// when it would still finish inside the interval; otherwise it gets fresh VMs at `now`.
/// When underprovisioned the target never drops below demand.
#[allow(clippy::too_many_arguments)]
pub fn plan_decide(
    graph: &TaskGraph,
    phases: &[TaskPhase],
    queue: &[usize],
    running: &[usize],
    now: SimTime,
    interval: SimTime,
    demand: u64,
    supply: u64,
    counters: &mut ScaleCounters,
) -> u64 {
    let end = now + interval;
    let mut vms: BinaryHeap<Reverse<SimTime>> = BinaryHeap::new();
    for &i in running {
        let task = &graph.tasks[i];
        let free_at = match phases[i] {
            TaskPhase::Running { start, .. } => start + task.runtime,
            _ => now + task.runtime,
        };
        for _ in 0..task.cpus {
            vms.push(Reverse(free_at));
        }
        counters.count_instruction(task.cpus as u64);
    }
    let mut picked: Vec<SimTime> = Vec::new();
    for &i in queue {
        let task = &graph.tasks[i];
        counters.count_instruction(task.cpus as u64 + 1);
        picked.clear();
        if vms.len() >= task.cpus as usize {
            for _ in 0..task.cpus {
                picked.push(vms.pop().expect("heap has enough entries").0);
            }
        }
        let start = picked.iter().copied().max().unwrap_or(now).max(now);
        if !picked.is_empty() && start + task.runtime <= end {
            for _ in 0..task.cpus {
                vms.push(Reverse(start + task.runtime));
            }
        } else {
            for f in picked.drain(..) {
                vms.push(Reverse(f));
            }
            for _ in 0..task.cpus {
                vms.push(Reverse(now + task.runtime));
            }
        }
    }
    let planned = vms.len() as u64;
    if demand > supply {
        planned.max(demand)
    } else {
        planned
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Plan;

impl Policy for Plan {
    fn decide(&mut self, ctx: &TickContext<'_>, _: &History, counters: &mut ScaleCounters) -> u64 {
        plan_decide(
            ctx.graph,
            ctx.phases,
            ctx.queue,
            ctx.running,
            ctx.now,
            ctx.interval,
            ctx.sample.demand_vms,
            ctx.sample.supply_vms,
            counters,
        )
    }
}
