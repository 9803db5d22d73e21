use std::collections::HashMap;

use super::{History, Policy, ScaleCounters, TickContext, Tunables};
use crate::time::SimTime;
use crate::workload::{TaskGraph, TaskPhase};

/// Places a token on every running and eligible task and pushes tokens forward to children
/// whose remaining parents all finish by `horizon`. Returns the cpus of all tokened tasks.
pub fn token_level_of_parallelism(
    graph: &TaskGraph,
    phases: &[TaskPhase],
    queue: &[usize],
    running: &[usize],
    now: SimTime,
    horizon: SimTime,
    counters: &mut ScaleCounters,
) -> u64 {
    let mut finish: HashMap<usize, SimTime> = HashMap::with_capacity(queue.len() + running.len());
    let mut work: Vec<usize> = Vec::with_capacity(queue.len() + running.len());
    for &i in running {
        let end = match phases[i] {
            TaskPhase::Running { start, .. } => start + graph.tasks[i].runtime,
            _ => now + graph.tasks[i].runtime,
        };
        finish.insert(i, end);
        work.push(i);
    }
    for &i in queue {
        finish.insert(i, now + graph.tasks[i].runtime);
        work.push(i);
    }
    counters.count_instruction(work.len() as u64);

    while let Some(i) = work.pop() {
        for &c in &graph.tasks[i].children {
            counters.count_instruction(1);
            if finish.contains_key(&c) || phases[c] != TaskPhase::Blocked {
                continue;
            }
            let mut ready = now;
            let mut all_ready = true;
            for &p in &graph.tasks[c].parents {
                counters.count_instruction(1);
                match (phases[p], finish.get(&p)) {
                    (TaskPhase::Done { .. }, _) => {}
                    (_, Some(&f)) => ready = ready.max(f),
                    _ => {
                        all_ready = false;
                        break;
                    }
                }
            }
            if all_ready && ready <= horizon {
                finish.insert(c, ready + graph.tasks[c].runtime);
                work.push(c);
            }
        }
    }
    finish.keys().map(|&i| graph.tasks[i].cpus as u64).sum()
}

#[derive(Debug, Clone)]
pub struct Token {
    lookahead: u32,
    last_tokens: usize,
}

impl Token {
    pub fn new(t: &Tunables) -> Self {
        Token {
            lookahead: t.token_lookahead,
            last_tokens: 0,
        }
    }
}

impl Policy for Token {
    fn decide(&mut self, ctx: &TickContext<'_>, _: &History, counters: &mut ScaleCounters) -> u64 {
        let horizon = ctx.now + SimTime::from_millis(ctx.interval.as_millis() * self.lookahead as u64);
        let lop = token_level_of_parallelism(
            ctx.graph,
            ctx.phases,
            ctx.queue,
            ctx.running,
            ctx.now,
            horizon,
            counters,
        );
        self.last_tokens = ctx.queue.len() + ctx.running.len();
        lop
    }

    fn store_size(&self) -> usize {
        self.last_tokens
    }
}
