#![allow(dead_code)]

use autoscale_sim::allocation::AllocationPolicy;
use autoscale_sim::metrics::{SeriesSample, SupplyDemandSeries};
use autoscale_sim::time::SimTime;
use autoscale_sim::workload::{Task, Workflow, WorkloadTrace};
use rand::Rng;

/// A small static-infrastructure scheduling instance with whole-second times.
#[derive(Debug, Clone)]
pub struct Instance {
    pub trace: WorkloadTrace,
    pub clusters: usize,
    pub vms: u32,
}

/// Up to 10 tasks over 1 to 3 workflows, up to 3 clusters of 1 to 4 slots.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let clusters = rng.random_range(1..=3);
    let vms = rng.random_range(1..=4u32);
    let n_tasks = rng.random_range(1..=10usize);
    let n_wf = rng.random_range(1..=3usize).min(n_tasks);
    let mut sizes = vec![1usize; n_wf];
    for _ in n_wf..n_tasks {
        sizes[rng.random_range(0..n_wf)] += 1;
    }
    let mut next_id = 0u64;
    let mut workflows = Vec::new();
    for (w, &size) in sizes.iter().enumerate() {
        let first = next_id;
        let mut tasks = Vec::new();
        for k in 0..size as u64 {
            let parents = (0..k).filter(|_| rng.random_bool(0.3)).map(|p| first + p).collect();
            tasks.push(Task {
                id: next_id,
                workflow_id: w as u64,
                runtime: SimTime::from_secs(rng.random_range(1..=5)),
                cpus: rng.random_range(1..=vms),
                parents,
            });
            next_id += 1;
        }
        workflows.push(Workflow {
            id: w as u64,
            submit_time: SimTime::from_secs(rng.random_range(0..=5)),
            tasks,
            chained_after: None,
        });
    }
    Instance {
        trace: WorkloadTrace::new("oracle", workflows).expect("random instance is valid"),
        clusters,
        vms,
    }
}

fn most_free(free: &[u32]) -> usize {
    let mut best = 0;
    for (i, &f) in free.iter().enumerate() {
        if f > free[best] {
            best = i;
        }
    }
    best
}

/// Cluster choice for each queued task, written out directly from the policy rules.
fn oracle_place(policy: AllocationPolicy, queue: &[(u64, u32)], free: &mut [u32]) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    match policy {
        AllocationPolicy::FillWorstFit => {
            let mut cur = most_free(free);
            for &(id, cpus) in queue {
                if free[cur] < cpus {
                    cur = most_free(free);
                    if free[cur] < cpus {
                        break;
                    }
                }
                free[cur] -= cpus;
                out.push((id, cur));
            }
        }
        AllocationPolicy::WorstFit | AllocationPolicy::BestFit => {
            for &(id, cpus) in queue {
                let mut pick: Option<usize> = None;
                for (i, &f) in free.iter().enumerate() {
                    if f < cpus {
                        continue;
                    }
                    pick = match pick {
                        None => Some(i),
                        Some(p) if policy == AllocationPolicy::WorstFit && f > free[p] => Some(i),
                        Some(p) if policy == AllocationPolicy::BestFit && f < free[p] => Some(i),
                        keep => keep,
                    };
                }
                if let Some(i) = pick {
                    free[i] -= cpus;
                    out.push((id, i));
                }
            }
        }
    }
    out
}

/// Start time in seconds of every task, keyed by task id, from a second-by-second replay:
/// completions, then newly eligible tasks join the queue ordered by (eligible since, id),
/// then one placement pass over all clusters.
pub fn fcfs_oracle(inst: &Instance, policy: AllocationPolicy) -> Vec<(u64, u64)> {
    struct T {
        id: u64,
        submit: u64,
        runtime: u64,
        cpus: u32,
        parents: Vec<u64>,
        since: Option<u64>,
        start: Option<u64>,
        cluster: usize,
    }
    let mut tasks: Vec<T> = Vec::new();
    for wf in inst.trace.workflows() {
        for t in &wf.tasks {
            tasks.push(T {
                id: t.id,
                submit: wf.submit_time.as_millis() / 1000,
                runtime: t.runtime.as_millis() / 1000,
                cpus: t.cpus,
                parents: t.parents.clone(),
                since: None,
                start: None,
                cluster: 0,
            });
        }
    }
    let end_of = |tasks: &[T], id: u64| {
        let t = tasks.iter().find(|t| t.id == id).unwrap();
        t.start.map(|s| s + t.runtime)
    };
    let mut free = vec![inst.vms; inst.clusters];
    let mut t = 0u64;
    while tasks.iter().any(|x| x.start.is_none()) {
        for x in tasks.iter().filter(|x| x.start.is_some_and(|s| s + x.runtime == t)) {
            free[x.cluster] += x.cpus;
        }
        for i in 0..tasks.len() {
            if tasks[i].since.is_some() || tasks[i].submit > t {
                continue;
            }
            let ready = tasks[i]
                .parents
                .iter()
                .all(|&p| end_of(&tasks, p).is_some_and(|e| e <= t));
            if ready {
                tasks[i].since = Some(t);
            }
        }
        let mut queue: Vec<(u64, u64, u32)> = tasks
            .iter()
            .filter(|x| x.since.is_some() && x.start.is_none())
            .map(|x| (x.since.unwrap(), x.id, x.cpus))
            .collect();
        queue.sort_unstable();
        let queue: Vec<(u64, u32)> = queue.into_iter().map(|(_, id, c)| (id, c)).collect();
        for (id, cluster) in oracle_place(policy, &queue, &mut free) {
            let x = tasks.iter_mut().find(|x| x.id == id).unwrap();
            x.start = Some(t);
            x.cluster = cluster;
        }
        t += 1;
        assert!(t < 10_000, "oracle did not terminate");
    }
    let mut out: Vec<(u64, u64)> = tasks.iter().map(|x| (x.id, x.start.unwrap())).collect();
    out.sort_unstable();
    out
}

/// Random step series: up to `max_steps` steps of 1 to 50 ms, supply and demand in
/// 0..=400 with frequent equal and zero values, busy at most min(supply, demand).
pub fn random_series(rng: &mut impl Rng, max_steps: usize) -> SupplyDemandSeries {
    let steps = rng.random_range(1..=max_steps);
    let mut t = rng.random_range(0..1_000u64);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut supply = 70u64;
    let mut demand = 0u64;
    for _ in 0..=steps {
        match rng.random_range(0..4) {
            0 => supply = rng.random_range(0..=400),
            1 => demand = rng.random_range(0..=400),
            2 => demand = supply,
            _ => {
                supply = rng.random_range(0..=400);
                demand = rng.random_range(0..=400);
            }
        }
        let busy = rng.random_range(0..=supply.min(demand));
        samples.push(SeriesSample::new(SimTime::from_millis(t), supply, demand, busy));
        t += rng.random_range(1..=50);
    }
    SupplyDemandSeries::from_samples(samples)
}

/// Metric values from a millisecond-by-millisecond walk over the series.
#[derive(Debug, Clone, Copy)]
pub struct BruteMetrics {
    pub a_u: f64,
    pub a_o: f64,
    pub na_u: f64,
    pub na_o: f64,
    pub t_u: f64,
    pub t_o: f64,
    pub m_u: f64,
    pub v_bar: f64,
}

pub fn brute_force_metrics(series: &SupplyDemandSeries) -> BruteMetrics {
    let s = series.samples();
    let (start, end) = (s[0].t.as_millis(), s[s.len() - 1].t.as_millis());
    let (mut under, mut over, mut idle, mut supplied) = (0u128, 0u128, 0u128, 0u128);
    let (mut n_under, mut n_over) = (0f64, 0f64);
    let (mut ms_under, mut ms_over) = (0u64, 0u64);
    let mut k = 0;
    for ms in start..end {
        while k + 1 < s.len() && s[k + 1].t.as_millis() <= ms {
            k += 1;
        }
        let (sup, dem, busy) = (s[k].supply, s[k].demand, s[k].busy);
        if dem > sup {
            under += (dem - sup) as u128;
            n_under += (dem - sup) as f64 / dem as f64;
            ms_under += 1;
        }
        if sup > dem {
            over += (sup - dem) as u128;
            n_over += (sup - dem) as f64 / sup as f64;
            ms_over += 1;
        }
        idle += sup.saturating_sub(busy) as u128;
        supplied += sup as u128;
    }
    let span = (end - start) as f64;
    BruteMetrics {
        a_u: under as f64 / span,
        a_o: over as f64 / span,
        na_u: n_under / span,
        na_o: n_over / span,
        t_u: 100.0 * ms_under as f64 / span,
        t_o: 100.0 * ms_over as f64 / span,
        m_u: idle as f64 / span,
        v_bar: supplied as f64 / span,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
