use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{Task, Workflow, WorkloadTrace};
use crate::time::SimTime;

/// Exponential-arrival industrial workload: `2^i` workflows arrive at minute `i`, i = 0..=9,
/// plus one seed workflow at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChronosSpec {
    pub tasks_per_workflow: usize,
    pub runtime_s: f64,
    pub cpus: u32,
    /// Depth of each workflow; every task of level `l` depends on all tasks of level `l - 1`.
    pub levels: usize,
    /// Chain each workflow of minute `i` after the workflow at the same position of minute `i - 1`.
    pub chain_workflows: bool,
    /// Coefficient of variation of per-task runtimes around `runtime_s`; 0 keeps them fixed.
    pub runtime_cv: f64,
    /// Only used when `runtime_cv > 0`.
    pub seed: u64,
}

impl Default for ChronosSpec {
    fn default() -> Self {
        ChronosSpec {
            tasks_per_workflow: 3,
            runtime_s: 60.0,
            cpus: 1,
            levels: 3,
            chain_workflows: false,
            runtime_cv: 0.0,
            seed: 0,
        }
    }
}

pub fn generate_chronos(spec: &ChronosSpec) -> WorkloadTrace {
    let tasks_per_workflow = spec.tasks_per_workflow.max(1);
    let levels = spec.levels.clamp(1, tasks_per_workflow);
    let runtime = SimTime::from_secs_f64(spec.runtime_s)
        .filter(|r| *r > SimTime::ZERO)
        .unwrap_or(SimTime::from_secs(1));
    let cpus = spec.cpus.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let spread = (spec.runtime_cv > 0.0).then(|| log_normal(runtime.as_secs_f64(), spec.runtime_cv));
    let mut draw = move || match &spread {
        Some(dist) => SimTime::from_secs_f64(dist.sample(&mut rng).max(1.0)).expect("finite runtime"),
        None => runtime,
    };

    let mut workflows = Vec::new();
    let mut next_task = 0u64;
    let mut previous_minute: Vec<u64> = Vec::new();
    for minute in 0..10u32 {
        let count = 1usize << minute;
        let submit = SimTime::from_secs(60 * minute as u64);
        let mut this_minute = Vec::with_capacity(count + 1);
        let extra_seed = usize::from(minute == 0);
        for k in 0..count + extra_seed {
            let id = workflows.len() as u64;
            let chained_after = (spec.chain_workflows && !previous_minute.is_empty())
                .then(|| previous_minute[k % previous_minute.len()]);
            let tasks = layered_tasks(id, &mut next_task, tasks_per_workflow, levels, |_| (draw(), cpus));
            workflows.push(Workflow {
                id,
                submit_time: submit,
                tasks,
                chained_after,
            });
            this_minute.push(id);
        }
        previous_minute = this_minute;
    }
    WorkloadTrace::new("chronos", workflows).expect("generated chronos trace is valid")
}

/// Log-normal with the given mean and coefficient of variation.
fn log_normal(mean: f64, cv: f64) -> LogNormal<f64> {
    let cv = cv.max(0.0);
    let sigma2 = (1.0 + cv * cv).ln();
    LogNormal::new(mean.ln() - sigma2 / 2.0, sigma2.sqrt()).expect("finite log-normal parameters")
}

/// Builds `n` tasks split into `levels` equally sized layers, each layer depending on all
/// tasks of the previous one.
fn layered_tasks(
    workflow_id: u64,
    next_task: &mut u64,
    n: usize,
    levels: usize,
    mut params: impl FnMut(usize) -> (SimTime, u32),
) -> Vec<Task> {
    let levels = levels.clamp(1, n);
    let mut tasks: Vec<Task> = Vec::with_capacity(n);
    let mut prev_layer: Vec<u64> = Vec::new();
    let mut layer: Vec<u64> = Vec::new();
    let mut current_level = 0;
    for j in 0..n {
        let level = j * levels / n;
        if level != current_level {
            prev_layer = std::mem::take(&mut layer);
            current_level = level;
        }
        let id = *next_task;
        *next_task += 1;
        let (runtime, cpus) = params(j);
        tasks.push(Task {
            id,
            workflow_id,
            runtime,
            cpus,
            parents: prev_layer.clone(),
        });
        layer.push(id);
    }
    tasks
}

/// Synthetic bursty workload: a share of workflows lands inside an initial window, the rest
/// spread uniformly over a tail. Runtimes are log-normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurstSpec {
    pub name: String,
    pub tasks: usize,
    pub workflows: usize,
    pub levels: usize,
    pub runtime_mean_s: f64,
    /// Coefficient of variation of the log-normal runtime distribution.
    pub runtime_cv: f64,
    pub min_runtime_s: f64,
    pub cpus: u32,
    pub burst_window_s: f64,
    /// Fraction of workflows submitted after the burst window.
    pub tail_fraction: f64,
    pub tail_span_s: f64,
    /// When set, a single-task workflow of this runtime is submitted first at t = 0.
    /// It counts towards `tasks` and `workflows`.
    pub anchor_runtime_s: Option<f64>,
}

impl Default for BurstSpec {
    fn default() -> Self {
        BurstSpec {
            name: "burst".into(),
            tasks: 24_000,
            workflows: 700,
            levels: 1,
            runtime_mean_s: 60.0,
            runtime_cv: 0.5,
            min_runtime_s: 1.0,
            cpus: 1,
            burst_window_s: 60.0,
            tail_fraction: 0.0,
            tail_span_s: 0.0,
            anchor_runtime_s: None,
        }
    }
}

impl BurstSpec {
    /// Single 24,000-task burst with a long-running first workflow (engineering-style EE2 shape).
    pub fn askalon_ee2_like() -> Self {
        BurstSpec {
            name: "askalon-ee2-like".into(),
            tasks: 24_000,
            workflows: 700,
            anchor_runtime_s: Some(2300.0),
            ..BurstSpec::default()
        }
    }

    /// EE2 totals (3,551 workflows, 122,105 tasks) with an opening burst and a one-hour tail.
    pub fn askalon_ee2_full() -> Self {
        BurstSpec {
            name: "askalon-ee2-full".into(),
            tasks: 122_105,
            workflows: 3_551,
            levels: 2,
            burst_window_s: 120.0,
            tail_fraction: 0.4,
            tail_span_s: 3_600.0,
            ..BurstSpec::default()
        }
    }

    /// EE-shaped: 757 workflows and 45,786 tasks, about 16,000 tasks in the first minute,
    /// arrivals spread over 49 minutes.
    pub fn askalon_ee_like() -> Self {
        BurstSpec {
            name: "askalon-ee-like".into(),
            tasks: 45_786,
            workflows: 757,
            levels: 3,
            runtime_mean_s: 61.7,
            runtime_cv: 0.5,
            tail_fraction: 0.65,
            tail_span_s: 2_700.0,
            ..BurstSpec::default()
        }
    }

    /// Scientific-style: 200 workflows and 13,876 tasks arriving steadily.
    pub fn spec_like() -> Self {
        BurstSpec {
            name: "spec-like".into(),
            tasks: 13_876,
            workflows: 200,
            levels: 4,
            runtime_mean_s: 30.0,
            runtime_cv: 1.0,
            burst_window_s: 0.0,
            tail_fraction: 1.0,
            tail_span_s: 3_600.0,
            ..BurstSpec::default()
        }
    }
}

pub fn generate_burst(spec: &BurstSpec, seed: u64) -> WorkloadTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_tasks = spec.tasks.max(1);
    let anchor = spec.anchor_runtime_s.filter(|r| *r > 0.0);
    let anchor_count = usize::from(anchor.is_some() && total_tasks > 1);
    let bulk_tasks = total_tasks - anchor_count;
    let bulk_workflows = spec.workflows.saturating_sub(anchor_count).clamp(1, bulk_tasks);

    let runtime_dist = log_normal(spec.runtime_mean_s.max(1e-3), spec.runtime_cv);
    let min_runtime = spec.min_runtime_s.max(0.001);

    let tail_count = ((bulk_workflows as f64) * spec.tail_fraction.clamp(0.0, 1.0)).round() as usize;
    let burst_count = bulk_workflows - tail_count;
    let mut submits: Vec<SimTime> = Vec::with_capacity(bulk_workflows);
    for _ in 0..burst_count {
        let s = if spec.burst_window_s > 0.0 {
            rng.random_range(0.0..spec.burst_window_s)
        } else {
            0.0
        };
        submits.push(SimTime::from_secs_f64(s).unwrap_or_default());
    }
    for _ in 0..tail_count {
        let offset = if spec.tail_span_s > 0.0 {
            rng.random_range(0.0..spec.tail_span_s)
        } else {
            0.0
        };
        submits.push(SimTime::from_secs_f64(spec.burst_window_s.max(0.0) + offset).unwrap_or_default());
    }
    submits.sort_unstable();

    let cpus = spec.cpus.max(1);
    let mut workflows = Vec::with_capacity(bulk_workflows + anchor_count);
    let mut next_task = 0u64;
    if let (1, Some(rt)) = (anchor_count, anchor) {
        let runtime = SimTime::from_secs_f64(rt).unwrap_or(SimTime::from_secs(1));
        let tasks = layered_tasks(0, &mut next_task, 1, 1, |_| (runtime, cpus));
        workflows.push(Workflow {
            id: 0,
            submit_time: SimTime::ZERO,
            tasks,
            chained_after: None,
        });
    }
    let base = bulk_tasks / bulk_workflows;
    let extra = bulk_tasks % bulk_workflows;
    for (k, submit) in submits.into_iter().enumerate() {
        let id = workflows.len() as u64;
        let n = base + usize::from(k < extra);
        let tasks = layered_tasks(id, &mut next_task, n, spec.levels.max(1), |_| {
            let s: f64 = runtime_dist.sample(&mut rng);
            let ms = (s.max(min_runtime) * 1000.0).round().max(1.0) as u64;
            (SimTime::from_millis(ms), cpus)
        });
        workflows.push(Workflow {
            id,
            submit_time: submit,
            tasks,
            chained_after: None,
        });
    }
    WorkloadTrace::new(spec.name.clone(), workflows).expect("generated burst trace is valid")
}
