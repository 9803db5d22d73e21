//! Discrete-event core: clusters, the central queue, and the monitor / autoscaler /
//! scheduler loop.
//!
//! Events at the same instant are handled in batches. All completions and arrivals at `t`
//! are applied first and the queue is dispatched once; then an autoscaling tick at `t`
//! provisions and dispatches again; deallocation checks come last. A supply/demand sample
//! is taken after every batch.

mod cluster;
mod event;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use cluster::{apply_provisioning, ClusterState, ProvisioningCommands};
pub use event::{Event, EventKind, EventQueue};

use crate::allocation::{AllocationPolicy, ClusterSlots, QueuedTask};
use crate::autoscaling::{
    Autoscaler, MonitoringSample, PolicyKind, ProvisioningDecision, ScaleCounters, TickContext, Tunables,
};
use crate::error::{Error, Result};
use crate::metrics::{SeriesSample, SupplyDemandSeries, WorkflowRecord};
use crate::time::SimTime;
use crate::workload::{TaskGraph, TaskId, TaskPhase, WorkflowId, WorkloadTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Clusters allocated at t = 0.
    pub clusters: usize,
    /// Sites the autoscaler may use; at least `clusters`.
    pub max_clusters: usize,
    pub vms_per_cluster: u32,
    pub interval: SimTime,
}

impl EngineConfig {
    pub const DEFAULT_INTERVAL: SimTime = SimTime::from_secs(30);

    pub fn new(clusters: usize, vms_per_cluster: u32) -> Self {
        EngineConfig {
            clusters,
            max_clusters: clusters,
            vms_per_cluster,
            interval: Self::DEFAULT_INTERVAL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidConfig("at least one cluster is required".into()));
        }
        if self.max_clusters < self.clusters {
            return Err(Error::InvalidConfig(format!(
                "max_clusters {} is below clusters {}",
                self.max_clusters, self.clusters
            )));
        }
        if self.vms_per_cluster == 0 {
            return Err(Error::InvalidConfig("vms_per_cluster must be positive".into()));
        }
        if self.interval == SimTime::ZERO {
            return Err(Error::InvalidConfig("autoscaling interval must be positive".into()));
        }
        Ok(())
    }

    pub fn max_supply_vms(&self) -> u64 {
        self.max_clusters as u64 * self.vms_per_cluster as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRun {
    pub id: TaskId,
    pub workflow: WorkflowId,
    pub start: SimTime,
    pub end: SimTime,
    pub cluster: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationResult {
    pub records: Vec<WorkflowRecord>,
    pub series: SupplyDemandSeries,
    pub clusters: Vec<ClusterState>,
    pub counters: ScaleCounters,
    pub decisions: Vec<ProvisioningDecision>,
    /// One entry per task, in trace order.
    pub tasks: Vec<TaskRun>,
    pub end: SimTime,
    pub interval: SimTime,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Runs `trace` to completion.
pub fn run(
    config: &EngineConfig,
    trace: &WorkloadTrace,
    autoscaler: PolicyKind,
    tunables: &Tunables,
    allocator: AllocationPolicy,
) -> Result<SimulationResult> {
    config.validate()?;
    if let Some(t) = trace.tasks().find(|t| t.cpus > config.vms_per_cluster) {
        return Err(Error::Unschedulable {
            task: t.id,
            cpus: t.cpus,
            capacity: config.vms_per_cluster,
        });
    }
    let started = Instant::now();
    let graph = TaskGraph::new(trace);
    let mut sim = Simulation::new(config, &graph, Autoscaler::new(autoscaler, tunables), allocator);
    sim.run();
    let mut result = sim.finish();
    result.wall_time = started.elapsed();
    Ok(result)
}

struct Simulation<'a> {
    cfg: EngineConfig,
    graph: &'a TaskGraph,
    phases: Vec<TaskPhase>,
    waiting_parents: Vec<usize>,
    task_cluster: Vec<usize>,
    wf_arrived: Vec<bool>,
    wf_remaining: Vec<usize>,
    wf_first_start: Vec<Option<SimTime>>,
    wf_done: Vec<Option<SimTime>>,
    /// Eligible tasks keyed by (eligible since, task id, index).
    queue: BTreeSet<(SimTime, TaskId, usize)>,
    running: BTreeSet<usize>,
    queued_cpus: u64,
    running_cpus: u64,
    clusters: Vec<ClusterState>,
    allocated: usize,
    pending_release: usize,
    events: EventQueue,
    autoscaler: Autoscaler,
    allocator: AllocationPolicy,
    series: SupplyDemandSeries,
    decisions: Vec<ProvisioningDecision>,
    sample_from: SimTime,
    arrivals_since_tick: u64,
    arrived_cpu_ms: u128,
    completed: usize,
    now: SimTime,
}

impl<'a> Simulation<'a> {
    fn new(cfg: &EngineConfig, graph: &'a TaskGraph, autoscaler: Autoscaler, allocator: AllocationPolicy) -> Self {
        let mut clusters: Vec<ClusterState> = (0..cfg.max_clusters)
            .map(|i| ClusterState::new(i, cfg.vms_per_cluster))
            .collect();
        for c in clusters.iter_mut().take(cfg.clusters) {
            c.allocate(SimTime::ZERO);
        }
        let mut events = EventQueue::new();
        let mut by_submit: Vec<usize> = (0..graph.workflows.len()).collect();
        by_submit.sort_by_key(|&w| (graph.workflows[w].submit, graph.workflows[w].id));
        for &w in &by_submit {
            events.schedule(graph.workflows[w].submit, EventKind::WorkflowArrival { workflow: w });
        }
        if !graph.tasks.is_empty() {
            events.schedule(cfg.interval, EventKind::AutoscaleTick);
        }
        Simulation {
            cfg: *cfg,
            graph,
            phases: vec![TaskPhase::Blocked; graph.tasks.len()],
            waiting_parents: graph.tasks.iter().map(|t| t.parents.len()).collect(),
            task_cluster: vec![usize::MAX; graph.tasks.len()],
            wf_arrived: vec![false; graph.workflows.len()],
            wf_remaining: graph.workflows.iter().map(|w| w.tasks.len()).collect(),
            wf_first_start: vec![None; graph.workflows.len()],
            wf_done: vec![None; graph.workflows.len()],
            queue: BTreeSet::new(),
            running: BTreeSet::new(),
            queued_cpus: 0,
            running_cpus: 0,
            clusters,
            allocated: cfg.clusters,
            pending_release: 0,
            events,
            autoscaler,
            allocator,
            series: SupplyDemandSeries::new(),
            decisions: Vec::new(),
            sample_from: graph.workflows.iter().map(|w| w.submit).min().unwrap_or(SimTime::ZERO),
            arrivals_since_tick: 0,
            arrived_cpu_ms: 0,
            completed: 0,
            now: SimTime::ZERO,
        }
    }

    fn run(&mut self) {
        let total = self.graph.tasks.len();
        while self.completed < total {
            let Some(ev) = self.events.pop() else {
                unreachable!("event calendar drained with {} tasks left", total - self.completed);
            };
            debug_assert!(ev.time >= self.now);
            self.now = ev.time;
            match ev.kind {
                EventKind::TaskCompletion { .. } | EventKind::WorkflowArrival { .. } => {
                    self.handle(ev.kind);
                    while let Some(e) = self.events.pop_if(self.now, 1) {
                        self.handle(e.kind);
                    }
                    self.dispatch();
                }
                EventKind::AutoscaleTick => {
                    self.tick();
                    self.dispatch();
                }
                EventKind::ClusterDeallocationCheck { cluster } => self.deallocation_check(cluster),
            }
            self.record_sample();
        }
    }

    fn handle(&mut self, kind: EventKind) {
        match kind {
            EventKind::TaskCompletion { task } => self.complete(task),
            EventKind::WorkflowArrival { workflow } => {
                self.wf_arrived[workflow] = true;
                let chain_done = self.graph.workflows[workflow]
                    .chained_after
                    .is_none_or(|p| self.wf_done[p].is_some());
                if chain_done {
                    self.release_entries(workflow);
                }
            }
            _ => unreachable!("only completions and arrivals are batched"),
        }
    }

    fn release_entries(&mut self, workflow: usize) {
        for &t in &self.graph.workflows[workflow].entries {
            self.enqueue(t);
        }
    }

    fn enqueue(&mut self, task: usize) {
        let t = &self.graph.tasks[task];
        debug_assert_eq!(self.phases[task], TaskPhase::Blocked);
        self.phases[task] = TaskPhase::Queued { since: self.now };
        self.queue.insert((self.now, t.id, task));
        self.queued_cpus += t.cpus as u64;
        self.arrivals_since_tick += 1;
        self.arrived_cpu_ms += t.runtime.as_millis() as u128 * t.cpus as u128;
    }

    fn complete(&mut self, task: usize) {
        let t = &self.graph.tasks[task];
        let TaskPhase::Running { start, cluster } = self.phases[task] else {
            unreachable!("completion of a task that is not running");
        };
        self.phases[task] = TaskPhase::Done { start, end: self.now };
        self.running.remove(&task);
        self.running_cpus -= t.cpus as u64;
        self.completed += 1;
        let c = &mut self.clusters[cluster];
        c.finish_task(t.cpus, t.runtime);
        if c.is_idle() && self.pending_release > 0 {
            self.events
                .schedule(self.now, EventKind::ClusterDeallocationCheck { cluster });
        }
        for &child in &t.children {
            self.waiting_parents[child] -= 1;
            if self.waiting_parents[child] == 0 {
                self.enqueue(child);
            }
        }
        let w = t.workflow;
        self.wf_remaining[w] -= 1;
        if self.wf_remaining[w] == 0 {
            self.wf_done[w] = Some(self.now);
            for &next in &self.graph.workflows[w].successors {
                if self.wf_arrived[next] {
                    self.release_entries(next);
                }
            }
        }
    }

    fn dispatch(&mut self) {
        if self.queue.is_empty() {
            return;
        }
        let mut slots: Vec<ClusterSlots> = self
            .clusters
            .iter()
            .filter(|c| c.free() > 0)
            .map(|c| ClusterSlots {
                cluster: c.id,
                free: c.free(),
            })
            .collect();
        if slots.is_empty() {
            return;
        }
        let tasks = &self.graph.tasks;
        let placement = self.allocator.place(
            self.queue.iter().map(|&(_, _, i)| QueuedTask {
                task: i,
                cpus: tasks[i].cpus,
            }),
            &mut slots,
        );
        for a in placement {
            self.start(a.task, a.cluster);
        }
    }

    fn start(&mut self, task: usize, cluster: usize) {
        let t = &self.graph.tasks[task];
        let TaskPhase::Queued { since } = self.phases[task] else {
            unreachable!("placed a task that is not queued");
        };
        self.queue.remove(&(since, t.id, task));
        self.phases[task] = TaskPhase::Running {
            start: self.now,
            cluster,
        };
        self.task_cluster[task] = cluster;
        self.clusters[cluster].start_task(t.cpus);
        self.running.insert(task);
        self.queued_cpus -= t.cpus as u64;
        self.running_cpus += t.cpus as u64;
        self.wf_first_start[t.workflow].get_or_insert(self.now);
        self.events
            .schedule(self.now + t.runtime, EventKind::TaskCompletion { task });
    }

    fn supply(&self) -> u64 {
        self.allocated as u64 * self.cfg.vms_per_cluster as u64
    }

    fn tick(&mut self) {
        let queue: Vec<usize> = self.queue.iter().map(|&(_, _, i)| i).collect();
        let running: Vec<usize> = self.running.iter().copied().collect();
        let sample = MonitoringSample::new(
            self.now,
            self.supply(),
            self.queued_cpus,
            self.running_cpus,
            self.arrivals_since_tick,
        );
        let ctx = TickContext {
            now: self.now,
            interval: self.cfg.interval,
            sample,
            vms_per_cluster: self.cfg.vms_per_cluster,
            max_supply_vms: self.cfg.max_supply_vms(),
            idle_clusters: self.clusters.iter().filter(|c| c.is_idle()).count(),
            arrived_cpu_seconds: self.arrived_cpu_ms as f64 / 1000.0,
            graph: self.graph,
            phases: &self.phases,
            queue: &queue,
            running: &running,
        };
        let decision = self.autoscaler.tick(&ctx);
        self.decisions.push(decision);
        self.arrivals_since_tick = 0;
        self.arrived_cpu_ms = 0;

        let cmd = apply_provisioning(
            &self.clusters,
            decision.target_vms,
            self.cfg.vms_per_cluster,
            self.cfg.max_clusters,
        );
        for c in cmd.allocate {
            self.clusters[c].allocate(self.now);
            self.allocated += 1;
        }
        for c in cmd.deallocate {
            self.clusters[c].deallocate(self.now);
            self.allocated -= 1;
        }
        self.pending_release = cmd.pending_release;
        self.events
            .schedule(self.now + self.cfg.interval, EventKind::AutoscaleTick);
    }

    fn deallocation_check(&mut self, cluster: usize) {
        if self.pending_release > 0 && self.allocated > 1 && self.clusters[cluster].is_idle() {
            self.clusters[cluster].deallocate(self.now);
            self.allocated -= 1;
            self.pending_release -= 1;
        }
    }

    fn record_sample(&mut self) {
        if self.now < self.sample_from {
            return;
        }
        self.series.push(SeriesSample::new(
            self.now,
            self.supply(),
            self.queued_cpus + self.running_cpus,
            self.running_cpus,
        ));
    }

    fn finish(mut self) -> SimulationResult {
        let end = self.now;
        for c in &mut self.clusters {
            c.close_episode(end);
        }
        let graph = self.graph;
        let records = graph
            .workflows
            .iter()
            .enumerate()
            .map(|(w, wf)| WorkflowRecord {
                workflow_id: wf.id,
                arrival: wf.submit,
                first_task_start: self.wf_first_start[w].expect("every workflow ran"),
                last_task_completion: self.wf_done[w].expect("every workflow finished"),
                cp: wf.critical_path,
                baseline_response: None,
            })
            .collect();
        let tasks = graph
            .tasks
            .iter()
            .zip(&self.phases)
            .zip(&self.task_cluster)
            .map(|((t, p), &cluster)| {
                let TaskPhase::Done { start, end } = *p else {
                    unreachable!("task {} never finished", t.id);
                };
                TaskRun {
                    id: t.id,
                    workflow: graph.workflows[t.workflow].id,
                    start,
                    end,
                    cluster,
                }
            })
            .collect();
        SimulationResult {
            records,
            series: self.series,
            clusters: self.clusters,
            counters: self.autoscaler.into_counters(),
            decisions: self.decisions,
            tasks,
            end,
            interval: self.cfg.interval,
            wall_time: Duration::ZERO,
        }
    }
}
