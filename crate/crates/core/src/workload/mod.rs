//! Workflow DAG data model, trace ingestion, and synthetic workload generators.

mod generate;
mod graph;
mod trace;
mod transform;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::time::SimTime;

pub use generate::{generate_burst, generate_chronos, BurstSpec, ChronosSpec};
pub use graph::{critical_path, eligible_tasks, FlatTask, FlatWorkflow, TaskGraph, TaskPhase};
pub use trace::{parse_trace, to_json};
pub use transform::{duplicate_trace, duplicated_totals, per_minute_task_peak, scale_factor_for_peak, scale_to_peak};

pub type TaskId = u64;
pub type WorkflowId = u64;

/// A unit of work with a-priori known runtime and CPU count.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub workflow_id: WorkflowId,
    pub runtime: SimTime,
    pub cpus: u32,
    pub parents: Vec<TaskId>,
}

impl Task {
    /// CPU-milliseconds of work this task represents.
    pub fn cpu_millis(&self) -> u128 {
        self.runtime.as_millis() as u128 * self.cpus as u128
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    pub id: WorkflowId,
    pub submit_time: SimTime,
    pub tasks: Vec<Task>,
    /// Entry tasks stay ineligible until this workflow has completed.
    pub chained_after: Option<WorkflowId>,
}

impl Workflow {
    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }
}

/// A validated set of workflows. Construct with [`WorkloadTrace::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadTrace {
    name: String,
    workflows: Vec<Workflow>,
    task_count: usize,
}

impl WorkloadTrace {
    /// Validates ids, edges, task parameters, DAG acyclicity and workflow chains.
    pub fn new(name: impl Into<String>, workflows: Vec<Workflow>) -> Result<Self> {
        validate(&workflows)?;
        let task_count = workflows.iter().map(|w| w.tasks.len()).sum();
        Ok(WorkloadTrace {
            name: name.into(),
            workflows,
            task_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn workflows(&self) -> &[Workflow] {
        &self.workflows
    }

    pub fn workflow_count(&self) -> usize {
        self.workflows.len()
    }

    pub fn task_count(&self) -> usize {
        self.task_count
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.workflows.iter().flat_map(|w| w.tasks.iter())
    }

    /// Total CPU-seconds of work in the trace.
    pub fn cpu_seconds(&self) -> f64 {
        self.cpu_millis() as f64 / 1000.0
    }

    pub fn cpu_millis(&self) -> u128 {
        self.tasks().map(Task::cpu_millis).sum()
    }

    pub fn max_task_cpus(&self) -> u32 {
        self.tasks().map(|t| t.cpus).max().unwrap_or(0)
    }

    pub fn first_submit(&self) -> Option<SimTime> {
        self.workflows.iter().map(|w| w.submit_time).min()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn validate(workflows: &[Workflow]) -> Result<()> {
    let mut workflow_ids = BTreeSet::new();
    let mut task_ids = BTreeSet::new();
    for wf in workflows {
        if !workflow_ids.insert(wf.id) {
            return Err(Error::InvalidTrace(format!("duplicate workflow id {}", wf.id)));
        }
        if wf.tasks.is_empty() {
            return Err(Error::InvalidTrace(format!("workflow {} has no tasks", wf.id)));
        }
        let local: BTreeSet<TaskId> = wf.tasks.iter().map(|t| t.id).collect();
        for task in &wf.tasks {
            if !task_ids.insert(task.id) {
                return Err(Error::InvalidTrace(format!("duplicate task id {}", task.id)));
            }
            if task.workflow_id != wf.id {
                return Err(Error::InvalidTask {
                    workflow: wf.id,
                    task: task.id,
                    reason: format!("belongs to workflow {}", task.workflow_id),
                });
            }
            if task.runtime == SimTime::ZERO {
                return Err(Error::InvalidTask {
                    workflow: wf.id,
                    task: task.id,
                    reason: "runtime must be positive".into(),
                });
            }
            if task.cpus == 0 {
                return Err(Error::InvalidTask {
                    workflow: wf.id,
                    task: task.id,
                    reason: "cpus must be at least 1".into(),
                });
            }
            if let Some(&parent) = task.parents.iter().find(|p| !local.contains(p)) {
                return Err(Error::DanglingEdge {
                    workflow: wf.id,
                    task: task.id,
                    parent,
                });
            }
        }
        if graph::topological_order(wf).is_none() {
            return Err(Error::CyclicWorkflow(wf.id));
        }
    }

    // Chains must reference known workflows and must not loop.
    let chain: BTreeMap<WorkflowId, Option<WorkflowId>> = workflows.iter().map(|w| (w.id, w.chained_after)).collect();
    for wf in workflows {
        let mut seen = BTreeSet::from([wf.id]);
        let mut cur = wf.chained_after;
        while let Some(prev) = cur {
            match chain.get(&prev) {
                None => {
                    return Err(Error::InvalidTrace(format!(
                        "workflow {} chained after unknown workflow {prev}",
                        wf.id
                    )))
                }
                Some(next) => {
                    if !seen.insert(prev) {
                        return Err(Error::InvalidTrace(format!(
                            "workflow chain through {} is cyclic",
                            wf.id
                        )));
                    }
                    cur = *next;
                }
            }
        }
    }
    Ok(())
}
