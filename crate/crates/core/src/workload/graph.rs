use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use super::{TaskId, Workflow, WorkloadTrace};
use crate::time::SimTime;

/// Kahn's algorithm over task indices. `None` when the workflow contains a cycle.
pub(crate) fn topological_order(wf: &Workflow) -> Option<Vec<usize>> {
    let index: HashMap<TaskId, usize> = wf.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let mut indegree = vec![0usize; wf.tasks.len()];
    let mut children = vec![Vec::new(); wf.tasks.len()];
    for (i, t) in wf.tasks.iter().enumerate() {
        for p in &t.parents {
            let &pi = index.get(p)?;
            children[pi].push(i);
            indegree[i] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..wf.tasks.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(wf.tasks.len());
    while let Some(i) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    (order.len() == wf.tasks.len()).then_some(order)
}

/// Longest root-to-leaf runtime sum. Edges carry no transfer cost.
pub fn critical_path(wf: &Workflow) -> SimTime {
    let order = topological_order(wf).expect("critical_path requires an acyclic workflow");
    let index: HashMap<TaskId, usize> = wf.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let mut finish = vec![SimTime::ZERO; wf.tasks.len()];
    for i in order {
        let task = &wf.tasks[i];
        let ready = task
            .parents
            .iter()
            .map(|p| finish[index[p]])
            .max()
            .unwrap_or(SimTime::ZERO);
        finish[i] = ready + task.runtime;
    }
    finish.into_iter().max().unwrap_or(SimTime::ZERO)
}

/// Tasks of `wf` that may run at `now`, ordered by (eligibility time, id).
///
/// `completed` maps finished task ids to their completion time. `chain_ready_at` is the
/// completion time of the predecessor workflow, `None` while it is unfinished; pass
/// `Some(SimTime::ZERO)` for unchained workflows.
pub fn eligible_tasks(
    wf: &Workflow,
    completed: &BTreeMap<TaskId, SimTime>,
    chain_ready_at: Option<SimTime>,
    now: SimTime,
) -> Vec<TaskId> {
    if wf.submit_time > now {
        return Vec::new();
    }
    let Some(chain_ready) = chain_ready_at else {
        return Vec::new();
    };
    let base = wf.submit_time.max(chain_ready);
    let mut out: Vec<(SimTime, TaskId)> = wf
        .tasks
        .iter()
        .filter(|t| !completed.contains_key(&t.id))
        .filter_map(|t| {
            let mut at = base;
            for p in &t.parents {
                at = at.max(*completed.get(p)?);
            }
            Some((at, t.id))
        })
        .collect();
    out.sort_unstable();
    out.into_iter().map(|(_, id)| id).collect()
}

/// Execution state of one task inside a running simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskPhase {
    /// Waiting on parents, workflow arrival or a chained predecessor.
    Blocked,
    Queued {
        since: SimTime,
    },
    Running {
        start: SimTime,
        cluster: usize,
    },
    Done {
        start: SimTime,
        end: SimTime,
    },
}

#[derive(Debug, Clone)]
pub struct FlatTask {
    pub id: TaskId,
    pub workflow: usize,
    pub runtime: SimTime,
    pub cpus: u32,
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FlatWorkflow {
    pub id: u64,
    pub submit: SimTime,
    pub chained_after: Option<usize>,
    /// Workflows chained after this one.
    pub successors: Vec<usize>,
    pub tasks: Range<usize>,
    /// Parentless tasks, sorted by id.
    pub entries: Vec<usize>,
    pub critical_path: SimTime,
}

/// Index-based view of a whole trace, shared read-only by the engine and the policies.
#[derive(Debug, Clone)]
pub struct TaskGraph {
    pub tasks: Vec<FlatTask>,
    pub workflows: Vec<FlatWorkflow>,
}

impl TaskGraph {
    pub fn new(trace: &WorkloadTrace) -> Self {
        let wf_index: HashMap<u64, usize> = trace.workflows().iter().enumerate().map(|(i, w)| (w.id, i)).collect();
        let mut tasks = Vec::with_capacity(trace.task_count());
        let mut workflows = Vec::with_capacity(trace.workflow_count());
        for (wi, wf) in trace.workflows().iter().enumerate() {
            let start = tasks.len();
            let local: HashMap<TaskId, usize> = wf.tasks.iter().enumerate().map(|(i, t)| (t.id, start + i)).collect();
            for t in &wf.tasks {
                tasks.push(FlatTask {
                    id: t.id,
                    workflow: wi,
                    runtime: t.runtime,
                    cpus: t.cpus,
                    parents: t.parents.iter().map(|p| local[p]).collect(),
                    children: Vec::new(),
                });
            }
            let range = start..tasks.len();
            for i in range.clone() {
                for pi in tasks[i].parents.clone() {
                    tasks[pi].children.push(i);
                }
            }
            let mut entries: Vec<usize> = range.clone().filter(|&i| tasks[i].parents.is_empty()).collect();
            entries.sort_by_key(|&i| tasks[i].id);
            workflows.push(FlatWorkflow {
                id: wf.id,
                submit: wf.submit_time,
                chained_after: wf.chained_after.map(|id| wf_index[&id]),
                successors: Vec::new(),
                tasks: range,
                entries,
                critical_path: critical_path(wf),
            });
        }
        for wi in 0..workflows.len() {
            if let Some(prev) = workflows[wi].chained_after {
                workflows[prev].successors.push(wi);
            }
        }
        TaskGraph { tasks, workflows }
    }
}
