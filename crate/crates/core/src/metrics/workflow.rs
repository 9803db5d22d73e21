use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::SimTime;
use crate::workload::WorkflowId;

/// Execution record of one workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowRecord {
    pub workflow_id: WorkflowId,
    pub arrival: SimTime,
    pub first_task_start: SimTime,
    pub last_task_completion: SimTime,
    pub cp: SimTime,
    /// Response time of the same workflow on the static baseline, when one was run.
    pub baseline_response: Option<SimTime>,
}

/// Per-workflow metrics, all in seconds except the ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkflowMetrics {
    pub makespan: f64,
    pub wait: f64,
    pub response: f64,
    pub nsl: f64,
    pub slowdown: Option<f64>,
}

impl WorkflowRecord {
    pub fn makespan(&self) -> SimTime {
        self.last_task_completion - self.first_task_start
    }

    pub fn wait(&self) -> SimTime {
        self.first_task_start - self.arrival
    }

    pub fn response(&self) -> SimTime {
        self.makespan() + self.wait()
    }
}

pub fn workflow_metrics(r: &WorkflowRecord) -> Result<WorkflowMetrics> {
    if r.cp == SimTime::ZERO {
        return Err(Error::InvalidTrace(format!(
            "workflow {} has a zero critical path",
            r.workflow_id
        )));
    }
    if !(r.arrival <= r.first_task_start && r.first_task_start <= r.last_task_completion) {
        return Err(Error::Runtime(format!(
            "workflow {} has an inconsistent record",
            r.workflow_id
        )));
    }
    // Derived from the reported seconds so that R = M + W and NSL = R / CP hold exactly.
    // S compares whole milliseconds, so equal responses give exactly 1.
    let makespan = r.makespan().as_secs_f64();
    let wait = r.wait().as_secs_f64();
    let response = makespan + wait;
    Ok(WorkflowMetrics {
        makespan,
        wait,
        response,
        nsl: response / r.cp.as_secs_f64(),
        slowdown: r.baseline_response.map(|b| {
            if b == SimTime::ZERO {
                f64::NAN
            } else {
                r.response().as_millis() as f64 / b.as_millis() as f64
            }
        }),
    })
}

/// Σ (R − CP)⁺ over all workflows, in seconds.
pub fn cumulative_delay(records: &[WorkflowRecord]) -> f64 {
    let ms: u64 = records
        .iter()
        .map(|r| r.response().as_millis().saturating_sub(r.cp.as_millis()))
        .sum();
    ms as f64 / 1000.0
}

/// Aggregates over all workflows of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSummary {
    pub workflows: usize,
    pub mean_makespan: f64,
    pub mean_wait: f64,
    pub mean_response: f64,
    pub mean_nsl: f64,
    pub max_nsl: f64,
    /// (last completion − first arrival) over (latest submit + CP − earliest submit).
    pub workload_nsl: f64,
    pub mean_slowdown: Option<f64>,
    pub cumulative_delay: f64,
    pub workload_makespan: f64,
    /// Workflows that waited longer than the ideal workload span.
    pub long_waits: usize,
}

pub fn workload_summary(records: &[WorkflowRecord]) -> Result<WorkloadSummary> {
    if records.is_empty() {
        return Err(Error::Runtime("no workflow records".into()));
    }
    let metrics = records.iter().map(workflow_metrics).collect::<Result<Vec<_>>>()?;
    let n = records.len() as f64;
    let mean = |f: fn(&WorkflowMetrics) -> f64| metrics.iter().map(f).sum::<f64>() / n;
    let first_arrival = records.iter().map(|r| r.arrival).min().expect("non-empty");
    let last_completion = records.iter().map(|r| r.last_task_completion).max().expect("non-empty");
    let ideal_end = records.iter().map(|r| r.arrival + r.cp).max().expect("non-empty");
    let ideal_span = ideal_end - first_arrival;
    let actual_span = last_completion - first_arrival;
    let slowdowns: Option<Vec<f64>> = metrics.iter().map(|m| m.slowdown).collect();
    Ok(WorkloadSummary {
        workflows: records.len(),
        mean_makespan: mean(|m| m.makespan),
        mean_wait: mean(|m| m.wait),
        mean_response: mean(|m| m.response),
        mean_nsl: mean(|m| m.nsl),
        max_nsl: metrics.iter().map(|m| m.nsl).fold(0.0, f64::max),
        workload_nsl: actual_span.as_millis() as f64 / ideal_span.as_millis().max(1) as f64,
        mean_slowdown: slowdowns.map(|s| s.iter().sum::<f64>() / n),
        cumulative_delay: cumulative_delay(records),
        workload_makespan: actual_span.as_secs_f64(),
        long_waits: records.iter().filter(|r| r.wait() > ideal_span).count(),
    })
}
