use crate::error::{Error, Result};
use crate::time::SimTime;
use crate::workload::WorkloadTrace;

/// Ideal span of a workload: from the first submission to the latest
/// `submit + critical path` over all workflows.
pub fn ideal_span(trace: &WorkloadTrace) -> SimTime {
    let first = trace.first_submit().unwrap_or(SimTime::ZERO);
    let last = trace
        .workflows()
        .iter()
        .map(|w| w.submit_time + crate::workload::critical_path(w))
        .max()
        .unwrap_or(first);
    last - first
}

/// Clusters needed to run `trace` at `target_utilization`, using each workflow's critical
/// path as its runtime.
pub fn size_infrastructure(trace: &WorkloadTrace, target_utilization: f64, vms_per_cluster: u32) -> Result<usize> {
    if trace.task_count() == 0 {
        return Err(Error::InvalidTrace("cannot size an empty trace".into()));
    }
    let load = trace.cpu_millis() as f64 / 1000.0;
    clusters_for_load(
        load,
        ideal_span(trace).as_secs_f64(),
        target_utilization,
        vms_per_cluster,
    )
}

/// `ceil(load / (span × utilization × vms_per_cluster))`, at least 1.
pub fn clusters_for_load(load_cpu_s: f64, span_s: f64, target_utilization: f64, vms_per_cluster: u32) -> Result<usize> {
    if span_s.is_nan() || span_s <= 0.0 {
        return Err(Error::InvalidTrace("workload span is zero".into()));
    }
    if !(target_utilization > 0.0 && target_utilization <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target utilization {target_utilization} is outside (0, 1]"
        )));
    }
    if vms_per_cluster == 0 {
        return Err(Error::InvalidConfig("vms_per_cluster must be at least 1".into()));
    }
    let raw = load_cpu_s / (span_s * target_utilization * vms_per_cluster as f64);
    Ok((raw.ceil() as usize).max(1))
}
