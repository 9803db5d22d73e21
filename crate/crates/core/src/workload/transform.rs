use std::collections::BTreeMap;

use super::{Workflow, WorkloadTrace};

/// Largest number of tasks submitted within any single minute.
pub fn per_minute_task_peak(trace: &WorkloadTrace) -> usize {
    let mut per_minute: BTreeMap<u64, usize> = BTreeMap::new();
    for wf in trace.workflows() {
        *per_minute.entry(wf.submit_time.as_millis() / 60_000).or_default() += wf.tasks.len();
    }
    per_minute.into_values().max().unwrap_or(0)
}

/// Copies needed for the trace's per-minute peak to reach `reference_peak`.
pub fn scale_factor_for_peak(trace: &WorkloadTrace, reference_peak: usize) -> usize {
    let own = per_minute_task_peak(trace).max(1);
    reference_peak.div_ceil(own).max(1)
}

/// Duplicates the trace until its per-minute peak matches `reference_peak`.
/// `override_copies` replaces the computed factor.
pub fn scale_to_peak(trace: &WorkloadTrace, reference_peak: usize, override_copies: Option<usize>) -> WorkloadTrace {
    let n = override_copies.unwrap_or_else(|| scale_factor_for_peak(trace, reference_peak));
    duplicate_trace(trace, n)
}

/// (workflows, tasks) of an `n`-fold duplication, without materializing it.
pub fn duplicated_totals(trace: &WorkloadTrace, n: usize) -> (usize, usize) {
    (trace.workflow_count() * n, trace.task_count() * n)
}

/// `n` independent copies with fresh ids and unchanged timing.
pub fn duplicate_trace(trace: &WorkloadTrace, n: usize) -> WorkloadTrace {
    let n = n.max(1);
    if n == 1 {
        return trace.clone();
    }
    let wf_stride = trace.workflows().iter().map(|w| w.id).max().map_or(1, |m| m + 1);
    let task_stride = trace.tasks().map(|t| t.id).max().map_or(1, |m| m + 1);
    let mut workflows = Vec::with_capacity(trace.workflow_count() * n);
    for copy in 0..n as u64 {
        let wf_off = copy * wf_stride;
        let task_off = copy * task_stride;
        for wf in trace.workflows() {
            let mut tasks = wf.tasks.clone();
            for t in &mut tasks {
                t.id += task_off;
                t.workflow_id += wf_off;
                for p in &mut t.parents {
                    *p += task_off;
                }
            }
            workflows.push(Workflow {
                id: wf.id + wf_off,
                submit_time: wf.submit_time,
                tasks,
                chained_after: wf.chained_after.map(|c| c + wf_off),
            });
        }
    }
    WorkloadTrace::new(format!("{} x{n}", trace.name()), workflows).expect("duplicated trace stays valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{generate_chronos, ChronosSpec};

    #[test]
    fn duplicate_identity_and_double() {
        let trace = generate_chronos(&ChronosSpec::default());
        assert_eq!(duplicate_trace(&trace, 1), trace);
        let d = duplicate_trace(&trace, 2);
        assert_eq!((d.workflow_count(), d.task_count()), (2048, 6144));
        assert_eq!(d.cpu_millis(), 2 * trace.cpu_millis());
    }

    #[test]
    fn chronos_peak_and_scale_factor() {
        let trace = generate_chronos(&ChronosSpec::default());
        assert_eq!(per_minute_task_peak(&trace), 1536);
        assert_eq!(scale_factor_for_peak(&trace, 24_000), 16);
        assert_eq!(scale_factor_for_peak(&trace, 1536), 1);
        let scaled = scale_to_peak(&trace, 24_000, Some(22));
        assert_eq!(scaled.workflow_count(), 22 * 1024);
    }

    #[test]
    fn large_duplication_totals() {
        // declared totals of the largest engineering trace
        let per_wf = vec![34usize; 3551];
        let mut tasks_left = 122_105 - per_wf.iter().sum::<usize>();
        let mut workflows = Vec::new();
        let mut next = 0u64;
        for (i, n) in per_wf.into_iter().enumerate() {
            let n = n + usize::from(tasks_left > 0).min(tasks_left);
            tasks_left = tasks_left.saturating_sub(1);
            let tasks = (0..n)
                .map(|_| {
                    next += 1;
                    crate::workload::test_util::task(next, i as u64, 1, 1, &[])
                })
                .collect();
            workflows.push(crate::workload::test_util::workflow(i as u64, 0, tasks));
        }
        let trace = WorkloadTrace::new("t4", workflows).unwrap();
        assert_eq!(trace.task_count(), 122_105);
        assert_eq!(duplicated_totals(&trace, 975), (3_462_225, 119_052_375));
    }
}
