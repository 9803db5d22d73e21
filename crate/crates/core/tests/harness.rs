use std::path::Path;

use autoscale_sim::allocation::AllocationPolicy;
use autoscale_sim::autoscaling::PolicyKind;
use autoscale_sim::harness::{
    clusters_for_load, run_experiment, run_sweep, to_csv, to_json, Execution, ExperimentConfig, MetricReport,
    SweepSpec, TraceSource,
};
use autoscale_sim::workload::BurstSpec;
use proptest::prelude::*;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(TraceSource::Burst(BurstSpec {
        tasks: 300,
        workflows: 15,
        ..BurstSpec::default()
    }));
    cfg.clusters = 4;
    cfg.vms_per_cluster = 12;
    cfg
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let mut spec = SweepSpec::new(small());
    spec.autoscalers = PolicyKind::AUTOSCALERS.to_vec();
    spec.allocators = AllocationPolicy::ALL.to_vec();
    spec.utilizations = vec![None, Some(0.5)];
    let seq = run_sweep(&spec, Path::new("."), Execution::Sequential);
    let par = run_sweep(&spec, Path::new("."), Execution::Parallel);
    let reports = |o: &autoscale_sim::harness::SweepOutcome| -> Vec<MetricReport> {
        o.runs().map(|r| r.report.clone()).collect()
    };
    assert_eq!(seq.failures().count(), 0);
    assert_eq!(reports(&seq).len(), 42);
    assert_eq!(reports(&seq), reports(&par));
    assert_eq!(to_csv(&reports(&seq)).unwrap(), to_csv(&reports(&par)).unwrap());
    assert_eq!(to_json(&reports(&seq)), to_json(&reports(&par)));
}

#[test]
fn static_run_is_its_own_baseline() {
    let mut cfg = small();
    cfg.autoscaler = PolicyKind::Static;
    let run = run_experiment(&cfg, Path::new(".")).unwrap();
    assert_eq!(run.report.workflows.mean_slowdown, Some(1.0));
    assert_eq!(run.report.baseline, Some(run.report.elasticity));
}

#[test]
fn autoscaled_run_is_compared_with_static_of_same_size() {
    let mut cfg = small();
    cfg.autoscaler = PolicyKind::React;
    let run = run_experiment(&cfg, Path::new(".")).unwrap();
    let base = run.report.baseline.expect("baseline on by default");
    // the static system keeps every cluster for the whole run
    assert_eq!(base.v_bar, 48.0);
    assert!(run.report.elasticity.v_bar <= base.v_bar);
    assert!(run.records.iter().all(|r| r.baseline_response.is_some()));

    cfg.baseline = false;
    let run = run_experiment(&cfg, Path::new(".")).unwrap();
    assert_eq!(run.report.baseline, None);
    assert_eq!(run.report.workflows.mean_slowdown, None);
}

#[test]
fn config_json_round_trip() {
    let mut cfg = small();
    cfg.target_utilization = Some(0.6);
    cfg.autoscaler = PolicyKind::ConPaaS;
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
}

proptest! {
    #[test]
    fn sizing_scales_inversely_with_utilization(
        load in 1.0f64..1e8,
        span in 1.0f64..1e5,
        tenths in 1u32..=10,
        vms in 1u32..200,
    ) {
        let u = tenths as f64 / 10.0;
        let n = clusters_for_load(load, span, u, vms).unwrap();
        let half = clusters_for_load(load, span, u / 2.0, vms).unwrap();
        prop_assert!(half == 2 * n || half + 1 == 2 * n || (n == 1 && half <= 2));
        // n clusters carry the load at or below the target; n - 1 do not
        let capacity = |k: usize| k as f64 * vms as f64 * span * u;
        prop_assert!(capacity(n) >= load * (1.0 - 1e-12));
        prop_assert!(n == 1 || capacity(n - 1) < load * (1.0 + 1e-12));
    }
}
