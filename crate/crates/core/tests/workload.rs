use autoscale_sim::time::SimTime;
use autoscale_sim::workload::{
    critical_path, duplicate_trace, duplicated_totals, generate_burst, parse_trace, to_json, BurstSpec, Task, Workflow,
    WorkloadTrace,
};
use autoscale_sim::Error;
use proptest::prelude::*;

/// (runtime ms, parent offsets) per task; parents always point to earlier tasks.
fn dag() -> impl Strategy<Value = Vec<(u64, Vec<usize>)>> {
    prop::collection::vec((1u64..100_000, prop::collection::vec(0usize..8, 0..3)), 1..9).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (rt, ps))| {
                let mut parents: Vec<usize> = if i == 0 {
                    vec![]
                } else {
                    ps.into_iter().map(|p| p % i).collect()
                };
                parents.sort_unstable();
                parents.dedup();
                (rt, parents)
            })
            .collect()
    })
}

fn workflow_from(spec: &[(u64, Vec<usize>)], reversed: bool) -> Workflow {
    let mut tasks: Vec<Task> = spec
        .iter()
        .enumerate()
        .map(|(i, (rt, ps))| Task {
            id: 100 + i as u64,
            workflow_id: 7,
            runtime: SimTime::from_millis(*rt),
            cpus: 1 + (i as u32 % 3),
            parents: ps.iter().map(|&p| 100 + p as u64).collect(),
        })
        .collect();
    if reversed {
        tasks.reverse();
    }
    Workflow {
        id: 7,
        submit_time: SimTime::from_secs(3),
        tasks,
        chained_after: None,
    }
}

/// Longest path by enumerating every root-to-leaf path.
fn brute_force_cp(spec: &[(u64, Vec<usize>)]) -> u64 {
    fn walk(spec: &[(u64, Vec<usize>)], i: usize, acc: u64, best: &mut u64) {
        let acc = acc + spec[i].0;
        let children: Vec<usize> = (0..spec.len()).filter(|&c| spec[c].1.contains(&i)).collect();
        if children.is_empty() {
            *best = (*best).max(acc);
        }
        for c in children {
            walk(spec, c, acc, best);
        }
    }
    let mut best = 0;
    for root in (0..spec.len()).filter(|&i| spec[i].1.is_empty()) {
        walk(spec, root, 0, &mut best);
    }
    best
}

proptest! {
    #[test]
    fn critical_path_matches_path_enumeration(spec in dag(), reversed in any::<bool>()) {
        let wf = workflow_from(&spec, reversed);
        prop_assert_eq!(critical_path(&wf).as_millis(), brute_force_cp(&spec));
    }

    #[test]
    fn json_round_trip_is_lossless(spec in dag(), submit_ms in 0u64..10_000_000) {
        let mut wf = workflow_from(&spec, false);
        wf.submit_time = SimTime::from_millis(submit_ms);
        let trace = WorkloadTrace::new("rt", vec![wf]).unwrap();
        let back = parse_trace(&to_json(&trace)).unwrap();
        prop_assert_eq!(back, trace);
    }

    #[test]
    fn duplication_multiplies_load_and_keeps_shape(seed in any::<u64>(), n in 1usize..6) {
        let spec = BurstSpec { tasks: 60, workflows: 6, ..BurstSpec::default() };
        let trace = generate_burst(&spec, seed);
        let dup = duplicate_trace(&trace, n);
        prop_assert_eq!(dup.cpu_millis(), trace.cpu_millis() * n as u128);
        prop_assert_eq!((dup.workflow_count(), dup.task_count()), duplicated_totals(&trace, n));
        let mut cps: Vec<(SimTime, SimTime)> = trace.workflows().iter().map(|w| (w.submit_time, critical_path(w))).collect();
        let mut dup_cps: Vec<(SimTime, SimTime)> = dup.workflows().iter().map(|w| (w.submit_time, critical_path(w))).collect();
        cps.sort_unstable();
        dup_cps.sort_unstable();
        let expected: Vec<_> = cps.iter().flat_map(|x| std::iter::repeat_n(*x, n)).collect();
        prop_assert_eq!(dup_cps, expected);
    }

    #[test]
    fn generator_is_deterministic_per_seed(seed in any::<u64>()) {
        let spec = BurstSpec { tasks: 80, workflows: 5, ..BurstSpec::default() };
        prop_assert_eq!(generate_burst(&spec, seed), generate_burst(&spec, seed));
    }
}

#[test]
fn cycles_and_dangling_edges_are_rejected() {
    let cyclic = r#"{"name":"c","workflows":[{"id":1,"submit_time_s":0,"tasks":[
        {"id":1,"runtime_s":1,"cpus":1,"parents":[2]},
        {"id":2,"runtime_s":1,"cpus":1,"parents":[1]}]}]}"#;
    assert!(matches!(parse_trace(cyclic), Err(Error::CyclicWorkflow(1))));

    let dangling = r#"{"name":"d","workflows":[{"id":1,"submit_time_s":0,"tasks":[
        {"id":1,"runtime_s":1,"cpus":1,"parents":[9]}]}]}"#;
    assert!(matches!(
        parse_trace(dangling),
        Err(Error::DanglingEdge {
            workflow: 1,
            task: 1,
            parent: 9
        })
    ));

    let negative = r#"{"name":"n","workflows":[{"id":1,"submit_time_s":-1,"tasks":[
        {"id":1,"runtime_s":1,"cpus":1}]}]}"#;
    assert!(parse_trace(negative).is_err());
    assert!(parse_trace("{").is_err());
}
