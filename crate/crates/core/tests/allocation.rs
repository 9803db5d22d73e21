use std::collections::{BTreeMap, BTreeSet};

use autoscale_sim::allocation::{
    best_fit, fill_worst_fit, worst_fit, AllocationPolicy, ClusterSlots, Placement, PlacementRequest, QueuedTask,
};
use proptest::prelude::*;

fn request(max_tasks: usize) -> impl Strategy<Value = PlacementRequest> {
    (
        prop::collection::vec(0u32..=12, 1..6),
        prop::collection::vec(1u32..=6, 0..max_tasks),
    )
        .prop_map(|(free, cpus)| PlacementRequest {
            queue: cpus
                .into_iter()
                .enumerate()
                .map(|(task, cpus)| QueuedTask { task, cpus })
                .collect(),
            clusters: free
                .into_iter()
                .enumerate()
                .map(|(i, free)| ClusterSlots {
                    cluster: i * 3 + 1,
                    free,
                })
                .collect(),
        })
}

fn run(policy: AllocationPolicy, req: &PlacementRequest) -> Placement {
    match policy {
        AllocationPolicy::FillWorstFit => fill_worst_fit(req),
        AllocationPolicy::WorstFit => worst_fit(req),
        AllocationPolicy::BestFit => best_fit(req),
    }
}

fn remaining(req: &PlacementRequest, p: &Placement) -> BTreeMap<usize, i64> {
    let mut free: BTreeMap<usize, i64> = req.clusters.iter().map(|c| (c.cluster, c.free as i64)).collect();
    for a in p {
        *free.get_mut(&a.cluster).expect("known cluster") -= req.queue[a.task].cpus as i64;
    }
    free
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn placements_respect_free_slots(req in request(12)) {
        for policy in AllocationPolicy::ALL {
            let p = run(policy, &req);
            prop_assert!(remaining(&req, &p).values().all(|&f| f >= 0), "{policy} overfills");
            let tasks: BTreeSet<usize> = p.iter().map(|a| a.task).collect();
            prop_assert_eq!(tasks.len(), p.len(), "{} places a task twice", policy);
            // queue order is preserved
            prop_assert!(p.windows(2).all(|w| w[0].task < w[1].task));
        }
    }

    #[test]
    fn queue_fitting_one_cluster_is_placed_whole(req in request(12), big in any::<prop::sample::Index>()) {
        let mut req = req;
        let total_cpus: u32 = req.queue.iter().map(|t| t.cpus).sum();
        let k = big.index(req.clusters.len());
        req.clusters[k].free = req.clusters[k].free.max(total_cpus);
        for policy in AllocationPolicy::ALL {
            prop_assert_eq!(run(policy, &req).len(), req.queue.len(), "{}", policy);
        }
    }

    #[test]
    fn best_fit_leaves_at_least_as_many_idle_clusters(req in request(12), prefix in 0usize..12) {
        let mut req = req;
        for c in &mut req.clusters {
            c.free = 8;
        }
        req.queue.truncate(prefix);
        let idle = |p: &Placement| remaining(&req, p).values().filter(|&&f| f == 8).count();
        prop_assert!(idle(&best_fit(&req)) >= idle(&worst_fit(&req)));
    }

    #[test]
    fn single_task_worst_fit_variants_coincide(req in request(2)) {
        let mut req = req;
        req.queue.truncate(1);
        prop_assert_eq!(fill_worst_fit(&req), worst_fit(&req));
    }

    #[test]
    fn best_fit_picks_the_tightest_fitting_cluster(req in request(2)) {
        let mut req = req;
        req.queue.truncate(1);
        let p = best_fit(&req);
        if let Some(t) = req.queue.first() {
            let tightest = req
                .clusters
                .iter()
                .filter(|c| c.free >= t.cpus)
                .min_by_key(|c| (c.free, c.cluster))
                .map(|c| c.cluster);
            prop_assert_eq!(p.first().map(|a| a.cluster), tightest);
        }
    }
}

#[test]
fn enough_total_capacity_does_not_mean_equal_task_sets() {
    // WorstFit spreads the two 3-cpu tasks onto the 11-slot cluster and strands the 6-cpu
    // task; BestFit packs them into the 4- and 5-slot clusters.
    let req = PlacementRequest {
        queue: [3, 3, 6]
            .into_iter()
            .enumerate()
            .map(|(task, cpus)| QueuedTask { task, cpus })
            .collect(),
        clusters: [2, 4, 2, 5, 11]
            .into_iter()
            .enumerate()
            .map(|(cluster, free)| ClusterSlots { cluster, free })
            .collect(),
    };
    assert_eq!(best_fit(&req).len(), 3);
    assert_eq!(worst_fit(&req).len(), 2);
    assert_eq!(fill_worst_fit(&req).len(), 2);
}
