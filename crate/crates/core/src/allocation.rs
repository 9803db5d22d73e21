//! Task-to-cluster placement policies used by the scheduler on every dispatch round.
//!
//! All three policies walk the central queue in FCFS order and break ties by the lowest
//! cluster id.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationPolicy {
    #[serde(rename = "fillworstfit")]
    FillWorstFit,
    #[serde(rename = "worstfit")]
    WorstFit,
    #[serde(rename = "bestfit")]
    BestFit,
}

impl AllocationPolicy {
    pub const ALL: [AllocationPolicy; 3] = [
        AllocationPolicy::FillWorstFit,
        AllocationPolicy::WorstFit,
        AllocationPolicy::BestFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AllocationPolicy::FillWorstFit => "fillworstfit",
            AllocationPolicy::WorstFit => "worstfit",
            AllocationPolicy::BestFit => "bestfit",
        }
    }

    /// Streams `queue` (already FCFS-ordered) against `clusters`, decrementing their free
    /// slots as tasks are placed.
    pub fn place<I>(self, queue: I, clusters: &mut [ClusterSlots]) -> Placement
    where
        I: IntoIterator<Item = QueuedTask>,
    {
        match self {
            AllocationPolicy::FillWorstFit => fill_worst_fit_stream(queue, clusters),
            AllocationPolicy::WorstFit => per_task_stream(queue, clusters, most_free_fitting),
            AllocationPolicy::BestFit => per_task_stream(queue, clusters, least_free_fitting),
        }
    }
}

impl fmt::Display for AllocationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocationPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "fillworstfit" => Ok(AllocationPolicy::FillWorstFit),
            "worstfit" => Ok(AllocationPolicy::WorstFit),
            "bestfit" => Ok(AllocationPolicy::BestFit),
            _ => Err(Error::UnknownPolicy {
                kind: "allocation",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedTask {
    pub task: usize,
    pub cpus: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterSlots {
    pub cluster: usize,
    pub free: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementRequest {
    pub queue: Vec<QueuedTask>,
    /// Allocated clusters only.
    pub clusters: Vec<ClusterSlots>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub task: usize,
    pub cluster: usize,
}

pub type Placement = Vec<Assignment>;

/// Fill the emptiest cluster with as many FCFS tasks as fit before re-selecting.
/// Stops at the first task that fits no cluster (no backfilling).
pub fn fill_worst_fit(req: &PlacementRequest) -> Placement {
    let mut clusters = req.clusters.clone();
    fill_worst_fit_stream(req.queue.iter().copied(), &mut clusters)
}

/// Per task, the cluster with the most free slots; tasks that fit nowhere are skipped.
pub fn worst_fit(req: &PlacementRequest) -> Placement {
    let mut clusters = req.clusters.clone();
    per_task_stream(req.queue.iter().copied(), &mut clusters, most_free_fitting)
}

/// Per task, the fitting cluster with the fewest free slots; tasks that fit nowhere are skipped.
pub fn best_fit(req: &PlacementRequest) -> Placement {
    let mut clusters = req.clusters.clone();
    per_task_stream(req.queue.iter().copied(), &mut clusters, least_free_fitting)
}

fn most_free(clusters: &[ClusterSlots]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in clusters.iter().enumerate() {
        match best {
            Some(b)
                if (clusters[b].free, std::cmp::Reverse(clusters[b].cluster))
                    >= (c.free, std::cmp::Reverse(c.cluster)) => {}
            _ => best = Some(i),
        }
    }
    best
}

fn most_free_fitting(clusters: &[ClusterSlots], cpus: u32) -> Option<usize> {
    most_free(clusters).filter(|&i| clusters[i].free >= cpus)
}

fn least_free_fitting(clusters: &[ClusterSlots], cpus: u32) -> Option<usize> {
    clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| c.free >= cpus)
        .min_by_key(|(_, c)| (c.free, c.cluster))
        .map(|(i, _)| i)
}

fn fill_worst_fit_stream<I>(queue: I, clusters: &mut [ClusterSlots]) -> Placement
where
    I: IntoIterator<Item = QueuedTask>,
{
    let mut out = Vec::new();
    let Some(mut current) = most_free(clusters) else {
        return out;
    };
    for task in queue {
        if task.cpus > clusters[current].free {
            match most_free(clusters) {
                Some(i) if clusters[i].free >= task.cpus => current = i,
                _ => break,
            }
        }
        clusters[current].free -= task.cpus;
        out.push(Assignment {
            task: task.task,
            cluster: clusters[current].cluster,
        });
    }
    out
}

fn per_task_stream<I, F>(queue: I, clusters: &mut [ClusterSlots], choose: F) -> Placement
where
    I: IntoIterator<Item = QueuedTask>,
    F: Fn(&[ClusterSlots], u32) -> Option<usize>,
{
    let mut out = Vec::new();
    let mut free_total: u64 = clusters.iter().map(|c| c.free as u64).sum();
    for task in queue {
        if free_total == 0 {
            break;
        }
        if let Some(i) = choose(clusters, task.cpus) {
            clusters[i].free -= task.cpus;
            free_total -= task.cpus as u64;
            out.push(Assignment {
                task: task.task,
                cluster: clusters[i].cluster,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;

    fn req(free: &[u32], cpus: &[u32]) -> PlacementRequest {
        PlacementRequest {
            queue: cpus
                .iter()
                .enumerate()
                .map(|(task, &cpus)| QueuedTask { task, cpus })
                .collect(),
            clusters: free
                .iter()
                .enumerate()
                .map(|(cluster, &free)| ClusterSlots { cluster, free })
                .collect(),
        }
    }

    fn clusters_of(p: &Placement) -> Vec<usize> {
        p.iter().map(|a| a.cluster).collect()
    }

    #[test]
    fn fill_worst_fit_fills_then_moves_on() {
        // A keeps the pass until only one slot is left; the third task re-selects B.
        assert_eq!(clusters_of(&fill_worst_fit(&req(&[5, 3], &[2, 2, 2]))), vec![A, A, B]);
    }

    #[test]
    fn fill_worst_fit_edge_cases() {
        assert!(fill_worst_fit(&req(&[2], &[3])).is_empty());
        assert!(fill_worst_fit(&req(&[5, 3], &[])).is_empty());
        assert!(fill_worst_fit(&req(&[], &[1])).is_empty());
    }

    #[test]
    fn fill_worst_fit_does_not_backfill() {
        // Head needs 4, nothing has 4 free: the 1-cpu task behind it waits.
        assert!(fill_worst_fit(&req(&[3, 3], &[4, 1])).is_empty());
    }

    #[test]
    fn worst_fit_reevaluates_after_each_task() {
        // t1 -> A (A=3), tie A=B=3 -> A (A=1), t3 -> B
        assert_eq!(clusters_of(&worst_fit(&req(&[5, 3], &[2, 2, 2]))), vec![A, A, B]);
    }

    #[test]
    fn worst_fit_single_cluster_matches_fill_worst_fit() {
        let r = req(&[7], &[2, 3, 1, 1]);
        assert_eq!(worst_fit(&r), fill_worst_fit(&r));
        // once a task fits nowhere, only the per-task variants keep going
        let r = req(&[7], &[2, 3, 1, 4, 1]);
        assert_eq!(fill_worst_fit(&r).len(), 3);
        assert_eq!(worst_fit(&r).len(), 4);
    }

    #[test]
    fn worst_fit_with_no_free_slots() {
        assert!(worst_fit(&req(&[0, 0], &[1, 1])).is_empty());
    }

    #[test]
    fn best_fit_examples() {
        assert_eq!(clusters_of(&best_fit(&req(&[5, 3], &[2]))), vec![B]);
        assert_eq!(clusters_of(&best_fit(&req(&[5, 1], &[2]))), vec![A]);
        assert_eq!(clusters_of(&best_fit(&req(&[5, 3], &[3, 3]))), vec![B, A]);
    }

    #[test]
    fn streaming_api_matches_request_api() {
        let r = req(&[4, 6, 2], &[1, 3, 2, 2, 5, 1]);
        for policy in AllocationPolicy::ALL {
            let mut clusters = r.clusters.clone();
            let streamed = policy.place(r.queue.iter().copied(), &mut clusters);
            let direct = match policy {
                AllocationPolicy::FillWorstFit => fill_worst_fit(&r),
                AllocationPolicy::WorstFit => worst_fit(&r),
                AllocationPolicy::BestFit => best_fit(&r),
            };
            assert_eq!(streamed, direct);
        }
    }

    #[test]
    fn parses_policy_names() {
        assert_eq!(
            "FillWorstFit".parse::<AllocationPolicy>().unwrap(),
            AllocationPolicy::FillWorstFit
        );
        assert_eq!(
            "bestfit".parse::<AllocationPolicy>().unwrap(),
            AllocationPolicy::BestFit
        );
        assert!("firstfit".parse::<AllocationPolicy>().is_err());
    }
}
