use serde::{Deserialize, Serialize};

use crate::time::SimTime;

const HOUR_MS: u64 = 3_600_000;

/// A site of identical VM slots and its accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterState {
    pub id: usize,
    pub vms_total: u32,
    pub vms_busy: u32,
    pub allocated: bool,
    pub running_tasks: usize,
    /// Σ cpus × runtime of tasks completed here, in VM-milliseconds.
    pub busy_vm_ms: u64,
    pub allocated_ms: u64,
    /// Σ over allocation episodes of the episode length rounded up to whole hours.
    pub charged_hours: u64,
    pub allocations: u32,
    allocated_since: Option<SimTime>,
}

impl ClusterState {
    pub fn new(id: usize, vms_total: u32) -> Self {
        ClusterState {
            id,
            vms_total,
            vms_busy: 0,
            allocated: false,
            running_tasks: 0,
            busy_vm_ms: 0,
            allocated_ms: 0,
            charged_hours: 0,
            allocations: 0,
            allocated_since: None,
        }
    }

    pub fn free(&self) -> u32 {
        if self.allocated {
            self.vms_total - self.vms_busy
        } else {
            0
        }
    }

    pub fn is_idle(&self) -> bool {
        self.allocated && self.running_tasks == 0
    }

    pub fn allocate(&mut self, now: SimTime) {
        debug_assert!(!self.allocated);
        self.allocated = true;
        self.allocations += 1;
        self.allocated_since = Some(now);
    }

    pub fn deallocate(&mut self, now: SimTime) {
        debug_assert!(self.is_idle(), "cluster {} released while busy", self.id);
        self.close_episode(now);
        self.allocated = false;
    }

    /// Closes the open allocation episode, if any, without changing the allocation flag.
    pub fn close_episode(&mut self, now: SimTime) {
        if let Some(since) = self.allocated_since.take() {
            let ms = (now - since).as_millis();
            self.allocated_ms += ms;
            self.charged_hours += ms.div_ceil(HOUR_MS);
        }
    }

    pub fn start_task(&mut self, cpus: u32) {
        debug_assert!(self.allocated && self.vms_busy + cpus <= self.vms_total);
        self.vms_busy += cpus;
        self.running_tasks += 1;
    }

    pub fn finish_task(&mut self, cpus: u32, runtime: SimTime) {
        self.vms_busy -= cpus;
        self.running_tasks -= 1;
        self.busy_vm_ms += cpus as u64 * runtime.as_millis();
    }

    /// Charged VM-milliseconds; never below `busy_vm_ms`.
    pub fn charged_vm_ms(&self) -> u64 {
        self.charged_hours * HOUR_MS * self.vms_total as u64
    }
}

/// What the engine should do to move toward a provisioning target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProvisioningCommands {
    pub desired_clusters: usize,
    pub allocate: Vec<usize>,
    pub deallocate: Vec<usize>,
    /// Releases still owed once more clusters go idle.
    pub pending_release: usize,
}

/// Turns a VM target into cluster commands. Allocation takes the lowest-id free sites;
/// only idle clusters are released, lowest id first, and one cluster always stays allocated.
pub fn apply_provisioning(
    clusters: &[ClusterState],
    target_vms: u64,
    vms_per_cluster: u32,
    max_clusters: usize,
) -> ProvisioningCommands {
    let wanted = target_vms.div_ceil(vms_per_cluster as u64).max(1);
    let desired = (wanted.min(max_clusters as u64) as usize).max(1);
    let allocated = clusters.iter().filter(|c| c.allocated).count();
    let mut cmd = ProvisioningCommands {
        desired_clusters: desired,
        ..Default::default()
    };
    if desired > allocated {
        cmd.allocate = clusters
            .iter()
            .filter(|c| !c.allocated)
            .take(desired - allocated)
            .map(|c| c.id)
            .collect();
    } else if desired < allocated {
        let release = allocated - desired;
        cmd.deallocate = clusters
            .iter()
            .filter(|c| c.is_idle())
            .take(release.min(allocated - 1))
            .map(|c| c.id)
            .collect();
        cmd.pending_release = release - cmd.deallocate.len();
    }
    cmd
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(states: &[(bool, usize)]) -> Vec<ClusterState> {
        states
            .iter()
            .enumerate()
            .map(|(i, &(allocated, running))| {
                let mut c = ClusterState::new(i, 70);
                c.allocated = allocated;
                c.running_tasks = running;
                c.vms_busy = running as u32;
                c
            })
            .collect()
    }

    #[test]
    fn zero_target_keeps_one_cluster() {
        let c = sites(&[(true, 0), (true, 0), (true, 0)]);
        let cmd = apply_provisioning(&c, 0, 70, 50);
        assert_eq!(cmd.desired_clusters, 1);
        assert_eq!(cmd.deallocate, vec![0, 1]);
        assert_eq!(cmd.pending_release, 0);
    }

    #[test]
    fn ceil_of_target() {
        let c = sites(&[(true, 1), (false, 0), (false, 0)]);
        let cmd = apply_provisioning(&c, 71, 70, 50);
        assert_eq!(cmd.desired_clusters, 2);
        assert_eq!(cmd.allocate, vec![1]);
    }

    #[test]
    fn only_idle_clusters_are_released() {
        let c = sites(&[(true, 3), (true, 1), (true, 0)]);
        let cmd = apply_provisioning(&c, 140, 70, 50);
        assert_eq!(cmd.deallocate, vec![2]);
        assert_eq!(cmd.pending_release, 0);
    }

    #[test]
    fn busy_clusters_leave_a_pending_release() {
        let c = sites(&[(true, 3), (true, 1), (true, 0)]);
        let cmd = apply_provisioning(&c, 10, 70, 50);
        assert_eq!(cmd.deallocate, vec![2]);
        assert_eq!(cmd.pending_release, 1);
    }

    #[test]
    fn capped_at_max_clusters() {
        let c = sites(&[(true, 0), (false, 0), (false, 0), (false, 0)]);
        let cmd = apply_provisioning(&c, 10_000, 70, 3);
        assert_eq!(cmd.allocate, vec![1, 2]);
    }

    #[test]
    fn charging_rounds_each_episode_up() {
        let mut c = ClusterState::new(0, 70);
        c.allocate(SimTime::ZERO);
        c.deallocate(SimTime::from_secs(60));
        c.allocate(SimTime::from_secs(100));
        c.deallocate(SimTime::from_secs(100 + 3600));
        assert_eq!(c.charged_hours, 2);
        assert_eq!(c.allocated_ms, 3_660_000);
    }
}
