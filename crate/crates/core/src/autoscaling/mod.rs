//! Demand estimation and the provisioning policies.
//!
//! Every policy runs only at autoscaling ticks. It sees the latest [`MonitoringSample`], a
//! bounded history of earlier samples, and a read-only view of the task graph, and it
//! returns a target number of VMs. The engine turns that target into whole clusters.
//!
//! Instruction accounting is unit cost: one unit per innermost loop iteration and one per
//! predictor evaluation. It is coarse but identical across policies.

mod adapt;
mod conpaas;
pub mod fit;
mod hist;
mod plan;
mod react;
mod reg;
mod token;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::time::SimTime;
use crate::workload::{TaskGraph, TaskPhase};

pub use adapt::{adapt_decide, Adapt};
pub use conpaas::{conpaas_forecast, ConPaaS, Predictor};
pub use hist::{hist_target, nearest_rank_percentile, Hist};
pub use plan::{plan_decide, Plan};
pub use react::{react_decide, React};
pub use reg::{reg_decide, reg_predict, Reg};
pub use token::{token_level_of_parallelism, Token};

/// What the resource monitor reports at an instant, in VM-slot units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitoringSample {
    pub t: SimTime,
    pub supply_vms: u64,
    pub demand_vms: u64,
    pub queued_cpus: u64,
    pub running_cpus: u64,
    /// Tasks that entered the central queue since the previous tick.
    pub arrivals_since_last_tick: u64,
}

impl MonitoringSample {
    pub fn new(t: SimTime, supply_vms: u64, queued_cpus: u64, running_cpus: u64, arrivals: u64) -> Self {
        MonitoringSample {
            t,
            supply_vms,
            demand_vms: compute_demand(queued_cpus, running_cpus),
            queued_cpus,
            running_cpus,
            arrivals_since_last_tick: arrivals,
        }
    }
}

/// Demand is the cpus of running tasks plus the cpus of eligible queued tasks.
/// Blocked tasks are not demand yet.
pub fn compute_demand(queued_eligible_cpus: u64, running_cpus: u64) -> u64 {
    queued_eligible_cpus + running_cpus
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisioningDecision {
    pub t: SimTime,
    pub target_vms: u64,
    pub policy: PolicyKind,
}

/// Everything a policy may look at during one tick.
#[derive(Debug, Clone, Copy)]
pub struct TickContext<'a> {
    pub now: SimTime,
    pub interval: SimTime,
    pub sample: MonitoringSample,
    pub vms_per_cluster: u32,
    /// Supply if every cluster the policy may use were allocated.
    pub max_supply_vms: u64,
    pub idle_clusters: usize,
    /// Σ runtime × cpus (CPU-seconds) of the tasks counted in `arrivals_since_last_tick`.
    pub arrived_cpu_seconds: f64,
    pub graph: &'a TaskGraph,
    pub phases: &'a [TaskPhase],
    /// Eligible queued tasks in FCFS order.
    pub queue: &'a [usize],
    pub running: &'a [usize],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickCounters {
    pub t: SimTime,
    pub instructions: u64,
    pub data_items: u64,
    pub history_len: usize,
}

/// Scale-level counters: cumulative instructions (I) and data items in memory (D).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleCounters {
    pub instructions: u64,
    pub peak_data_items: u64,
    pub ticks: Vec<TickCounters>,
}

impl ScaleCounters {
    pub fn count_instruction(&mut self, n: u64) {
        self.instructions += n;
    }

    pub fn record_data_items(&mut self, t: SimTime, history_len: usize, store_len: usize) {
        let data_items = (history_len + store_len) as u64;
        self.peak_data_items = self.peak_data_items.max(data_items);
        self.ticks.push(TickCounters {
            t,
            instructions: self.instructions,
            data_items,
            history_len,
        });
    }
}

/// Bounded ring of past samples; the newest is last.
#[derive(Debug, Clone)]
pub struct History {
    samples: VecDeque<MonitoringSample>,
    capacity: usize,
}

impl History {
    pub fn new(capacity: usize) -> Self {
        History {
            samples: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, s: MonitoringSample) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &MonitoringSample> + ExactSizeIterator {
        self.samples.iter()
    }

    pub fn demands(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.demand_vms as f64).collect()
    }

    pub fn from_samples(capacity: usize, samples: impl IntoIterator<Item = MonitoringSample>) -> Self {
        let mut h = History::new(capacity);
        for s in samples {
            h.push(s);
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    React,
    Reg,
    Adapt,
    Hist,
    #[serde(rename = "conpaas")]
    ConPaaS,
    Token,
    Plan,
    /// No autoscaling: every cluster stays allocated.
    Static,
}

impl PolicyKind {
    /// The seven provisioning policies, in reporting order.
    pub const AUTOSCALERS: [PolicyKind; 7] = [
        PolicyKind::React,
        PolicyKind::Reg,
        PolicyKind::Adapt,
        PolicyKind::Hist,
        PolicyKind::ConPaaS,
        PolicyKind::Token,
        PolicyKind::Plan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::React => "react",
            PolicyKind::Reg => "reg",
            PolicyKind::Adapt => "adapt",
            PolicyKind::Hist => "hist",
            PolicyKind::ConPaaS => "conpaas",
            PolicyKind::Token => "token",
            PolicyKind::Plan => "plan",
            PolicyKind::Static => "static",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "react" => PolicyKind::React,
            "reg" => PolicyKind::Reg,
            "adapt" => PolicyKind::Adapt,
            "hist" => PolicyKind::Hist,
            "conpaas" => PolicyKind::ConPaaS,
            "token" => PolicyKind::Token,
            "plan" => PolicyKind::Plan,
            "static" | "none" => PolicyKind::Static,
            _ => {
                return Err(Error::UnknownPolicy {
                    kind: "autoscaling",
                    name: s.to_string(),
                })
            }
        };
        Ok(kind)
    }
}

/// Policy tunables. Defaults are artifact choices, overridable from the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tunables {
    pub history_window: usize,
    pub up_threshold: f64,
    pub down_threshold: f64,
    pub hysteresis_ticks: u32,
    pub hist_bucket_s: f64,
    /// Buckets wrap after this many widths (24 one-hour buckets = hour of day).
    pub hist_buckets_per_cycle: u64,
    pub hist_percentile: f64,
    pub backtest_depth: usize,
    pub smoothing_alpha: f64,
    pub token_lookahead: u32,
}

impl Default for Tunables {
    fn default() -> Self {
        Tunables {
            history_window: 60,
            up_threshold: 0.9,
            down_threshold: 0.5,
            hysteresis_ticks: 3,
            hist_bucket_s: 3600.0,
            hist_buckets_per_cycle: 24,
            hist_percentile: 95.0,
            backtest_depth: 5,
            smoothing_alpha: 0.5,
            token_lookahead: 1,
        }
    }
}

/// A provisioning policy. `history` already contains the current sample as its last entry.
pub trait Policy: Send {
    fn decide(&mut self, ctx: &TickContext<'_>, history: &History, counters: &mut ScaleCounters) -> u64;

    /// Data items held in the policy's own store, beyond the shared history.
    fn store_size(&self) -> usize {
        0
    }
}

struct StaticPolicy;

impl Policy for StaticPolicy {
    fn decide(&mut self, ctx: &TickContext<'_>, _: &History, _: &mut ScaleCounters) -> u64 {
        ctx.max_supply_vms
    }
}

/// A policy together with its history and scale counters.
pub struct Autoscaler {
    kind: PolicyKind,
    history: History,
    policy: Box<dyn Policy>,
    counters: ScaleCounters,
}

impl fmt::Debug for Autoscaler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Autoscaler")
            .field("kind", &self.kind)
            .field("history", &self.history.len())
            .finish()
    }
}

impl Autoscaler {
    pub fn new(kind: PolicyKind, tunables: &Tunables) -> Self {
        let policy: Box<dyn Policy> = match kind {
            PolicyKind::React => Box::new(React::new(tunables)),
            PolicyKind::Reg => Box::new(Reg),
            PolicyKind::Adapt => Box::new(Adapt::new(tunables)),
            PolicyKind::Hist => Box::new(Hist::new(tunables)),
            PolicyKind::ConPaaS => Box::new(ConPaaS::new(tunables)),
            PolicyKind::Token => Box::new(Token::new(tunables)),
            PolicyKind::Plan => Box::new(Plan),
            PolicyKind::Static => Box::new(StaticPolicy),
        };
        Autoscaler {
            kind,
            history: History::new(tunables.history_window),
            policy,
            counters: ScaleCounters::default(),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn counters(&self) -> &ScaleCounters {
        &self.counters
    }

    pub fn into_counters(self) -> ScaleCounters {
        self.counters
    }

    /// Records the sample, runs the policy and samples D.
    pub fn tick(&mut self, ctx: &TickContext<'_>) -> ProvisioningDecision {
        self.history.push(ctx.sample);
        self.counters.count_instruction(1);
        let target = self.policy.decide(ctx, &self.history, &mut self.counters);
        self.counters
            .record_data_items(ctx.now, self.history.len(), self.policy.store_size());
        ProvisioningDecision {
            t: ctx.now,
            target_vms: target,
            policy: self.kind,
        }
    }
}
