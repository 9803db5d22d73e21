use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sizing::size_infrastructure;
use crate::allocation::AllocationPolicy;
use crate::autoscaling::{PolicyKind, Tunables};
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::time::SimTime;
use crate::workload::{
    duplicate_trace, generate_burst, generate_chronos, parse_trace, scale_to_peak, BurstSpec, ChronosSpec,
    WorkloadTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurstPreset {
    AskalonEe2,
    AskalonEe2Full,
    AskalonEe,
    Spec,
}

impl BurstPreset {
    pub fn spec(self) -> BurstSpec {
        match self {
            BurstPreset::AskalonEe2 => BurstSpec::askalon_ee2_like(),
            BurstPreset::AskalonEe2Full => BurstSpec::askalon_ee2_full(),
            BurstPreset::AskalonEe => BurstSpec::askalon_ee_like(),
            BurstPreset::Spec => BurstSpec::spec_like(),
        }
    }
}

/// Where a workload comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSource {
    File { path: PathBuf },
    Chronos(ChronosSpec),
    Burst(BurstSpec),
    Preset { name: BurstPreset },
}

impl TraceSource {
    /// Relative file paths are resolved against `base_dir`.
    pub fn load(&self, seed: u64, base_dir: &Path) -> Result<WorkloadTrace> {
        match self {
            TraceSource::File { path } => {
                let path = if path.is_relative() {
                    base_dir.join(path)
                } else {
                    path.clone()
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                parse_trace(&text).map_err(|e| e.context(path.display().to_string()))
            }
            TraceSource::Chronos(spec) => Ok(generate_chronos(spec)),
            TraceSource::Burst(spec) => Ok(generate_burst(spec, seed)),
            TraceSource::Preset { name } => Ok(generate_burst(&name.spec(), seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    Duplicate {
        copies: usize,
    },
    /// Duplicate until the per-minute task peak reaches `reference_peak`, or exactly
    /// `copies` times when given.
    ScaleToPeak {
        reference_peak: usize,
        #[serde(default)]
        copies: Option<usize>,
    },
}

impl Transform {
    pub fn apply(&self, trace: &WorkloadTrace) -> Result<WorkloadTrace> {
        match *self {
            Transform::Duplicate { copies: 0 } | Transform::ScaleToPeak { copies: Some(0), .. } => {
                Err(Error::InvalidConfig("duplication needs at least one copy".into()))
            }
            Transform::Duplicate { copies } => Ok(duplicate_trace(trace, copies)),
            Transform::ScaleToPeak { reference_peak, copies } => Ok(scale_to_peak(trace, reference_peak, copies)),
        }
    }
}

fn default_clusters() -> usize {
    50
}

fn default_vms() -> u32 {
    70
}

fn default_interval() -> f64 {
    30.0
}

fn default_autoscaler() -> PolicyKind {
    PolicyKind::React
}

fn default_allocator() -> AllocationPolicy {
    AllocationPolicy::FillWorstFit
}

fn yes() -> bool {
    true
}

/// One simulation, declaratively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trace: TraceSource,
    #[serde(default)]
    pub transforms: Vec<Transform>,
    #[serde(default = "default_clusters")]
    pub clusters: usize,
    #[serde(default = "default_vms")]
    pub vms_per_cluster: u32,
    /// Autoscaler ceiling; defaults to `clusters`.
    #[serde(default)]
    pub max_clusters: Option<usize>,
    /// Seconds between autoscaling ticks.
    #[serde(default = "default_interval")]
    pub autoscaling_interval: f64,
    #[serde(default = "default_autoscaler")]
    pub autoscaler: PolicyKind,
    #[serde(default = "default_allocator")]
    pub allocator: AllocationPolicy,
    #[serde(default)]
    pub tunables: Tunables,
    #[serde(default)]
    pub seed: u64,
    /// Divide A_U and A_O by the maximum supply.
    #[serde(default)]
    pub normalize_accuracy: bool,
    /// Also run the static infrastructure of the same size to get slowdowns.
    #[serde(default = "yes")]
    pub baseline: bool,
    /// When set, `clusters` and `max_clusters` are replaced by the sized infrastructure.
    #[serde(default)]
    pub target_utilization: Option<f64>,
    #[serde(default)]
    pub dump_series: bool,
}

impl ExperimentConfig {
    pub fn new(trace: TraceSource) -> Self {
        ExperimentConfig {
            trace,
            transforms: Vec::new(),
            clusters: default_clusters(),
            vms_per_cluster: default_vms(),
            max_clusters: None,
            autoscaling_interval: default_interval(),
            autoscaler: default_autoscaler(),
            allocator: default_allocator(),
            tunables: Tunables::default(),
            seed: 0,
            normalize_accuracy: false,
            baseline: true,
            target_utilization: None,
            dump_series: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidConfig("clusters must be at least 1".into()));
        }
        if self.max_clusters.is_some_and(|m| m < self.clusters) {
            return Err(Error::InvalidConfig("max_clusters must be at least clusters".into()));
        }
        if self.vms_per_cluster == 0 {
            return Err(Error::InvalidConfig("vms_per_cluster must be at least 1".into()));
        }
        if !(self.autoscaling_interval.is_finite() && self.autoscaling_interval > 0.0) {
            return Err(Error::InvalidConfig("autoscaling_interval must be positive".into()));
        }
        if let Some(u) = self.target_utilization {
            if !(u > 0.0 && u <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "target_utilization {u} is outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Loads the trace and applies the transforms in order.
    pub fn load_trace(&self, base_dir: &Path) -> Result<WorkloadTrace> {
        let mut trace = self.trace.load(self.seed, base_dir)?;
        for t in &self.transforms {
            trace = t.apply(&trace)?;
        }
        Ok(trace)
    }

    pub fn interval(&self) -> Result<SimTime> {
        SimTime::from_secs_f64(self.autoscaling_interval)
            .filter(|t| *t > SimTime::ZERO)
            .ok_or_else(|| Error::InvalidConfig("autoscaling_interval must be positive".into()))
    }

    /// Infrastructure for `trace`, sized when a target utilization is set.
    pub fn engine_config(&self, trace: &WorkloadTrace) -> Result<EngineConfig> {
        self.validate()?;
        let (clusters, max_clusters) = match self.target_utilization {
            Some(u) => {
                let n = size_infrastructure(trace, u, self.vms_per_cluster)?;
                (n, n)
            }
            None => (self.clusters, self.max_clusters.unwrap_or(self.clusters)),
        };
        let cfg = EngineConfig {
            clusters,
            max_clusters,
            vms_per_cluster: self.vms_per_cluster,
            interval: self.interval()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
