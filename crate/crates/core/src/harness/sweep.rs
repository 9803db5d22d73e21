use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{BurstPreset, ExperimentConfig, TraceSource, Transform};
use super::experiment::{run_with_trace, ExperimentRun};
use crate::allocation::AllocationPolicy;
use crate::autoscaling::PolicyKind;
use crate::workload::{ChronosSpec, WorkloadTrace};

/// A workload on the sweep's workload axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadAxis {
    pub trace: TraceSource,
    #[serde(default)]
    pub transforms: Vec<Transform>,
    /// Overrides the base cluster count for this workload.
    #[serde(default)]
    pub clusters: Option<usize>,
}

/// Cross product of axes over a base config. An empty axis keeps the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub autoscalers: Vec<PolicyKind>,
    #[serde(default)]
    pub allocators: Vec<AllocationPolicy>,
    /// `null` entries mean the base (unsized) infrastructure.
    #[serde(default)]
    pub utilizations: Vec<Option<f64>>,
    #[serde(default)]
    pub workloads: Vec<WorkloadAxis>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// How sweep cells are executed. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on, otherwise sequential.
    #[default]
    Parallel,
}

/// Outcome of one sweep cell.
#[derive(Debug)]
pub struct CellOutcome {
    pub config: ExperimentConfig,
    pub result: Result<ExperimentRun, String>,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub cells: Vec<CellOutcome>,
}

impl SweepOutcome {
    pub fn runs(&self) -> impl Iterator<Item = &ExperimentRun> {
        self.cells.iter().filter_map(|c| c.result.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&ExperimentConfig, &str)> {
        self.cells
            .iter()
            .filter_map(|c| c.result.as_ref().err().map(|e| (&c.config, e.as_str())))
    }
}

impl SweepSpec {
    pub fn new(base: ExperimentConfig) -> Self {
        SweepSpec {
            base,
            autoscalers: Vec::new(),
            allocators: Vec::new(),
            utilizations: Vec::new(),
            workloads: Vec::new(),
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.base.validate()?;
        Ok(spec)
    }

    fn workload_configs(&self) -> Vec<ExperimentConfig> {
        if self.workloads.is_empty() {
            return vec![self.base.clone()];
        }
        self.workloads
            .iter()
            .map(|w| {
                let mut c = self.base.clone();
                c.trace = w.trace.clone();
                c.transforms = w.transforms.clone();
                if let Some(n) = w.clusters {
                    c.clusters = n;
                    c.max_clusters = None;
                }
                c
            })
            .collect()
    }

    /// Every cell as (workload index, config), ordered workload, utilization, allocator,
    /// autoscaler.
    pub fn cells(&self) -> Vec<(usize, ExperimentConfig)> {
        let utilizations = if self.utilizations.is_empty() {
            vec![self.base.target_utilization]
        } else {
            self.utilizations.clone()
        };
        let allocators = if self.allocators.is_empty() {
            vec![self.base.allocator]
        } else {
            self.allocators.clone()
        };
        let autoscalers = if self.autoscalers.is_empty() {
            vec![self.base.autoscaler]
        } else {
            self.autoscalers.clone()
        };
        let mut out = Vec::new();
        for (wi, w) in self.workload_configs().into_iter().enumerate() {
            for &u in &utilizations {
                for &alloc in &allocators {
                    for &auto in &autoscalers {
                        let mut c = w.clone();
                        c.target_utilization = u;
                        c.allocator = alloc;
                        c.autoscaler = auto;
                        out.push((wi, c));
                    }
                }
            }
        }
        out
    }
}

fn map_cells<T, R, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

/// Runs every cell. Traces are loaded once per workload; a failing cell is recorded and the
/// sweep goes on.
pub fn run_sweep(spec: &SweepSpec, base_dir: &Path, exec: Execution) -> SweepOutcome {
    let workloads = spec.workload_configs();
    let traces: Vec<Result<Arc<WorkloadTrace>, String>> = map_cells(workloads, exec, |w| {
        w.load_trace(base_dir).map(Arc::new).map_err(|e| e.to_string())
    });
    let cells = spec.cells();
    let results = map_cells(cells, exec, |(wi, config)| {
        let result = match &traces[wi] {
            Ok(trace) => run_with_trace(&config, trace).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        CellOutcome { config, result }
    });
    SweepOutcome { cells: results }
}

fn chronos() -> TraceSource {
    TraceSource::Chronos(ChronosSpec::default())
}

fn preset(name: BurstPreset) -> TraceSource {
    TraceSource::Preset { name }
}

fn axis(trace: TraceSource) -> WorkloadAxis {
    WorkloadAxis {
        trace,
        transforms: Vec::new(),
        clusters: None,
    }
}

/// Named preset sweeps.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 5] = ["domain", "bursty", "allocation", "utilization", "at_scale"];

    pub fn by_name(name: &str) -> Option<SweepSpec> {
        match name {
            "domain" => Some(domain()),
            "bursty" => Some(bursty()),
            "allocation" => Some(allocation()),
            "utilization" => Some(utilization()),
            "at_scale" => Some(at_scale(0.001)),
            _ => None,
        }
    }

    /// Three workloads of different domains, 7 autoscalers, on the fixed 50-cluster system
    /// and on infrastructure sized for 70% utilization.
    pub fn domain() -> SweepSpec {
        let mut s = SweepSpec::new(ExperimentConfig::new(chronos()));
        s.autoscalers = PolicyKind::AUTOSCALERS.to_vec();
        s.utilizations = vec![None, Some(0.7)];
        s.workloads = vec![
            axis(preset(BurstPreset::Spec)),
            axis(TraceSource::Chronos(ChronosSpec {
                chain_workflows: true,
                ..ChronosSpec::default()
            })),
            axis(preset(BurstPreset::AskalonEe)),
        ];
        s
    }

    /// The burst workload on 13 sites and Chronos duplicated 22 times on 62.
    pub fn bursty() -> SweepSpec {
        let mut s = SweepSpec::new(ExperimentConfig::new(chronos()));
        s.autoscalers = PolicyKind::AUTOSCALERS.to_vec();
        s.workloads = vec![
            WorkloadAxis {
                clusters: Some(13),
                ..axis(preset(BurstPreset::AskalonEe2))
            },
            WorkloadAxis {
                trace: chronos(),
                transforms: vec![Transform::ScaleToPeak {
                    reference_peak: 24_000,
                    copies: Some(22),
                }],
                clusters: Some(62),
            },
        ];
        s
    }

    /// Chronos with spread-out task runtimes on 50 × 70 under every autoscaler and
    /// allocation policy (21 cells). With identical runtimes every cluster drains at the
    /// same instant and placement has no effect on supply.
    pub fn allocation() -> SweepSpec {
        let mut s = SweepSpec::new(ExperimentConfig::new(TraceSource::Chronos(ChronosSpec {
            runtime_cv: 0.5,
            ..ChronosSpec::default()
        })));
        s.autoscalers = PolicyKind::AUTOSCALERS.to_vec();
        s.allocators = AllocationPolicy::ALL.to_vec();
        s.base.dump_series = true;
        s
    }

    /// Nine utilization levels, 10% to 90%, each sizing the cluster ceiling (63 cells).
    pub fn utilization() -> SweepSpec {
        let mut s = SweepSpec::new(ExperimentConfig::new(preset(BurstPreset::AskalonEe)));
        s.autoscalers = PolicyKind::AUTOSCALERS.to_vec();
        s.utilizations = (1..=9).map(|i| Some(i as f64 / 10.0)).collect();
        s
    }

    /// 100,000 sites with the EE2-shaped trace duplicated 975 times, both multiplied by
    /// `scale`, for the three cheapest autoscalers.
    pub fn at_scale(scale: f64) -> SweepSpec {
        let sites = ((100_000.0 * scale).round() as usize).max(1);
        let copies = ((975.0 * scale).round() as usize).max(1);
        let mut base = ExperimentConfig::new(preset(BurstPreset::AskalonEe2Full));
        base.clusters = sites;
        base.baseline = false;
        if copies > 1 {
            base.transforms = vec![Transform::Duplicate { copies }];
        }
        let mut s = SweepSpec::new(base);
        s.autoscalers = vec![PolicyKind::React, PolicyKind::Adapt, PolicyKind::Reg];
        s
    }
}
