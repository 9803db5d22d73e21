use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::allocation::AllocationPolicy;
use crate::autoscaling::PolicyKind;
use crate::engine::{self, EngineConfig, SimulationResult};
use crate::error::Result;
use crate::metrics::{
    elasticity_report, supply_distribution, workload_summary, ElasticityReport, SupplyDemandSeries, SupplyDistribution,
    WorkflowRecord, WorkloadSummary,
};
use crate::workload::WorkloadTrace;

/// Everything reported for one (workload, infrastructure, autoscaler, allocator) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub workload: String,
    pub autoscaler: PolicyKind,
    pub allocator: AllocationPolicy,
    pub clusters: usize,
    pub max_clusters: usize,
    pub vms_per_cluster: u32,
    pub target_utilization: Option<f64>,
    pub tasks: usize,
    pub elasticity: ElasticityReport,
    pub workflows: WorkloadSummary,
    pub supply: SupplyDistribution,
    /// The static run of the same size used for slowdowns.
    pub baseline: Option<ElasticityReport>,
    pub instructions: u64,
    pub peak_data_items: u64,
    pub ticks: usize,
}

impl MetricReport {
    pub fn label(&self) -> String {
        let infra = match self.target_utilization {
            Some(u) => format!("u{u}"),
            None => format!("c{}", self.clusters),
        };
        format!("{}-{}-{}-{}", self.workload, infra, self.autoscaler, self.allocator)
    }
}

/// A report plus the in-memory extras that are kept out of the written files.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: MetricReport,
    pub records: Vec<WorkflowRecord>,
    pub series: Option<SupplyDemandSeries>,
    pub wall_time: Duration,
}

pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentRun> {
    config.validate()?;
    let trace = config.load_trace(base_dir)?;
    run_with_trace(config, &trace)
}

/// Runs `config` on an already loaded trace; the config's own trace source is ignored.
pub fn run_with_trace(config: &ExperimentConfig, trace: &WorkloadTrace) -> Result<ExperimentRun> {
    let started = Instant::now();
    let context = format!("{} / {} / {}", trace.name(), config.autoscaler, config.allocator);
    inner(config, trace, started).map_err(|e| e.context(context))
}

fn inner(config: &ExperimentConfig, trace: &WorkloadTrace, started: Instant) -> Result<ExperimentRun> {
    let engine_cfg = config.engine_config(trace)?;
    let main = simulate(&engine_cfg, trace, config.autoscaler, config)?;
    let mut records = main.records.clone();
    let mut baseline = None;
    if config.baseline {
        let static_cfg = EngineConfig {
            clusters: engine_cfg.max_clusters,
            ..engine_cfg
        };
        let base = if config.autoscaler == PolicyKind::Static && static_cfg == engine_cfg {
            None
        } else {
            Some(simulate(&static_cfg, trace, PolicyKind::Static, config)?)
        };
        let base_ref = base.as_ref().unwrap_or(&main);
        for (r, b) in records.iter_mut().zip(&base_ref.records) {
            debug_assert_eq!(r.workflow_id, b.workflow_id);
            r.baseline_response = Some(b.response());
        }
        baseline = Some(report_for(base_ref, &engine_cfg, config)?);
    }
    let report = MetricReport {
        workload: trace.name().to_string(),
        autoscaler: config.autoscaler,
        allocator: config.allocator,
        clusters: engine_cfg.clusters,
        max_clusters: engine_cfg.max_clusters,
        vms_per_cluster: engine_cfg.vms_per_cluster,
        target_utilization: config.target_utilization,
        tasks: trace.task_count(),
        elasticity: report_for(&main, &engine_cfg, config)?,
        workflows: workload_summary(&records)?,
        supply: supply_distribution(&main.series)?,
        baseline,
        instructions: main.counters.instructions,
        peak_data_items: main.counters.peak_data_items,
        ticks: main.counters.ticks.len(),
    };
    Ok(ExperimentRun {
        report,
        records,
        series: config.dump_series.then_some(main.series),
        wall_time: started.elapsed(),
    })
}

fn simulate(
    engine_cfg: &EngineConfig,
    trace: &WorkloadTrace,
    autoscaler: PolicyKind,
    config: &ExperimentConfig,
) -> Result<SimulationResult> {
    engine::run(engine_cfg, trace, autoscaler, &config.tunables, config.allocator)
}

fn report_for(
    run: &SimulationResult,
    engine_cfg: &EngineConfig,
    config: &ExperimentConfig,
) -> Result<ElasticityReport> {
    let norm = config.normalize_accuracy.then_some(engine_cfg.max_supply_vms() as f64);
    elasticity_report(&run.series, &run.clusters, engine_cfg.interval, norm)
}
