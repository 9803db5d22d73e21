//! Experiment configuration, infrastructure sizing, sweeps and report files.

mod config;
mod experiment;
mod report;
mod sizing;
mod sweep;

pub use config::{BurstPreset, ExperimentConfig, TraceSource, Transform};
pub use experiment::{run_experiment, run_with_trace, ExperimentRun, MetricReport};
pub use report::{emit_report, to_csv, to_json, ReportFormat, CSV_COLUMNS};
pub use sizing::{clusters_for_load, ideal_span, size_infrastructure};
pub use sweep::{presets, run_sweep, CellOutcome, Execution, SweepOutcome, SweepSpec, WorkloadAxis};
