use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentRun, MetricReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_COLUMNS: [&str; 33] = [
    "workload",
    "autoscaler",
    "allocator",
    "clusters",
    "max_clusters",
    "vms_per_cluster",
    "target_utilization",
    "tasks",
    "A_U",
    "A_O",
    "nA_U",
    "nA_O",
    "T_U",
    "T_O",
    "k",
    "kp",
    "M_U",
    "V_bar",
    "h_bar",
    "C_bar",
    "workflows",
    "mean_M",
    "mean_W",
    "mean_R",
    "mean_NSL",
    "max_NSL",
    "workload_NSL",
    "mean_S",
    "cumulative_delay",
    "makespan",
    "long_waits",
    "I",
    "D",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn row(r: &MetricReport) -> Vec<String> {
    let e = &r.elasticity;
    let w = &r.workflows;
    vec![
        r.workload.clone(),
        r.autoscaler.to_string(),
        r.allocator.to_string(),
        r.clusters.to_string(),
        r.max_clusters.to_string(),
        r.vms_per_cluster.to_string(),
        opt(r.target_utilization),
        r.tasks.to_string(),
        num(e.a_u),
        num(e.a_o),
        num(e.na_u),
        num(e.na_o),
        num(e.t_u),
        num(e.t_o),
        num(e.k),
        num(e.kp),
        num(e.m_u),
        num(e.v_bar),
        num(e.h_bar),
        num(e.c_bar),
        w.workflows.to_string(),
        num(w.mean_makespan),
        num(w.mean_wait),
        num(w.mean_response),
        num(w.mean_nsl),
        num(w.max_nsl),
        num(w.workload_nsl),
        opt(w.mean_slowdown),
        num(w.cumulative_delay),
        num(w.workload_makespan),
        w.long_waits.to_string(),
        r.instructions.to_string(),
        r.peak_data_items.to_string(),
    ]
}

pub fn to_csv(reports: &[MetricReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record(row(r))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json(reports: &[MetricReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `report.csv` or `report.json` into `dir`, plus `series/<label>.csv` for every run
/// that kept its series. Returns the files written.
pub fn emit_report(runs: &[&ExperimentRun], format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if runs.is_empty() {
        return Err(Error::Runtime("no reports to write".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let reports: Vec<MetricReport> = runs.iter().map(|r| r.report.clone()).collect();
    let mut written = vec![match format {
        ReportFormat::Csv => write(dir.join("report.csv"), &to_csv(&reports)?)?,
        ReportFormat::Json => write(dir.join("report.json"), &to_json(&reports))?,
    }];
    if format == ReportFormat::Csv {
        let series_dir = dir.join("series");
        for run in runs {
            let Some(series) = &run.series else { continue };
            fs::create_dir_all(&series_dir).map_err(|e| Error::io(&series_dir, e))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t_s", "supply", "demand", "busy"])?;
            for s in series.samples() {
                w.write_record([
                    num(s.t.as_secs_f64()),
                    s.supply.to_string(),
                    s.demand.to_string(),
                    s.busy.to_string(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Runtime(e.to_string()))?;
            let name = sanitize(&run.report.label());
            written.push(write(
                series_dir.join(format!("{name}.csv")),
                std::str::from_utf8(&bytes).expect("utf-8"),
            )?);
        }
    }
    Ok(written)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
