//! Workflow-level, autoscaler-level and scale-level metrics.
//!
//! Every autoscaler-level metric is a time-weighted integral over the supply/demand step
//! function, not a mean over samples: samples arrive at irregular, event-driven instants.

mod series;
mod workflow;

use serde::{Deserialize, Serialize};

pub use series::{SeriesSample, SupplyDemandSeries};
pub use workflow::{
    cumulative_delay, workflow_metrics, workload_summary, WorkflowMetrics, WorkflowRecord, WorkloadSummary,
};

use crate::engine::ClusterState;
use crate::error::{Error, Result};
use crate::time::SimTime;

const HOUR_MS: f64 = 3_600_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics {
    pub a_u: f64,
    pub a_o: f64,
    pub na_u: f64,
    pub na_o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeshareMetrics {
    pub t_u: f64,
    pub t_o: f64,
    /// Mean overprovisioning episode length, in autoscaling intervals.
    pub k: f64,
    /// Mean underprovisioning episode length, in autoscaling intervals.
    pub k_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceMetrics {
    pub m_u: f64,
    pub v_bar: f64,
    pub h_bar: f64,
    pub c_bar: f64,
}

/// All autoscaler-level metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticityReport {
    #[serde(rename = "A_U")]
    pub a_u: f64,
    #[serde(rename = "A_O")]
    pub a_o: f64,
    #[serde(rename = "nA_U")]
    pub na_u: f64,
    #[serde(rename = "nA_O")]
    pub na_o: f64,
    #[serde(rename = "T_U")]
    pub t_u: f64,
    #[serde(rename = "T_O")]
    pub t_o: f64,
    pub k: f64,
    pub kp: f64,
    #[serde(rename = "M_U")]
    pub m_u: f64,
    #[serde(rename = "V_bar")]
    pub v_bar: f64,
    #[serde(rename = "h_bar")]
    pub h_bar: f64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
}

fn require_span(series: &SupplyDemandSeries) -> Result<u64> {
    if series.is_empty() {
        return Err(Error::Runtime("empty supply/demand series".into()));
    }
    match series.span().as_millis() {
        0 => Err(Error::Runtime("supply/demand series spans zero time".into())),
        ms => Ok(ms),
    }
}

/// A_U and A_O in VM units; Ā_U and Ā_O in [0, 1] with denominators guarded by `epsilon`.
pub fn accuracy_metrics(series: &SupplyDemandSeries, epsilon: u64) -> Result<AccuracyMetrics> {
    let span = require_span(series)?;
    let eps = epsilon.max(1);
    let (mut under, mut over) = (0u128, 0u128);
    let (mut n_under, mut n_over) = (0f64, 0f64);
    for (x, dt) in series.steps() {
        let u = x.demand.saturating_sub(x.supply);
        let o = x.supply.saturating_sub(x.demand);
        under += u as u128 * dt as u128;
        over += o as u128 * dt as u128;
        if u > 0 {
            n_under += u as f64 / x.demand.max(eps) as f64 * dt as f64;
        }
        if o > 0 {
            n_over += o as f64 / x.supply.max(eps) as f64 * dt as f64;
        }
    }
    let t = span as f64;
    Ok(AccuracyMetrics {
        a_u: under as f64 / t,
        a_o: over as f64 / t,
        na_u: n_under / t,
        na_o: n_over / t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Under,
    Exact,
    Over,
}

fn sign(supply: u64, demand: u64) -> Sign {
    match supply.cmp(&demand) {
        std::cmp::Ordering::Less => Sign::Under,
        std::cmp::Ordering::Equal => Sign::Exact,
        std::cmp::Ordering::Greater => Sign::Over,
    }
}

/// Maximal runs of constant provisioning sign as (sign, duration in ms).
fn episodes(series: &SupplyDemandSeries) -> Vec<(Sign, u64)> {
    let mut out: Vec<(Sign, u64)> = Vec::new();
    for (x, dt) in series.steps() {
        let s = sign(x.supply, x.demand);
        match out.last_mut() {
            Some((last, len)) if *last == s => *len += dt,
            _ => out.push((s, dt)),
        }
    }
    out
}

pub fn timeshare_metrics(series: &SupplyDemandSeries, interval: SimTime) -> Result<TimeshareMetrics> {
    let span = require_span(series)?;
    if interval == SimTime::ZERO {
        return Err(Error::InvalidConfig("interval must be positive".into()));
    }
    let eps = episodes(series);
    let total = |want: Sign| eps.iter().filter(|e| e.0 == want).map(|e| e.1).sum::<u64>();
    let mean_len = |want: Sign| {
        let lens: Vec<u64> = eps.iter().filter(|e| e.0 == want).map(|e| e.1).collect();
        if lens.is_empty() {
            0.0
        } else {
            lens.iter().sum::<u64>() as f64 / lens.len() as f64 / interval.as_millis() as f64
        }
    };
    Ok(TimeshareMetrics {
        t_u: 100.0 * total(Sign::Under) as f64 / span as f64,
        t_o: 100.0 * total(Sign::Over) as f64 / span as f64,
        k: mean_len(Sign::Over),
        k_prime: mean_len(Sign::Under),
    })
}

/// Idle and allocated VM averages from the series; accounted and charged hours per VM slot
/// that was ever allocated, from the cluster accumulators.
pub fn resource_metrics(clusters: &[ClusterState], series: &SupplyDemandSeries) -> Result<ResourceMetrics> {
    let span = require_span(series)?;
    let (mut idle, mut supplied) = (0u128, 0u128);
    for (x, dt) in series.steps() {
        idle += x.supply.saturating_sub(x.busy) as u128 * dt as u128;
        supplied += x.supply as u128 * dt as u128;
    }
    let slots: u64 = clusters
        .iter()
        .filter(|c| c.allocations > 0)
        .map(|c| c.vms_total as u64)
        .sum();
    let busy_ms: u128 = clusters.iter().map(|c| c.busy_vm_ms as u128).sum();
    let charged: u64 = clusters.iter().map(|c| c.charged_hours * c.vms_total as u64).sum();
    let per_slot = |x: f64| if slots == 0 { 0.0 } else { x / slots as f64 };
    Ok(ResourceMetrics {
        m_u: idle as f64 / span as f64,
        v_bar: supplied as f64 / span as f64,
        h_bar: per_slot(busy_ms as f64 / HOUR_MS),
        c_bar: per_slot(charged as f64),
    })
}

/// Builds the full report. With `normalize_by` set, A_U and A_O are divided by it
/// (typically the maximum supply).
pub fn elasticity_report(
    series: &SupplyDemandSeries,
    clusters: &[ClusterState],
    interval: SimTime,
    normalize_by: Option<f64>,
) -> Result<ElasticityReport> {
    let acc = accuracy_metrics(series, 1)?;
    let ts = timeshare_metrics(series, interval)?;
    let res = resource_metrics(clusters, series)?;
    let div = normalize_by.filter(|d| *d > 0.0).unwrap_or(1.0);
    Ok(ElasticityReport {
        a_u: acc.a_u / div,
        a_o: acc.a_o / div,
        na_u: acc.na_u,
        na_o: acc.na_o,
        t_u: ts.t_u,
        t_o: ts.t_o,
        k: ts.k,
        kp: ts.k_prime,
        m_u: res.m_u,
        v_bar: res.v_bar,
        h_bar: res.h_bar,
        c_bar: res.c_bar,
    })
}

/// Time-weighted distribution of supply, for violin-style plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyDistribution {
    pub mean: f64,
    pub min: u64,
    pub p25: u64,
    pub median: u64,
    pub p75: u64,
    pub max: u64,
}

pub fn supply_distribution(series: &SupplyDemandSeries) -> Result<SupplyDistribution> {
    let span = require_span(series)?;
    let mut steps: Vec<(u64, u64)> = series.steps().map(|(x, dt)| (x.supply, dt)).collect();
    steps.sort_unstable();
    let quantile = |q: f64| {
        let target = q * span as f64;
        let mut acc = 0u64;
        for &(v, dt) in &steps {
            acc += dt;
            if acc as f64 >= target {
                return v;
            }
        }
        steps.last().map(|s| s.0).unwrap_or(0)
    };
    let weighted: u128 = steps.iter().map(|&(v, dt)| v as u128 * dt as u128).sum();
    Ok(SupplyDistribution {
        mean: weighted as f64 / span as f64,
        min: steps.first().map(|s| s.0).unwrap_or(0),
        p25: quantile(0.25),
        median: quantile(0.5),
        p75: quantile(0.75),
        max: steps.last().map(|s| s.0).unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: &[(u64, u64, u64)]) -> SupplyDemandSeries {
        SupplyDemandSeries::from_samples(
            points
                .iter()
                .map(|&(t, s, d)| SeriesSample::new(SimTime::from_secs(t), s, d, d.min(s))),
        )
    }

    const I: SimTime = SimTime::from_secs(30);

    #[test]
    fn exact_provisioning_is_all_zero() {
        let s = series(&[(0, 5, 5), (10, 7, 7), (20, 7, 7)]);
        let a = accuracy_metrics(&s, 1).unwrap();
        assert_eq!((a.a_u, a.a_o, a.na_u, a.na_o), (0.0, 0.0, 0.0, 0.0));
        let t = timeshare_metrics(&s, I).unwrap();
        assert_eq!((t.t_u, t.t_o, t.k, t.k_prime), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_overprovisioning_by_one() {
        let s = series(&[(0, 2, 1), (100, 2, 1)]);
        let a = accuracy_metrics(&s, 1).unwrap();
        assert_eq!(a.a_o, 1.0);
        assert_eq!(a.na_o, 0.5);
        assert_eq!(a.a_u, 0.0);
    }

    #[test]
    fn epsilon_guards_zero_supply() {
        let s = series(&[(0, 0, 0), (10, 0, 0)]);
        assert_eq!(accuracy_metrics(&s, 1).unwrap().na_o, 0.0);
        let s = series(&[(0, 0, 3), (10, 0, 3)]);
        let a = accuracy_metrics(&s, 1).unwrap();
        assert_eq!((a.a_u, a.na_u), (3.0, 1.0));
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(accuracy_metrics(&SupplyDemandSeries::new(), 1).is_err());
        assert!(timeshare_metrics(&series(&[(0, 1, 1)]), I).is_err());
    }

    #[test]
    fn three_of_ten_intervals_over() {
        let s = series(&[(0, 2, 1), (90, 1, 1), (300, 1, 1)]);
        assert_eq!(timeshare_metrics(&s, I).unwrap().t_o, 30.0);
    }

    #[test]
    fn episode_lengths_in_intervals() {
        // over for 2 intervals, exact, over for 4, under for 1
        let s = series(&[(0, 2, 1), (60, 1, 1), (90, 3, 1), (210, 1, 2), (240, 1, 2)]);
        let t = timeshare_metrics(&s, I).unwrap();
        assert_eq!(t.k, 3.0);
        assert_eq!(t.k_prime, 1.0);
    }

    #[test]
    fn adjacent_steps_with_the_same_sign_merge() {
        let s = series(&[(0, 5, 1), (30, 6, 1), (60, 6, 6)]);
        assert_eq!(timeshare_metrics(&s, I).unwrap().k, 2.0);
    }

    #[test]
    fn one_idle_cluster_for_an_hour() {
        let mut c = ClusterState::new(0, 70);
        c.allocate(SimTime::ZERO);
        c.close_episode(SimTime::from_secs(3600));
        let s = series(&[(0, 70, 0), (3600, 70, 0)]);
        let r = resource_metrics(&[c], &s).unwrap();
        assert_eq!((r.m_u, r.v_bar, r.h_bar, r.c_bar), (70.0, 70.0, 0.0, 1.0));
    }

    #[test]
    fn half_hour_of_work_is_half_accounted_one_charged() {
        let mut c = ClusterState::new(0, 1);
        c.allocate(SimTime::ZERO);
        c.start_task(1);
        c.finish_task(1, SimTime::from_secs(1800));
        c.close_episode(SimTime::from_secs(3600));
        let s = SupplyDemandSeries::from_samples([
            SeriesSample::new(SimTime::ZERO, 1, 1, 1),
            SeriesSample::new(SimTime::from_secs(1800), 1, 0, 0),
            SeriesSample::new(SimTime::from_secs(3600), 1, 0, 0),
        ]);
        let r = resource_metrics(&[c], &s).unwrap();
        assert_eq!((r.h_bar, r.c_bar), (0.5, 1.0));
    }

    #[test]
    fn deallocating_one_of_two_clusters_halfway() {
        let s = series(&[(0, 140, 0), (1800, 70, 0), (3600, 70, 0)]);
        let r = resource_metrics(&[], &s).unwrap();
        assert_eq!(r.v_bar, 105.0);
    }

    #[test]
    fn normalization_divides_raw_accuracy_only() {
        let s = series(&[(0, 4, 2), (10, 4, 2)]);
        let raw = elasticity_report(&s, &[], I, None).unwrap();
        let norm = elasticity_report(&s, &[], I, Some(4.0)).unwrap();
        assert_eq!(raw.a_o, 2.0);
        assert_eq!(norm.a_o, 0.5);
        assert_eq!(raw.na_o, norm.na_o);
    }

    #[test]
    fn supply_quantiles_are_time_weighted() {
        let s = series(&[(0, 70, 0), (10, 140, 0), (40, 70, 0)]);
        let d = supply_distribution(&s).unwrap();
        assert_eq!((d.min, d.median, d.max), (70, 140, 140));
        assert_eq!(d.mean, 122.5);
    }
}
