//! Trace-driven discrete-event simulation of workflow autoscaling in datacenters.
//!
//! A [`workload::WorkloadTrace`] of DAG workflows is replayed on a set of equally sized
//! clusters. At every autoscaling tick a provisioning policy picks a VM target, and on
//! every state change an allocation policy places queued tasks. The [`metrics`] module turns
//! the resulting supply/demand series and workflow records into reports.
//!
//! ```
//! use autoscale_sim::allocation::AllocationPolicy;
//! use autoscale_sim::autoscaling::{PolicyKind, Tunables};
//! use autoscale_sim::engine::{run, EngineConfig};
//! use autoscale_sim::workload::{generate_chronos, ChronosSpec};
//!
//! let trace = generate_chronos(&ChronosSpec::default());
//! let result = run(
//!     &EngineConfig::new(50, 70),
//!     &trace,
//!     PolicyKind::React,
//!     &Tunables::default(),
//!     AllocationPolicy::FillWorstFit,
//! )
//! .unwrap();
//! assert_eq!(result.records.len(), 1024);
//! ```

pub mod allocation;
pub mod autoscaling;
pub mod engine;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod time;
pub mod workload;

pub use error::{Error, Result};
