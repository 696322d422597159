//! Analytical, quantization-aware power/performance/area modeling for
//! spatial-array DNN accelerators running a row-stationary dataflow.
//!
//! The pipeline is: a [`workload::Network`] and an [`arch::AcceleratorConfig`]
//! go through [`dataflow`] to produce per-level access counts, which
//! [`costmodel`] turns into energy, latency and area using a calibratable
//! [`costmodel::CostTable`]. [`dse`] sweeps a grid of design points, normalizes
//! them against the best INT16 design and extracts Pareto fronts;
//! [`regression`] fits polynomial surrogates with k-fold degree selection;
//! [`report`] writes CSV point clouds and JSON run reports.
//!
//! ```
//! use accel_ppa::{arch, costmodel, workload};
//!
//! let net = workload::builtin_network("resnet20").unwrap();
//! let cfg = arch::default_arch();
//! let table = costmodel::default_cost_table().unwrap();
//! let ppa = costmodel::evaluate_ppa(&net, &cfg, &table).unwrap();
//! assert!(ppa.energy_j > 0.0 && ppa.perf_per_area > 0.0);
//! ```

pub mod arch;
pub mod cli;
pub mod costmodel;
pub mod dataflow;
pub mod dse;
mod error;
pub mod regression;
pub mod report;
pub mod workload;

pub use error::{Error, Result};

/// Crate version, echoed in reports and `--version`.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
