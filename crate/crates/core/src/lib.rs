//! Kernelized graph Stein discrepancy goodness-of-fit tests for inhomogeneous
//! random graphs, with spectral and likelihood-ratio baselines and anomaly
//! planting utilities.

pub mod baselines;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod kernels;
pub mod mctest;
pub mod models;
pub mod plant;
pub mod rng;
pub mod stein;

pub use error::{Error, Result};
pub use graph::Graph;
pub use kernels::KernelSpec;
pub use models::EdgeProbabilities;
