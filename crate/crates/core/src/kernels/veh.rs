use crate::error::{Error, Result};
use crate::graph::Graph;

/// Per-pair factor `l(a, b) = exp(-(a - b)² / (2σ²))`.
pub fn veh_pair_kernel(a: bool, b: bool, sigma: f64) -> f64 {
    if a == b {
        1.0
    } else {
        (-1.0 / (2.0 * sigma * sigma)).exp()
    }
}

/// `exp(-Hamming(x, y) / (2σ²))`, the product of the per-pair factors.
pub fn veh_gauss_kernel(x: &Graph, y: &Graph, sigma: f64) -> Result<f64> {
    if x.n() != y.n() {
        return Err(Error::arg("graphs differ in vertex count"));
    }
    let d = x.bits().iter().zip(y.bits()).filter(|(a, b)| a != b).count();
    Ok((-(d as f64) / (2.0 * sigma * sigma)).exp())
}
