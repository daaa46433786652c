//! Graph kernels and the kernel matrix over a graph and its single-pair flips.
//!
//! Two evaluation paths exist. [`kernel_matrix`] evaluates every entry over an
//! explicit list of graphs. [`flip_features`] exploits that the WL and graphlet
//! kernels have explicit, sparse feature maps: it returns the features of a base
//! graph plus the sparse change caused by flipping each requested pair, which is
//! what the Stein statistic consumes.

mod graphlet;
mod veh;
mod wl;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use graphlet::{graphlet_features, graphlet_kernel};
pub use veh::{veh_gauss_kernel, veh_pair_kernel};
pub use wl::{wl_histograms, wl_kernel};

/// Kernel choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// Weisfeiler-Lehman subtree kernel with `height` refinements, seeded by group labels.
    Wl {
        height: usize,
        #[serde(default)]
        normalize: bool,
    },
    /// Counts of the four 3-vertex induced subgraph classes.
    Graphlet3 {
        #[serde(default)]
        normalize: bool,
    },
    /// Gaussian vertex-edge histogram kernel `exp(-Hamming / (2σ²))`.
    VehGauss { sigma: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Wl { height: 3, normalize: false }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::VehGauss { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::arg(format!("bandwidth must be positive, got {sigma}")))
            }
            _ => Ok(()),
        }
    }

    /// Per-pair factor `l(1, 0)` for product kernels, `None` otherwise.
    pub fn product_gap(&self) -> Option<f64> {
        match *self {
            KernelSpec::VehGauss { sigma } => Some(veh_pair_kernel(true, false, sigma)),
            _ => None,
        }
    }

    /// Short name used in reports, e.g. `wl3`, `graphlet3`, `veh1`.
    pub fn label(&self) -> String {
        match *self {
            KernelSpec::Wl { height, normalize } => {
                format!("wl{height}{}", if normalize { "n" } else { "" })
            }
            KernelSpec::Graphlet3 { normalize } => {
                format!("graphlet3{}", if normalize { "n" } else { "" })
            }
            KernelSpec::VehGauss { sigma } => format!("veh{sigma}"),
        }
    }

    /// Parse `wl3`, `wl3n`, `graphlet3`, `graphlet3n`, `veh1` or `veh0.5`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        let bad = || Error::arg(format!("unknown kernel `{text}`"));
        if let Some(rest) = t.strip_prefix("graphlet3") {
            return match rest {
                "" => Ok(KernelSpec::Graphlet3 { normalize: false }),
                "n" => Ok(KernelSpec::Graphlet3 { normalize: true }),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = t.strip_prefix("wl") {
            let (digits, normalize) = match rest.strip_suffix('n') {
                Some(d) => (d, true),
                None => (rest, false),
            };
            let height = digits.parse().map_err(|_| bad())?;
            return Ok(KernelSpec::Wl { height, normalize });
        }
        if let Some(rest) = t.strip_prefix("veh") {
            let sigma: f64 = rest.parse().map_err(|_| bad())?;
            let spec = KernelSpec::VehGauss { sigma };
            spec.validate()?;
            return Ok(spec);
        }
        Err(bad())
    }
}

/// Symmetric matrix of kernel values over a list of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    size: usize,
    values: Vec<f64>,
    base: Option<Graph>,
}

impl KernelMatrix {
    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::arg("kernel matrix values do not form a square"));
        }
        Ok(KernelMatrix { size, values, base: None })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The base graph when the list was built by [`perturbation_list`].
    pub fn base(&self) -> Option<&Graph> {
        self.base.as_ref()
    }

    /// Smallest eigenvalue, used for positive-semidefiniteness checks.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.size, self.size, &self.values);
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV dump with a header row of column indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for j in 0..self.size {
            out.push_str(&format!(",{j}"));
        }
        out.push('\n');
        for i in 0..self.size {
            out.push_str(&i.to_string());
            for j in 0..self.size {
                out.push_str(&format!(",{:.12e}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// `[g, flip(g, 0), ..., flip(g, N-1)]`.
pub fn perturbation_list(g: &Graph) -> Vec<Graph> {
    let mut out = Vec::with_capacity(g.num_pairs() + 1);
    out.push(g.clone());
    for s in 0..g.num_pairs() {
        let mut h = g.clone();
        h.set(s, !g.bit(s));
        out.push(h);
    }
    out
}

fn check_same_n(graphs: &[Graph]) -> Result<usize> {
    let n = graphs.first().map(Graph::n).unwrap_or(0);
    if graphs.iter().any(|g| g.n() != n) {
        return Err(Error::arg("graphs in a kernel list must share the vertex count"));
    }
    Ok(n)
}

/// Kernel matrix over an arbitrary list of graphs.
pub fn kernel_matrix(graphs: &[Graph], spec: &KernelSpec) -> Result<KernelMatrix> {
    spec.validate()?;
    check_same_n(graphs)?;
    match *spec {
        KernelSpec::Wl { height, normalize } => wl_kernel(graphs, height, normalize),
        KernelSpec::Graphlet3 { normalize } => graphlet_kernel(graphs, normalize),
        KernelSpec::VehGauss { sigma } => {
            let m = graphs.len();
            let mut values = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let k = veh_gauss_kernel(&graphs[i], &graphs[j], sigma)?;
                    values[i * m + j] = k;
                    values[j * m + i] = k;
                }
            }
            KernelMatrix::from_values(m, values)
        }
    }
}

/// Kernel matrix over [`perturbation_list`]`(g)`, tagged with `g`.
pub fn perturbation_kernel_matrix(g: &Graph, spec: &KernelSpec) -> Result<KernelMatrix> {
    let mut k = kernel_matrix(&perturbation_list(g), spec)?;
    k.base = Some(g.clone());
    Ok(k)
}

pub(crate) fn dot_matrix(features: &[Vec<f64>], normalize: bool) -> Result<KernelMatrix> {
    let m = features.len();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let k: f64 = features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum();
            values[i * m + j] = k;
            values[j * m + i] = k;
        }
    }
    if normalize {
        let diag: Vec<f64> = (0..m).map(|i| values[i * m + i]).collect();
        for i in 0..m {
            for j in 0..m {
                let d = (diag[i] * diag[j]).sqrt();
                values[i * m + j] = if d > 0.0 { values[i * m + j] / d } else { 0.0 };
            }
        }
    }
    KernelMatrix::from_values(m, values)
}

/// Features of a base graph and sparse feature changes for a set of flips.
#[derive(Debug, Clone)]
pub struct FlipFeatures {
    pub base: Vec<f64>,
    /// `deltas[i]` is `φ(flip(g, pairs[i])) - φ(g)` as sorted `(feature, change)` entries.
    pub deltas: Vec<Vec<(u32, f64)>>,
    pub normalize: bool,
}

impl FlipFeatures {
    /// `‖Σ_i w_i (φ̃(F_i) - φ̃(g))‖²`, where `φ̃` is `φ` or `φ / ‖φ‖`.
    pub fn weighted_norm_sq(&self, weights: &[f64]) -> f64 {
        assert_eq!(weights.len(), self.deltas.len());
        let dim = self
            .deltas
            .iter()
            .flat_map(|d| d.iter().map(|&(k, _)| k as usize + 1))
            .max()
            .unwrap_or(0)
            .max(self.base.len());
        let mut acc = vec![0.0; dim];
        let base_at = |k: usize| self.base.get(k).copied().unwrap_or(0.0);
        if self.normalize {
            let base_sq: f64 = self.base.iter().map(|x| x * x).sum();
            let r0 = base_sq.sqrt();
            let mut base_coef = 0.0;
            for (w, delta) in weights.iter().zip(&self.deltas) {
                if *w == 0.0 {
                    continue;
                }
                let cross: f64 = delta.iter().map(|&(k, d)| base_at(k as usize) * d).sum();
                let own: f64 = delta.iter().map(|&(_, d)| d * d).sum();
                let r = (base_sq + 2.0 * cross + own).sqrt();
                base_coef += w * (1.0 / r - 1.0 / r0);
                for &(k, d) in delta {
                    acc[k as usize] += w / r * d;
                }
            }
            for (k, b) in self.base.iter().enumerate() {
                acc[k] += base_coef * b;
            }
        } else {
            for (w, delta) in weights.iter().zip(&self.deltas) {
                if *w == 0.0 {
                    continue;
                }
                for &(k, d) in delta {
                    acc[k as usize] += w * d;
                }
            }
        }
        acc.iter().map(|x| x * x).sum()
    }
}

/// Sparse feature changes for flipping each pair in `pairs`. Only kernels with
/// explicit finite feature maps are supported.
pub fn flip_features(g: &Graph, spec: &KernelSpec, pairs: &[usize]) -> Result<FlipFeatures> {
    if let Some(&s) = pairs.iter().find(|&&s| s >= g.num_pairs()) {
        return Err(Error::arg(format!("pair index {s} out of range")));
    }
    match *spec {
        KernelSpec::Wl { height, normalize } => Ok(wl::flip_features(g, height, pairs, normalize)),
        KernelSpec::Graphlet3 { normalize } => graphlet::flip_features(g, pairs, normalize),
        KernelSpec::VehGauss { .. } => {
            Err(Error::Unsupported("the Gaussian VEH kernel has no finite feature map".into()))
        }
    }
}

pub(crate) fn merge_sparse(mut entries: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    entries.sort_unstable_by_key(|&(k, _)| k);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
    for (k, d) in entries {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += d,
            _ => out.push((k, d)),
        }
    }
    out.retain(|&(_, d)| d != 0.0);
    out
}
