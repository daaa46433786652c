//! The Glauber-dynamics Stein operator of an inhomogeneous random graph and
//! the kernel Stein statistic built on it.
//!
//! For a kernel `K` and observed graph `g`, write `F_s` for `g` with pair `s`
//! flipped and `γ_s = p_s` if `x_s = 0`, `γ_s = 1 - p_s` if `x_s = 1`. Then
//! `A^(s) K(g, ·) = γ_s (K(F_s, ·) - K(g, ·))`, so
//! `h(s, s') = γ_s γ_s' [K(F_s, F_s') - K(F_s, g) - K(g, F_s') + K(g, g)]` and
//! the statistic is `N⁻² Σ h = N⁻² ‖Σ_s γ_s (φ(F_s) - φ(g))‖²`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{flip_features, KernelMatrix, KernelSpec};
use crate::models::EdgeProbabilities;
use crate::rng::stream;

/// Largest number of pairs for which functions on `{0,1}^N` are tabulated.
pub const MAX_TABLE_PAIRS: usize = 20;

/// A real function on `{0,1}^N`, indexed by bitmask (bit `s` = pair `s`).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pairs: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(pairs: usize, values: Vec<f64>) -> Result<Self> {
        if pairs > MAX_TABLE_PAIRS {
            return Err(Error::Capacity { pairs, limit: MAX_TABLE_PAIRS });
        }
        if values.len() != 1 << pairs {
            return Err(Error::arg("value table must have 2^N entries"));
        }
        Ok(ValueTable { pairs, values })
    }

    pub fn from_fn(pairs: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        if pairs > MAX_TABLE_PAIRS {
            return Err(Error::Capacity { pairs, limit: MAX_TABLE_PAIRS });
        }
        Self::new(pairs, (0..1usize << pairs).map(f).collect())
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn at(&self, mask: usize) -> f64 {
        self.values[mask]
    }
}

/// Bitmask of a graph with at most [`MAX_TABLE_PAIRS`] pairs.
pub fn graph_mask(g: &Graph) -> Result<usize> {
    if g.num_pairs() > MAX_TABLE_PAIRS {
        return Err(Error::Capacity { pairs: g.num_pairs(), limit: MAX_TABLE_PAIRS });
    }
    Ok(g.bits().iter().enumerate().filter(|(_, &b)| b).map(|(s, _)| 1 << s).sum())
}

fn apply_mask(f: &ValueTable, mask: usize, p: f64, s: usize) -> f64 {
    let fx = f.at(mask);
    p * (f.at(mask | 1 << s) - fx) + (1.0 - p) * (f.at(mask & !(1 << s)) - fx)
}

/// `p_s (f(x^(s,1)) - f(x)) + (1 - p_s)(f(x^(s,0)) - f(x))`.
pub fn stein_op_apply(f: &ValueTable, g: &Graph, p: &EdgeProbabilities, s: usize) -> Result<f64> {
    p.check_graph(g)?;
    if f.pairs() != g.num_pairs() || s >= g.num_pairs() {
        return Err(Error::arg("value table, graph and pair index disagree"));
    }
    Ok(apply_mask(f, graph_mask(g)?, p.get(s), s))
}

/// Exact `E[A f(X)]` under the model, with `A = N⁻¹ Σ_s A^(s)`, by enumeration.
pub fn stein_identity_check(f: &ValueTable, p: &EdgeProbabilities) -> Result<f64> {
    let pairs = p.len();
    if f.pairs() != pairs {
        return Err(Error::arg("value table does not match the probabilities"));
    }
    if pairs > MAX_TABLE_PAIRS {
        return Err(Error::Capacity { pairs, limit: MAX_TABLE_PAIRS });
    }
    let probs = p.as_slice();
    let mut total = 0.0;
    for mask in 0..1usize << pairs {
        let weight: f64 = probs
            .iter()
            .enumerate()
            .map(|(s, &q)| if mask >> s & 1 == 1 { q } else { 1.0 - q })
            .product();
        if weight == 0.0 {
            continue;
        }
        let op: f64 = (0..pairs).map(|s| apply_mask(f, mask, probs[s], s)).sum();
        total += weight * op / pairs as f64;
    }
    Ok(total)
}

/// `γ_s = p_s` where the pair is absent and `1 - p_s` where present.
pub fn gamma(g: &Graph, p: &EdgeProbabilities) -> Vec<f64> {
    g.bits()
        .iter()
        .zip(p.as_slice())
        .map(|(&x, &q)| if x { 1.0 - q } else { q })
        .collect()
}

fn check_kernel_matrix(g: &Graph, k: &KernelMatrix) -> Result<()> {
    if k.base() != Some(g) || k.size() != g.num_pairs() + 1 {
        return Err(Error::arg("kernel matrix was not built from this graph's perturbation list"));
    }
    Ok(())
}

fn h_unchecked(gam: &[f64], k: &KernelMatrix, s: usize, t: usize) -> f64 {
    gam[s] * gam[t] * (k.get(s + 1, t + 1) - k.get(s + 1, 0) - k.get(0, t + 1) + k.get(0, 0))
}

/// One entry `h(s, s')` from a kernel matrix over the perturbation list of `g`.
pub fn h_entry(
    g: &Graph,
    p: &EdgeProbabilities,
    k: &KernelMatrix,
    s: usize,
    t: usize,
) -> Result<f64> {
    p.check_graph(g)?;
    check_kernel_matrix(g, k)?;
    if s >= g.num_pairs() || t >= g.num_pairs() {
        return Err(Error::arg("pair index out of range"));
    }
    Ok(h_unchecked(&gamma(g, p), k, s, t))
}

/// The `N × N` matrix of `h(s, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    size: usize,
    values: Vec<f64>,
}

impl HMatrix {
    pub fn from_kernel_matrix(g: &Graph, p: &EdgeProbabilities, k: &KernelMatrix) -> Result<Self> {
        p.check_graph(g)?;
        check_kernel_matrix(g, k)?;
        let gam = gamma(g, p);
        let size = g.num_pairs();
        let mut values = vec![0.0; size * size];
        for s in 0..size {
            for t in 0..size {
                values[s * size + t] = h_unchecked(&gam, k, s, t);
            }
        }
        Ok(HMatrix { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.values[s * self.size + t]
    }

    /// `B⁻² Σ k_s k_t h(s, t)` with `B = Σ k`.
    pub fn weighted_mean(&self, counts: &[u32]) -> f64 {
        let b: f64 = counts.iter().map(|&c| c as f64).sum();
        let mut total = 0.0;
        for s in 0..self.size {
            for t in 0..self.size {
                total += counts[s] as f64 * counts[t] as f64 * self.get(s, t);
            }
        }
        total / (b * b)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.size * self.size) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,h\n");
        for s in 0..self.size {
            for t in 0..self.size {
                out.push_str(&format!("{s},{t},{:.12e}\n", self.get(s, t)));
            }
        }
        out
    }
}

/// The statistic from an explicit kernel matrix (reference path).
pub fn gkss_from_kernel_matrix(g: &Graph, p: &EdgeProbabilities, k: &KernelMatrix) -> Result<f64> {
    Ok(HMatrix::from_kernel_matrix(g, p, k)?.mean())
}

/// `B⁻² Σ_{s,t} k_s k_t h(s, t)` for multiplicities `counts` over pairs.
pub fn gkss_from_counts(
    g: &Graph,
    p: &EdgeProbabilities,
    spec: &KernelSpec,
    counts: &[u32],
) -> Result<f64> {
    p.check_graph(g)?;
    spec.validate()?;
    if counts.len() != g.num_pairs() {
        return Err(Error::arg("one count per vertex pair is required"));
    }
    let b: f64 = counts.iter().map(|&c| c as f64).sum();
    if b == 0.0 {
        return Err(Error::arg("at least one pair must be sampled"));
    }
    let gam = gamma(g, p);
    let pairs: Vec<usize> = (0..counts.len()).filter(|&s| counts[s] > 0).collect();
    let weights: Vec<f64> = pairs.iter().map(|&s| counts[s] as f64 * gam[s]).collect();
    let total = match spec.product_gap() {
        Some(c) => {
            let sum: f64 = weights.iter().sum();
            let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
            (c - 1.0).powi(2) * (sum * sum - sum_sq) + 2.0 * (1.0 - c) * sum_sq
        }
        None => flip_features(g, spec, &pairs)?.weighted_norm_sq(&weights),
    };
    Ok(total / (b * b))
}

/// The full statistic `N⁻² Σ_{s,s'} h(s, s')`.
pub fn gkss_squared(g: &Graph, p: &EdgeProbabilities, spec: &KernelSpec) -> Result<f64> {
    gkss_from_counts(g, p, spec, &vec![1; g.num_pairs()])
}

/// Multiplicities of `b` pairs drawn uniformly with replacement.
pub fn draw_counts(pairs: usize, b: usize, rng: &mut crate::rng::Rng) -> Vec<u32> {
    let mut counts = vec![0u32; pairs];
    for _ in 0..b {
        counts[rng.random_range(0..pairs)] += 1;
    }
    counts
}

/// The statistic estimated from `b` pairs drawn uniformly with replacement.
pub fn gkss_squared_resampled(
    g: &Graph,
    p: &EdgeProbabilities,
    spec: &KernelSpec,
    b: usize,
    seed: u64,
) -> Result<f64> {
    if b == 0 {
        return Err(Error::arg("resample size must be at least 1"));
    }
    let counts = draw_counts(g.num_pairs(), b, &mut stream(seed, &[]));
    gkss_from_counts(g, p, spec, &counts)
}
