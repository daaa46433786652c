//! Moments of the statistic under the null and the normal-approximation bound.
//!
//! The analytic results hold for product kernels `K(x, y) = Π_s l_s(x_s, y_s)`
//! with `l_s(b, b) = 1`. For such kernels and `s ≠ s'`,
//! `h(s, s') = f_s(x_s) f_s'(x_s')` with `f_s(x) = (l_s(1,0) - 1)(p_s + x(1 - 2p_s))`,
//! and `h(s, s) = γ_s² (l_s(1,1) - 2 l_s(1,0) + l_s(0,0))`.

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::kernels::{perturbation_kernel_matrix, KernelSpec};
use crate::models::{EdgeProbabilities, ErmmParams};
use crate::stein::HMatrix;

/// Largest number of pairs for exhaustive moment computation.
pub const MAX_EXHAUSTIVE_PAIRS: usize = 12;

fn product_gap(spec: &KernelSpec) -> Result<f64> {
    spec.validate()?;
    spec.product_gap()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a product kernel", spec.label())))
}

/// `N⁻² Σ_{s≠s'} 4 p_s(1-p_s) p_s'(1-p_s') (l_s(1,0) - 1)(l_s'(1,0) - 1)`.
pub fn offdiag_mean_from_gaps(p: &EdgeProbabilities, gaps: &[f64]) -> Result<f64> {
    if gaps.len() != p.len() {
        return Err(Error::arg("one kernel gap per pair is required"));
    }
    let t: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(gaps)
        .map(|(&q, &c)| 2.0 * q * (1.0 - q) * (c - 1.0))
        .collect();
    let sum: f64 = t.iter().sum();
    let sum_sq: f64 = t.iter().map(|x| x * x).sum();
    let n = p.len() as f64;
    Ok((sum * sum - sum_sq) / (n * n))
}

pub fn analytic_offdiag_mean(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<f64> {
    offdiag_mean_from_gaps(p, &vec![product_gap(spec)?; p.len()])
}

/// `N⁻² Σ_s E[γ_s²] (2 - 2 l_s(1,0))`, with `E[γ_s²] = p_s(1-p_s)`.
pub fn analytic_diag_mean(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<f64> {
    let c = product_gap(spec)?;
    let n = p.len() as f64;
    let total: f64 = p.as_slice().iter().map(|&q| q * (1.0 - q) * 2.0 * (1.0 - c)).sum();
    Ok(total / (n * n))
}

/// Exact moments of the statistic under the model, by enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveMoments {
    pub mean: f64,
    pub variance: f64,
    pub diag_mean: f64,
    pub offdiag_mean: f64,
}

/// Enumerate all `2^N` graphs, evaluating each statistic from its kernel matrix.
pub fn exhaustive_moments(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<ExhaustiveMoments> {
    let pairs = p.len();
    if pairs > MAX_EXHAUSTIVE_PAIRS {
        return Err(Error::Capacity { pairs, limit: MAX_EXHAUSTIVE_PAIRS });
    }
    let probs = p.as_slice();
    let (mut m1, mut m2, mut diag, mut off) = (0.0, 0.0, 0.0, 0.0);
    let n2 = (pairs * pairs) as f64;
    for mask in 0..1usize << pairs {
        let weight: f64 = probs
            .iter()
            .enumerate()
            .map(|(s, &q)| if mask >> s & 1 == 1 { q } else { 1.0 - q })
            .product();
        if weight == 0.0 {
            continue;
        }
        let g = Graph::from_bits(p.n(), (0..pairs).map(|s| mask >> s & 1 == 1).collect())?;
        let k = perturbation_kernel_matrix(&g, spec)?;
        let h = HMatrix::from_kernel_matrix(&g, p, &k)?;
        let d: f64 = (0..pairs).map(|s| h.get(s, s)).sum::<f64>() / n2;
        let stat = h.mean();
        m1 += weight * stat;
        m2 += weight * stat * stat;
        diag += weight * d;
        off += weight * (stat - d);
    }
    Ok(ExhaustiveMoments { mean: m1, variance: (m2 - m1 * m1).max(0.0), diag_mean: diag, offdiag_mean: off })
}

/// Extremes of the probabilities and kernel gaps entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub pairs: usize,
    pub n0: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

pub fn extremes(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<Extremes> {
    let d = (product_gap(spec)? - 1.0).abs();
    let variances = p.as_slice().iter().map(|&q| q * (1.0 - q));
    let inner: Vec<f64> = p
        .as_slice()
        .iter()
        .filter(|&&q| q > 0.0 && q < 1.0)
        .map(|&q| q * (1.0 - q))
        .collect();
    Ok(Extremes {
        pairs: p.len(),
        n0: inner.len(),
        d_min: d,
        d_max: d,
        p_min: inner.iter().copied().fold(f64::INFINITY, f64::min),
        p_max: variances.fold(0.0, f64::max),
    })
}

/// Lower bound on the variance of the statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBound {
    pub value: f64,
    pub n0: usize,
    /// Set when every probability is 0 or 1.
    pub degenerate: bool,
}

/// `32 N₀³ d_min⁴ p_min³ / N⁴`.
pub fn variance_lower_bound_from(e: &Extremes) -> VarianceBound {
    if e.n0 == 0 {
        return VarianceBound { value: 0.0, n0: 0, degenerate: true };
    }
    let n = e.pairs as f64;
    let value = 32.0 * (e.n0 as f64).powi(3) * e.d_min.powi(4) * e.p_min.powi(3) / n.powi(4);
    VarianceBound { value, n0: e.n0, degenerate: false }
}

pub fn variance_lower_bound(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<VarianceBound> {
    Ok(variance_lower_bound_from(&extremes(p, spec)?))
}

/// Squared RKHS norms of `y ↦ (l(1,y) - l(0,y)) l(b,y)` for `b = 0, 1` in the
/// two-point space with Gram matrix `[[l(0,0), l(0,1)], [l(1,0), l(1,1)]]`.
pub fn two_point_norms(l: [[f64; 2]; 2]) -> Result<[f64; 2]> {
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::NumericalDegeneracy(
            "two-point Gram matrix is singular".into(),
        ));
    }
    let inv = [[l[1][1] / det, -l[0][1] / det], [-l[1][0] / det, l[0][0] / det]];
    let norm = |b: usize| {
        let v = [(l[1][0] - l[0][0]) * l[b][0], (l[1][1] - l[0][1]) * l[b][1]];
        v[0] * (inv[0][0] * v[0] + inv[0][1] * v[1]) + v[1] * (inv[1][0] * v[0] + inv[1][1] * v[1])
    };
    Ok([norm(0), norm(1)])
}

/// Constants of the normal-approximation bound for the standardised statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinDiagnostics {
    pub pairs: usize,
    pub n0: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub d0: f64,
    pub sigma2: f64,
    /// True when `sigma2` is the variance lower bound rather than the exact variance.
    pub sigma2_is_lower_bound: bool,
    pub sigma2_lower: f64,
    pub c_n: f64,
    pub c1: f64,
    /// `C₁ / √N`.
    pub wasserstein_bound: f64,
    /// `C₁ / √N · (N / N₀)³`.
    pub main_text_bound: f64,
}

/// `C = p_max⁴ + (N+2)/N² p_max² + d₀ p_max / (N³ d_max⁴)`.
pub fn c_n(pairs: usize, d0: f64, p_max: f64, d_max: f64) -> f64 {
    let n = pairs as f64;
    p_max.powi(4) + (n + 2.0) / (n * n) * p_max.powi(2) + d0 * p_max / (n.powi(3) * d_max.powi(4))
}

/// `C₁ = 16√2 d_max⁴ p_max⁴ / (N σ² √π) + 8/√N (2N₀/N)² d_max⁶ p_max² / (N σ²)^{3/2} √C`.
pub fn c1(pairs: usize, n0: usize, d_max: f64, p_max: f64, d0: f64, sigma2: f64) -> f64 {
    if p_max == 0.0 {
        return 0.0;
    }
    let n = pairs as f64;
    let ns = n * sigma2;
    16.0 * 2f64.sqrt() * d_max.powi(4) * p_max.powi(4) / (ns * std::f64::consts::PI.sqrt())
        + 8.0 / n.sqrt() * (2.0 * n0 as f64 / n).powi(2) * d_max.powi(6) * p_max.powi(2)
            / ns.powf(1.5)
            * c_n(pairs, d0, p_max, d_max).sqrt()
}

/// Evaluate the bound. The exact variance is used when `N ≤ 12`, else the lower bound.
pub fn theorem_bound(p: &EdgeProbabilities, spec: &KernelSpec) -> Result<SteinDiagnostics> {
    let e = extremes(p, spec)?;
    let c = product_gap(spec)?;
    let [g0, g1] = two_point_norms([[1.0, c], [c, 1.0]])?;
    let d0 = (g0 + g1).powi(2);
    let lower = variance_lower_bound_from(&e).value;
    let (sigma2, is_lower) = if p.len() <= MAX_EXHAUSTIVE_PAIRS {
        (exhaustive_moments(p, spec)?.variance, false)
    } else {
        (lower, true)
    };
    let c1v = c1(e.pairs, e.n0, e.d_max, e.p_max, d0, sigma2);
    let n = e.pairs as f64;
    let bound = c1v / n.sqrt();
    let main = if e.n0 == 0 { bound } else { bound * (n / e.n0 as f64).powi(3) };
    Ok(SteinDiagnostics {
        pairs: e.pairs,
        n0: e.n0,
        d_min: e.d_min,
        d_max: e.d_max,
        p_min: e.p_min,
        p_max: e.p_max,
        d0,
        sigma2,
        sigma2_is_lower_bound: is_lower,
        sigma2_lower: lower,
        c_n: c_n(e.pairs, d0, e.p_max, e.d_max),
        c1: c1v,
        wasserstein_bound: bound,
        main_text_bound: main,
    })
}

/// `δ Σ_s |p_s - p*_s|`.
pub fn discrepancy_bound(p: &EdgeProbabilities, p_star: &EdgeProbabilities, delta: f64) -> Result<f64> {
    if p.len() != p_star.len() {
        return Err(Error::arg("probability vectors differ in length"));
    }
    let total: f64 = p.as_slice().iter().zip(p_star.as_slice()).map(|(a, b)| (a - b).abs()).sum();
    Ok(delta * total)
}

/// Change of the triangle proportion when one pair flips: `(n-2) / C(n,3) = 3 / N`.
pub fn triangle_proportion_delta(n: usize) -> f64 {
    3.0 / pair_count(n) as f64
}

/// `Σ_{i≤j} N_ij |Q_ij - p|` for an Erdős–Rényi `p` against a blockmodel.
pub fn ermm_er_distance(ermm: &ErmmParams, p: f64) -> f64 {
    let sizes = ermm.group_sizes();
    let pairs = crate::models::block_pair_counts(&sizes);
    let mut total = 0.0;
    for i in 0..sizes.len() {
        for j in i..sizes.len() {
            total += pairs[i][j] as f64 * (ermm.q[i][j] - p).abs();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    const VEH: KernelSpec = KernelSpec::VehGauss { sigma: 1.0 };

    #[test]
    fn offdiag_examples() {
        let p = EdgeProbabilities::new(3, vec![0.0, 1.0, 0.4]).unwrap();
        assert_eq!(offdiag_mean_from_gaps(&p, &[0.3, 0.3, 0.3]).unwrap(), 0.0);
        let half = EdgeProbabilities::uniform(2, 0.5).unwrap();
        let c: f64 = 0.6;
        // A single pair: the off-diagonal sum is empty.
        assert_eq!(offdiag_mean_from_gaps(&half, &[c]).unwrap(), 0.0);
        let two = EdgeProbabilities::new(3, vec![0.5, 0.5, 0.0]).unwrap();
        let got = offdiag_mean_from_gaps(&two, &[c, c, c]).unwrap() * 9.0 / 2.0;
        assert!((got - 0.25 * (c - 1.0).powi(2)).abs() < 1e-15);
        assert!(analytic_offdiag_mean(&half, &KernelSpec::default()).is_err());
    }

    #[test]
    fn point_mass_has_no_spread() {
        let p = EdgeProbabilities::uniform(4, 0.0).unwrap();
        let m = exhaustive_moments(&p, &VEH).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 0.0));
        let bound = variance_lower_bound(&p, &VEH).unwrap();
        assert!(bound.degenerate && bound.value == 0.0);
        let diag = theorem_bound(&p, &VEH).unwrap();
        assert_eq!(diag.wasserstein_bound, 0.0);
    }

    #[test]
    fn analytic_mean_matches_enumeration_at_one_half() {
        let p = EdgeProbabilities::uniform(4, 0.5).unwrap();
        let m = exhaustive_moments(&p, &VEH).unwrap();
        let off = analytic_offdiag_mean(&p, &VEH).unwrap();
        let diag = analytic_diag_mean(&p, &VEH).unwrap();
        assert!((m.offdiag_mean - off).abs() < 1e-12);
        assert!((m.diag_mean - diag).abs() < 1e-12);
        assert!((m.mean - off - diag).abs() < 1e-12);
        assert!(exhaustive_moments(&EdgeProbabilities::uniform(6, 0.5).unwrap(), &VEH).is_err());
    }

    #[test]
    fn variance_bound_formula() {
        let p = EdgeProbabilities::uniform(4, 0.3).unwrap();
        let b = variance_lower_bound(&p, &VEH).unwrap();
        let d = 1.0 - (-0.5f64).exp();
        let expect = 32.0 * 216.0 * d.powi(4) * 0.21f64.powi(3) / 1296.0;
        assert!((b.value - expect).abs() < 1e-15);
        assert_eq!(b.n0, 6);
    }

    #[test]
    fn variance_bound_holds_only_for_small_probabilities() {
        let check = |q: f64| {
            let p = EdgeProbabilities::uniform(4, q).unwrap();
            variance_lower_bound(&p, &VEH).unwrap().value <= exhaustive_moments(&p, &VEH).unwrap().variance
        };
        assert!(check(0.1));
        assert!(!check(0.3));
        assert!(!check(0.45));
    }

    #[test]
    fn one_half_is_degenerate() {
        let p = EdgeProbabilities::uniform(4, 0.5).unwrap();
        assert!(exhaustive_moments(&p, &VEH).unwrap().variance < 1e-18);
        assert!(variance_lower_bound(&p, &VEH).unwrap().value > 0.0);
    }

    #[test]
    fn two_point_norms_for_gaussian_factor() {
        // Hand evaluation: v_b = (c - 1)(l(b,0), -l(b,1)) and G⁻¹ = [[1,-c],[-c,1]]/(1-c²).
        let c: f64 = (-0.5f64).exp();
        let [g0, g1] = two_point_norms([[1.0, c], [c, 1.0]]).unwrap();
        let v0 = [(c - 1.0) * 1.0, (1.0 - c) * c];
        let q = |v: [f64; 2]| (v[0] * v[0] - 2.0 * c * v[0] * v[1] + v[1] * v[1]) / (1.0 - c * c);
        assert!((g0 - q(v0)).abs() < 1e-15);
        assert!((g0 - g1).abs() < 1e-15);
        assert!((g0 - (1.0 - c) * (1.0 + 3.0 * c * c) / (1.0 + c)).abs() < 1e-14);
        assert!(two_point_norms([[1.0, 1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn bound_matches_hand_evaluation() {
        let p = EdgeProbabilities::uniform(4, 0.3).unwrap();
        let d = theorem_bound(&p, &VEH).unwrap();
        let c: f64 = (-0.5f64).exp();
        let dm = 1.0 - c;
        let pm: f64 = 0.21;
        let g = (1.0 - c) * (1.0 + 3.0 * c * c) / (1.0 + c);
        let d0 = (2.0 * g).powi(2);
        let sigma2 = exhaustive_moments(&p, &VEH).unwrap().variance;
        let big_c = pm.powi(4) + 8.0 / 36.0 * pm * pm + d0 * pm / (216.0 * dm.powi(4));
        let c1 = 16.0 * 2f64.sqrt() * dm.powi(4) * pm.powi(4) / (6.0 * sigma2 * std::f64::consts::PI.sqrt())
            + 8.0 / 6f64.sqrt() * 4.0 * dm.powi(6) * pm * pm / (6.0 * sigma2).powf(1.5) * big_c.sqrt();
        assert!((d.d0 - d0).abs() < 1e-14);
        assert!((d.c1 - c1).abs() < 1e-12 * c1, "{} vs {}", d.c1, c1);
        assert!((d.wasserstein_bound - c1 / 6f64.sqrt()).abs() < 1e-12 * c1);
        assert!((d.main_text_bound - d.wasserstein_bound).abs() < 1e-15);
        assert!(!d.sigma2_is_lower_bound);
    }

    #[test]
    fn bound_shrinks_with_more_pairs() {
        let e = |pairs: usize| Extremes { pairs, n0: pairs / 2, d_min: 0.4, d_max: 0.4, p_min: 0.2, p_max: 0.24 };
        let eval = |pairs: usize| {
            let x = e(pairs);
            let s2 = variance_lower_bound_from(&x).value;
            c1(pairs, x.n0, x.d_max, x.p_max, 1.0, s2) / (pairs as f64).sqrt()
        };
        assert!(eval(400) < eval(100));
        assert!(variance_lower_bound_from(&e(100)).value <= variance_lower_bound_from(&Extremes { n0: 60, ..e(100) }).value);
    }

    #[test]
    fn discrepancy() {
        let p = EdgeProbabilities::uniform(5, 0.2).unwrap();
        assert_eq!(discrepancy_bound(&p, &p, 0.3).unwrap(), 0.0);
        let q = vec![vec![0.5, 0.1], vec![0.1, 0.3]];
        let ermm = ErmmParams::blockwise(&[2, 3], q).unwrap();
        let generic = discrepancy_bound(&p, &ermm.probabilities(), 1.0).unwrap();
        assert!((generic - ermm_er_distance(&ermm, 0.2)).abs() < 1e-12);
        assert!((generic - (1.0 * 0.3 + 6.0 * 0.1 + 3.0 * 0.1)).abs() < 1e-12);
        assert!((triangle_proportion_delta(5) - 0.3).abs() < 1e-15);
        assert!(discrepancy_bound(&p, &EdgeProbabilities::uniform(4, 0.2).unwrap(), 1.0).is_err());
    }
}
