use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::tw1::{tw1_cdf, tw1_mean, tw1_quantile, tw1_sd};
use crate::error::{Error, Result};
use crate::graph::{all_pairs, Graph};
use crate::models::{ermm_mle, irg_sample_with, EdgeProbabilities};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub t_boot: f64,
    pub lambda1: f64,
    pub lambdan: f64,
    pub boot_mean1: f64,
    pub boot_sd1: f64,
    pub boot_meann: f64,
    pub boot_sdn: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub m_boot: usize,
    pub seed: u64,
}

/// `(A_uv - P_uv) / √((n-1) P_uv (1 - P_uv))` off the diagonal, 0 on it.
pub fn lei_residual(g: &Graph, p: &EdgeProbabilities) -> Result<DMatrix<f64>> {
    p.check_graph(g)?;
    let n = g.n();
    let mut r = DMatrix::zeros(n, n);
    let scale = (n as f64 - 1.0).max(1.0);
    for (s, (u, v)) in all_pairs(n).into_iter().enumerate() {
        let q = p.get(s);
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::DegenerateScaling { u: u + 1, v: v + 1, p: q });
        }
        let a = if g.bit(s) { 1.0 } else { 0.0 };
        let value = (a - q) / (scale * q * (1.0 - q)).sqrt();
        r[(u, v)] = value;
        r[(v, u)] = value;
    }
    Ok(r)
}

/// Largest and smallest eigenvalues of a symmetric matrix.
pub fn eigen_extremes(m: DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    (hi, lo)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Bootstrap-corrected spectral test of the blockmodel on the graph's labels.
/// Replicates are drawn from the fitted blockmodel and standardised with the
/// same fitted probabilities.
pub fn lei_bootstrap_test(g: &Graph, m_boot: usize, alpha: f64, seed: u64) -> Result<SpectralResult> {
    if m_boot < 2 {
        return Err(Error::arg("at least 2 bootstrap replicates are required"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("level {alpha} outside (0, 1)")));
    }
    let p = ermm_mle(g).params.probabilities();
    let (lambda1, lambdan) = eigen_extremes(lei_residual(g, &p)?);
    let boot = (0..m_boot as u64)
        .into_par_iter()
        .map(|j| {
            let x = irg_sample_with(&p, &mut stream(seed, &[j]));
            lei_residual(&x, &p).map(eigen_extremes)
        })
        .collect::<Result<Vec<_>>>()?;
    let (boot_mean1, boot_sd1) = mean_sd(&boot.iter().map(|b| b.0).collect::<Vec<_>>());
    let (boot_meann, boot_sdn) = mean_sd(&boot.iter().map(|b| b.1).collect::<Vec<_>>());
    if boot_sd1 == 0.0 || boot_sdn == 0.0 {
        return Err(Error::NumericalDegeneracy("bootstrap eigenvalues have no spread".into()));
    }
    let t_boot = tw1_mean()
        + tw1_sd() * f64::max((lambda1 - boot_mean1) / boot_sd1, -(lambdan - boot_meann) / boot_sdn);
    let critical_value = tw1_quantile(1.0 - alpha / 2.0)?;
    Ok(SpectralResult {
        t_boot,
        lambda1,
        lambdan,
        boot_mean1,
        boot_sd1,
        boot_meann,
        boot_sdn,
        critical_value,
        p_value: (2.0 * (1.0 - tw1_cdf(t_boot))).min(1.0),
        reject: t_boot >= critical_value,
        m_boot,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{irg_sample, ErmmParams};

    #[test]
    fn residual_entries() {
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        let p = EdgeProbabilities::uniform(5, 0.5).unwrap();
        let r = lei_residual(&g, &p).unwrap();
        let on = 0.5 / (4.0f64 * 0.25).sqrt();
        assert!((r[(0, 1)] - on).abs() < 1e-15);
        assert!((r[(1, 0)] - on).abs() < 1e-15);
        assert!((r[(0, 2)] + on).abs() < 1e-15);
        assert!((0..5).all(|i| r[(i, i)] == 0.0));
        assert_eq!(r, r.transpose());
    }

    #[test]
    fn degenerate_probability_names_the_pair() {
        let g = Graph::empty(3);
        let p = EdgeProbabilities::new(3, vec![0.2, 1.0, 0.3]).unwrap();
        match lei_residual(&g, &p) {
            Err(Error::DegenerateScaling { u, v, p }) => assert_eq!((u, v, p), (1, 3, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extremes_of_a_known_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let (hi, lo) = eigen_extremes(m);
        assert!((hi - 3.0).abs() < 1e-12 && (lo + 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_bootstrap() {
        let params = ErmmParams::blockwise(&[10, 10], vec![vec![0.4, 0.15], vec![0.15, 0.4]]).unwrap();
        let g = irg_sample(&params.probabilities(), 4).with_labels(params.labels.clone()).unwrap();
        let a = lei_bootstrap_test(&g, 30, 0.05, 8).unwrap();
        let b = lei_bootstrap_test(&g, 30, 0.05, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.lambda1 >= a.lambdan);
    }

    #[test]
    fn residual_variance_is_one_over_n_minus_one() {
        let n = 40;
        let p = EdgeProbabilities::uniform(n, 0.3).unwrap();
        let mut sum_sq = 0.0;
        let mut count = 0.0;
        for seed in 0..20 {
            let r = lei_residual(&irg_sample(&p, seed), &p).unwrap();
            for u in 0..n {
                for v in u + 1..n {
                    sum_sq += r[(u, v)] * r[(u, v)];
                    count += 1.0;
                }
            }
        }
        let var = sum_sq / count;
        assert!((var * (n as f64 - 1.0) - 1.0).abs() < 0.2);
    }
}
