use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::{ermm_mle, EdgeProbabilities};

/// Upper tail of the χ² distribution with `k` degrees of freedom.
pub fn chi2_survival(x: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::arg("chi-square needs at least 1 degree of freedom"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::arg(format!("chi-square argument {x} is negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(k as f64 / 2.0, x / 2.0))
}

/// The `x` with `chi2_survival(x, k) = level`, by bisection.
pub fn chi2_quantile(level: f64, k: usize) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::arg(format!("tail level {level} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while chi2_survival(hi, k)? > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_survival(mid, k)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlrResult {
    /// `-2 ln Λ`; infinite when the null assigns probability 0 to the graph.
    pub lambda_log: f64,
    pub df: usize,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    /// The null contradicts an observed indicator.
    pub null_impossible: bool,
    /// One parameter per pair, where the χ² approximation is not justified.
    pub saturated: bool,
}

fn finish(l0: f64, l_alt: f64, df: usize, alpha: f64, saturated: bool) -> Result<GlrResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("level {alpha} outside (0, 1)")));
    }
    if df == 0 {
        return Err(Error::arg("alternative has no more free parameters than the null"));
    }
    let null_impossible = l0 == f64::NEG_INFINITY;
    let lambda_log = if null_impossible { f64::INFINITY } else { (2.0 * (l_alt - l0)).max(0.0) };
    let critical_value = chi2_quantile(alpha, df)?;
    let p_value = chi2_survival(lambda_log, df)?;
    Ok(GlrResult {
        lambda_log,
        df,
        critical_value,
        p_value,
        reject: lambda_log > critical_value,
        null_impossible,
        saturated,
    })
}

/// GLR test of `p0` against the blockmodel on the graph's labels.
/// `null_parameters` is the number of parameters estimated to obtain `p0`, so
/// `k = L(L+1)/2 - null_parameters`.
pub fn glr_test(g: &Graph, p0: &EdgeProbabilities, null_parameters: usize, alpha: f64) -> Result<GlrResult> {
    p0.check_graph(g)?;
    let fit = ermm_mle(g).params;
    let df = fit.free_parameters().saturating_sub(null_parameters);
    finish(p0.log_likelihood(g), fit.probabilities().log_likelihood(g), df, alpha, false)
}

/// GLR test against the general model with one probability per pair; the
/// supremum of the likelihood is 1.
pub fn glr_test_saturated(
    g: &Graph,
    p0: &EdgeProbabilities,
    null_parameters: usize,
    alpha: f64,
) -> Result<GlrResult> {
    p0.check_graph(g)?;
    let df = g.num_pairs().saturating_sub(null_parameters);
    finish(p0.log_likelihood(g), 0.0, df, alpha, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ErmmParams;

    #[test]
    fn survival_df2_is_exponential() {
        for x in [0.0, 0.3, 1.0, 5.991, 12.5, 40.0] {
            assert!((chi2_survival(x, 2).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert_eq!(chi2_survival(0.0, 7).unwrap(), 1.0);
        assert!(chi2_survival(1.0, 0).is_err());
        assert!(chi2_survival(-1.0, 2).is_err());
    }

    #[test]
    fn critical_values() {
        assert!((chi2_quantile(0.05, 2).unwrap() - 5.991).abs() < 1e-3);
        assert!((chi2_quantile(0.05, 5).unwrap() - 11.07).abs() < 1e-3);
        assert!((chi2_survival(5.991, 2).unwrap() - 0.05).abs() < 1e-3);
    }

    #[test]
    fn null_at_the_mle_gives_zero() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4), (2, 5)])
            .unwrap()
            .with_labels(vec![1, 1, 1, 2, 2, 2])
            .unwrap();
        let p0 = ermm_mle(&g).params.probabilities();
        let r = glr_test(&g, &p0, 3, 0.05);
        assert!(r.is_err());
        let r = glr_test(&g, &p0, 1, 0.05).unwrap();
        assert!(r.lambda_log.abs() < 1e-12);
        assert!(!r.reject);
        assert_eq!(r.df, 2);
    }

    #[test]
    fn impossible_null_is_infinite() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let p0 = EdgeProbabilities::uniform(3, 0.0).unwrap();
        let r = glr_test_saturated(&g, &p0, 0, 0.05).unwrap();
        assert!(r.null_impossible && r.lambda_log.is_infinite() && r.reject);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn relabelling_groups_leaves_statistic_unchanged() {
        let edges = [(0, 1), (1, 2), (3, 4), (2, 5), (0, 5)];
        let a = Graph::from_edges(6, &edges).unwrap().with_labels(vec![1, 1, 2, 2, 3, 3]).unwrap();
        let b = Graph::from_edges(6, &edges).unwrap().with_labels(vec![3, 3, 1, 1, 2, 2]).unwrap();
        let p0 = EdgeProbabilities::uniform(6, 5.0 / 15.0).unwrap();
        let ra = glr_test(&a, &p0, 1, 0.05).unwrap();
        let rb = glr_test(&b, &p0, 1, 0.05).unwrap();
        assert!((ra.lambda_log - rb.lambda_log).abs() < 1e-12);
        let q = ErmmParams::new(vec![1, 1, 2, 2, 3, 3], vec![vec![0.3; 3]; 3]).unwrap();
        assert_eq!(q.free_parameters(), 6);
    }
}
