//! Monte Carlo goodness-of-fit tests against a fixed edge-probability null.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::KernelSpec;
use crate::models::{dcsbm_estimate, ermm_mle, irg_sample_with, EdgeProbabilities};
use crate::rng::{derive_seed, stream};
use crate::stein::{draw_counts, gkss_from_counts};

/// Linear interpolation at position `q (m - 1)` of the sorted sample; exact ties
/// are put in a seeded random order before ranking.
pub fn empirical_quantile(values: &[f64], q: f64, seed: u64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::arg("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::arg(format!("quantile level {q} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.shuffle(&mut stream(seed, &[]));
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// `2 min(#(φ_i ≤ φ), #(φ_i ≥ φ)) / (M + 1)`, with the count floored at 1 and
/// the result capped at 1.
pub fn two_sided_pvalue(phi: f64, null: &[f64]) -> f64 {
    let le = null.iter().filter(|&&x| x <= phi).count();
    let ge = null.iter().filter(|&&x| x >= phi).count();
    let count = le.min(ge).max(1);
    (2.0 * count as f64 / (null.len() + 1) as f64).min(1.0)
}

/// How the observed and null statistics select vertex pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resampling {
    /// Every pair once.
    #[default]
    Full,
    /// `B` pairs uniformly with replacement.
    Uniform(usize),
    /// Every pair exactly once through the resampling code path.
    Coverage,
}

impl Resampling {
    pub fn size(&self) -> usize {
        match *self {
            Resampling::Uniform(b) => b,
            _ => 0,
        }
    }
}

/// Optional re-estimation of the null parameters on each simulated network.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Refit {
    #[default]
    Fixed,
    Ermm,
    Dcsbm { eps: f64 },
}

impl Refit {
    pub fn apply(&self, g: &Graph, p0: &EdgeProbabilities) -> EdgeProbabilities {
        match *self {
            Refit::Fixed => p0.clone(),
            Refit::Ermm => ermm_mle(g).params.probabilities(),
            Refit::Dcsbm { eps } => dcsbm_estimate(g, eps).params.probabilities(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub null_size: usize,
    pub alpha: f64,
    pub resampling: Resampling,
    pub refit: Refit,
    pub seed: u64,
}

impl TestOptions {
    pub fn new(null_size: usize, alpha: f64, seed: u64) -> Self {
        TestOptions { null_size, alpha, resampling: Resampling::Full, refit: Refit::Fixed, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.null_size < 20 {
            return Err(Error::arg(format!("null set size {} below 20", self.null_size)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::arg(format!("level {} outside (0, 1)", self.alpha)));
        }
        if self.resampling == Resampling::Uniform(0) {
            return Err(Error::arg("resample size must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one Monte Carlo test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub phi: f64,
    pub null_phis: Vec<f64>,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub p_value: f64,
    pub reject: bool,
    pub seed: u64,
    pub null_size: usize,
    /// Resample size, 0 when every pair is used.
    pub b: usize,
    pub kernel: KernelSpec,
}

fn statistic(
    g: &Graph,
    p: &EdgeProbabilities,
    spec: &KernelSpec,
    resampling: Resampling,
    seed: u64,
) -> Result<f64> {
    let counts = match resampling {
        Resampling::Full | Resampling::Coverage => vec![1; g.num_pairs()],
        Resampling::Uniform(b) => draw_counts(g.num_pairs(), b, &mut stream(seed, &[])),
    };
    gkss_from_counts(g, p, spec, &counts)
}

/// Statistics of `M` networks simulated from `p0`, carrying `labels`.
pub fn null_statistics(
    p0: &EdgeProbabilities,
    labels: &[u32],
    spec: &KernelSpec,
    opts: &TestOptions,
) -> Result<Vec<f64>> {
    (0..opts.null_size as u64)
        .into_par_iter()
        .map(|j| {
            let x = irg_sample_with(p0, &mut stream(opts.seed, &[0, j])).with_labels(labels.to_vec())?;
            let p = opts.refit.apply(&x, p0);
            statistic(&x, &p, spec, opts.resampling, derive_seed(opts.seed, &[1, j]))
        })
        .collect()
}

/// Compare an observed statistic with a null set.
pub fn evaluate(phi: f64, null_phis: Vec<f64>, spec: &KernelSpec, opts: &TestOptions) -> Result<TestResult> {
    let tie_seed = derive_seed(opts.seed, &[3]);
    let gamma_lo = empirical_quantile(&null_phis, opts.alpha / 2.0, tie_seed)?;
    let gamma_hi = empirical_quantile(&null_phis, 1.0 - opts.alpha / 2.0, tie_seed)?;
    Ok(TestResult {
        phi,
        p_value: two_sided_pvalue(phi, &null_phis),
        reject: phi < gamma_lo || phi > gamma_hi,
        gamma_lo,
        gamma_hi,
        seed: opts.seed,
        null_size: null_phis.len(),
        b: opts.resampling.size(),
        kernel: *spec,
        null_phis,
    })
}

/// Observed statistic under the options' resampling scheme.
pub fn observed_statistic(
    g: &Graph,
    p0: &EdgeProbabilities,
    spec: &KernelSpec,
    opts: &TestOptions,
) -> Result<f64> {
    statistic(g, p0, spec, opts.resampling, derive_seed(opts.seed, &[2]))
}

/// Test `H0: g ~ IRG(p0)` with a freshly simulated null set.
pub fn run_test_with(
    g: &Graph,
    p0: &EdgeProbabilities,
    spec: &KernelSpec,
    opts: &TestOptions,
) -> Result<TestResult> {
    opts.validate()?;
    spec.validate()?;
    p0.check_graph(g)?;
    let null = null_statistics(p0, g.labels(), spec, opts)?;
    let phi = observed_statistic(g, p0, spec, opts)?;
    evaluate(phi, null, spec, opts)
}

pub fn run_test(
    g: &Graph,
    p0: &EdgeProbabilities,
    spec: &KernelSpec,
    null_size: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    run_test_with(g, p0, spec, &TestOptions::new(null_size, alpha, seed))
}

pub fn run_test_resampled(
    g: &Graph,
    p0: &EdgeProbabilities,
    spec: &KernelSpec,
    null_size: usize,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    let opts = TestOptions { resampling: Resampling::Uniform(b), ..TestOptions::new(null_size, alpha, seed) };
    run_test_with(g, p0, spec, &opts)
}

/// Resample size as a fraction of the pair count, at least 1.
pub fn resample_size(pairs: usize, fraction: f64) -> usize {
    ((pairs as f64 * fraction).round() as usize).max(1)
}
