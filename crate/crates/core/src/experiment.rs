//! Power and calibration experiments: repeated tests on generated networks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{glr_test, lei_bootstrap_test};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::KernelSpec;
use crate::mctest::{evaluate, null_statistics, observed_statistic, resample_size, run_test_with, Refit, Resampling, TestOptions};
use crate::models::{
    blockwise_labels, chung_lu_probabilities, irg_sample_with, log_linear_dcsbm_draw,
    log_linear_dcsbm_proxy, uniform_weights, EdgeProbabilities, ErmmParams,
};
use crate::plant::{plant_clique_with, plant_hubs_with, HubOptions, HubTarget, SkipReason};
use crate::rng::{derive_seed, stream, Rng};

pub const SCHEMA_VERSION: u32 = 1;

/// Null model family of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Er { n: usize, p: f64 },
    Ermm { sizes: Vec<usize>, q: Vec<Vec<f64>> },
    /// Weights drawn afresh for every repetition from `U[lo, hi]`.
    ChungLu { n: usize, lo: f64, hi: f64 },
    /// Blockmodel `0.25 e^α` approximating the log-linear degree-corrected model.
    LogLinearDcsbm { sizes: Vec<usize>, alpha: Vec<Vec<f64>> },
}

/// How the observed network of a repetition is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Alternative {
    /// A draw from the null model itself.
    Null,
    PlantedClique {
        size: usize,
        #[serde(default = "default_max_rep")]
        max_rep: usize,
    },
    PlantedHubs {
        rounds: usize,
        scale: f64,
        #[serde(default)]
        target: HubTarget,
    },
    /// Chung-Lu with every weight shifted by `shift`.
    ChungLuShift { shift: f64 },
    /// Log-linear model with `β_u = ln U_u`.
    DegreeCorrected,
}

fn default_max_rep() -> usize {
    100
}

impl Alternative {
    pub fn label(&self) -> String {
        match self {
            Alternative::Null => "null".into(),
            Alternative::PlantedClique { size, .. } => format!("clique-{size}"),
            Alternative::PlantedHubs { rounds, scale, target: HubTarget::Absolute } => format!("hubs-r{rounds}-k{scale}"),
            Alternative::PlantedHubs { rounds, scale, target: HubTarget::Increment } => {
                format!("hubs-r{rounds}-k{scale}-inc")
            }
            Alternative::ChungLuShift { shift } => format!("chung-lu-shift-{shift}"),
            Alternative::DegreeCorrected => "degree-corrected".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefitKind {
    #[default]
    Ermm,
    Dcsbm,
}

/// One Stein test configuration; each becomes a column of the power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    #[serde(default)]
    pub kernel: KernelSpec,
    /// Re-estimate the null probabilities from the observed and every simulated network.
    #[serde(default)]
    pub estimated: bool,
    #[serde(default)]
    pub refit: RefitKind,
    /// Resample this fraction of the vertex pairs.
    #[serde(default)]
    pub resample_fraction: Option<f64>,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        let mut s = self.kernel.label();
        if self.estimated {
            s.push_str("-est");
        }
        if let Some(f) = self.resample_fraction {
            s.push_str(&format!("-b{}", (f * 100.0).round()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSpec {
    #[serde(default = "default_boot")]
    pub m_boot: usize,
}

fn default_boot() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub scenario: Scenario,
    pub alternatives: Vec<Alternative>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_null_size")]
    pub null_size: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Reuse one null set per method for all repetitions of a setting.
    #[serde(default)]
    pub share_null_set: bool,
    /// Fresh draws allowed per repetition when the generator fails.
    #[serde(default = "default_redraws")]
    pub max_redraws: usize,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    /// GLR against the blockmodel on the scenario's labels.
    #[serde(default)]
    pub glr: bool,
}

fn default_methods() -> Vec<MethodSpec> {
    vec![MethodSpec { kernel: KernelSpec::default(), estimated: false, refit: RefitKind::Ermm, resample_fraction: None }]
}
fn default_null_size() -> usize {
    200
}
fn default_repetitions() -> usize {
    50
}
fn default_alpha() -> f64 {
    0.05
}
fn default_redraws() -> usize {
    100
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, alternatives: Vec<Alternative>) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: String::new(),
            scenario,
            alternatives,
            methods: default_methods(),
            null_size: default_null_size(),
            repetitions: default_repetitions(),
            alpha: default_alpha(),
            seed: 0,
            share_null_set: false,
            max_redraws: default_redraws(),
            spectral: None,
            glr: false,
        }
    }

    /// Check field constraints, reporting the offending field.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::Argument(format!("{name}: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return field("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return field("alpha", format!("{} outside (0, 1)", self.alpha));
        }
        if self.null_size < 20 {
            return field("null_size", format!("{} below 20", self.null_size));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if let Err(e) = m.kernel.validate() {
                return field(&format!("methods[{i}].kernel"), e.to_string());
            }
            if let Some(f) = m.resample_fraction {
                if !(f > 0.0 && f <= 1.0) {
                    return field(&format!("methods[{i}].resample_fraction"), format!("{f} outside (0, 1]"));
                }
            }
        }
        if let Err(e) = self.scenario.labels().and_then(|l| self.scenario.fixed_null(&l).map(|_| ())) {
            return field("scenario", e.to_string());
        }
        for (i, a) in self.alternatives.iter().enumerate() {
            let ok = match (a, &self.scenario) {
                (Alternative::ChungLuShift { .. }, Scenario::ChungLu { .. }) => true,
                (Alternative::ChungLuShift { .. }, _) => false,
                (Alternative::DegreeCorrected, Scenario::LogLinearDcsbm { .. }) => true,
                (Alternative::DegreeCorrected, _) => false,
                (Alternative::PlantedClique { size, max_rep }, s) => *size >= 2 && *size <= s.n() && *max_rep >= 1,
                (Alternative::PlantedHubs { rounds, scale, .. }, _) => *rounds >= 1 && *scale >= 1.0,
                (Alternative::Null, _) => true,
            };
            if !ok {
                return field(&format!("alternatives[{i}]"), format!("{a:?} does not fit the scenario"));
            }
        }
        if self.share_null_set && matches!(self.scenario, Scenario::ChungLu { .. }) {
            return field("share_null_set", "the Chung-Lu null changes with every repetition".into());
        }
        Ok(())
    }
}

impl Scenario {
    pub fn n(&self) -> usize {
        match self {
            Scenario::Er { n, .. } | Scenario::ChungLu { n, .. } => *n,
            Scenario::Ermm { sizes, .. } | Scenario::LogLinearDcsbm { sizes, .. } => sizes.iter().sum(),
        }
    }

    pub fn labels(&self) -> Result<Vec<u32>> {
        match self {
            Scenario::Er { n, .. } | Scenario::ChungLu { n, .. } => {
                if *n < 3 {
                    return Err(Error::arg("at least 3 vertices are required"));
                }
                Ok(vec![1; *n])
            }
            Scenario::Ermm { sizes, .. } | Scenario::LogLinearDcsbm { sizes, .. } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(Error::arg("group sizes must be positive"));
                }
                Ok(blockwise_labels(sizes))
            }
        }
    }

    /// The null probabilities when they do not depend on the repetition.
    pub fn fixed_null(&self, labels: &[u32]) -> Result<Option<EdgeProbabilities>> {
        match self {
            Scenario::Er { n, p } => EdgeProbabilities::uniform(*n, *p).map(Some),
            Scenario::Ermm { q, .. } => Ok(Some(ErmmParams::new(labels.to_vec(), q.clone())?.probabilities())),
            Scenario::LogLinearDcsbm { alpha, .. } => Ok(Some(log_linear_dcsbm_proxy(alpha, labels)?.probabilities())),
            Scenario::ChungLu { n, lo, hi } => {
                if !(*lo > 0.0 && lo <= hi) || *n < 3 {
                    return Err(Error::arg("Chung-Lu weights need 0 < lo <= hi"));
                }
                Ok(None)
            }
        }
    }

    /// The null probabilities of one repetition, with the alternative's own
    /// probabilities where those differ from the null.
    fn draw(&self, labels: &[u32], alt: &Alternative, rng: &mut Rng) -> Result<(EdgeProbabilities, EdgeProbabilities)> {
        match self {
            Scenario::ChungLu { n, lo, hi } => {
                let w = uniform_weights(*n, *lo, *hi, rng);
                let p0 = chung_lu_probabilities(&w)?;
                let p1 = match alt {
                    Alternative::ChungLuShift { shift } => {
                        chung_lu_probabilities(&w.iter().map(|x| x + shift).collect::<Vec<_>>())?
                    }
                    _ => p0.clone(),
                };
                Ok((p0, p1))
            }
            Scenario::LogLinearDcsbm { alpha, .. } => {
                let p0 = self.fixed_null(labels)?.expect("fixed");
                let p1 = match alt {
                    Alternative::DegreeCorrected => log_linear_dcsbm_draw(alpha, labels, rng)?,
                    _ => p0.clone(),
                };
                Ok((p0, p1))
            }
            _ => {
                let p0 = self.fixed_null(labels)?.expect("fixed");
                Ok((p0.clone(), p0))
            }
        }
    }
}

/// The observed network of one repetition and its null probabilities.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub p0: EdgeProbabilities,
    /// Failed draws before this one.
    pub skipped: usize,
    pub skip_reasons: Vec<SkipReason>,
    pub planted: bool,
}

/// Generate the observed network of a repetition. Draws where the planting
/// fails are discarded and redrawn, up to `max_redraws` times.
pub fn generate(config: &ExperimentConfig, alt: &Alternative, seed: u64) -> Result<Option<Generated>> {
    let labels = config.scenario.labels()?;
    let mut reasons = Vec::new();
    for attempt in 0..=config.max_redraws as u64 {
        let mut rng = stream(seed, &[attempt]);
        let (p0, p1) = config.scenario.draw(&labels, alt, &mut rng)?;
        let base = irg_sample_with(&p1, &mut rng).with_labels(labels.clone())?;
        let (graph, planted) = match alt {
            Alternative::PlantedClique { size, max_rep } => {
                let out = plant_clique_with(&base, *size, *max_rep, &mut rng)?;
                if out.skipped_reason == Some(SkipReason::TooSparse) {
                    reasons.push(SkipReason::TooSparse);
                    continue;
                }
                (out.graph, out.planted)
            }
            Alternative::PlantedHubs { rounds, scale, target } => {
                let opts = HubOptions { target: *target, ..HubOptions::default() };
                let out = plant_hubs_with(&base, *rounds, *scale, opts, &mut rng)?;
                (out.graph, out.planted)
            }
            _ => (base, false),
        };
        return Ok(Some(Generated { graph, p0, skipped: reasons.len(), skip_reasons: reasons, planted }));
    }
    Ok(None)
}

/// Outcome of one method on one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub repetition: usize,
    pub seed: u64,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub max_degree: usize,
    pub edges: usize,
    /// Set when the method could not be evaluated, with the reason.
    pub error: Option<String>,
}

/// Rejection rate of one method at one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSummary {
    pub setting: String,
    pub method: String,
    pub runs: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Generator failures that were discarded.
    pub skipped: usize,
    /// Repetitions with no usable network after all redraws.
    pub abandoned: usize,
    /// Repetitions where the method failed, such as degenerate scaling.
    pub errors: usize,
    pub mean_max_degree: f64,
    pub records: Vec<RunRecord>,
}

impl PowerSummary {
    fn from_records(setting: String, method: String, skipped: usize, abandoned: usize, records: Vec<RunRecord>) -> Self {
        let ok: Vec<&RunRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let runs = ok.len();
        let rejections = ok.iter().filter(|r| r.reject).count();
        let rate = if runs == 0 { 0.0 } else { rejections as f64 / runs as f64 };
        let half = if runs == 0 { 0.0 } else { 2.0 * rate * (1.0 - rate) / runs as f64 };
        let mean_max_degree = if records.is_empty() {
            0.0
        } else {
            records.iter().map(|r| r.max_degree as f64).sum::<f64>() / records.len() as f64
        };
        PowerSummary {
            setting,
            method,
            runs,
            rejections,
            rejection_rate: rate,
            band_lo: rate - half,
            band_hi: rate + half,
            skipped,
            abandoned,
            errors: records.len() - runs,
            mean_max_degree,
            records,
        }
    }
}

fn method_options(config: &ExperimentConfig, m: &MethodSpec, pairs: usize, seed: u64) -> TestOptions {
    let resampling = match m.resample_fraction {
        Some(f) => Resampling::Uniform(resample_size(pairs, f)),
        None => Resampling::Full,
    };
    let refit = match (m.estimated, m.refit) {
        (false, _) => Refit::Fixed,
        (true, RefitKind::Ermm) => Refit::Ermm,
        (true, RefitKind::Dcsbm) => Refit::Dcsbm { eps: 1e-3 },
    };
    TestOptions { null_size: config.null_size, alpha: config.alpha, resampling, refit, seed }
}

/// Run every method on every repetition of one alternative.
pub fn power_experiment_setting(config: &ExperimentConfig, setting: usize) -> Result<Vec<PowerSummary>> {
    config.validate()?;
    let alt = &config.alternatives[setting];
    let labels = config.scenario.labels()?;
    let n = config.scenario.n();
    let pairs = n * (n - 1) / 2;
    let setting_seed = derive_seed(config.seed, &[setting as u64]);

    let generated = (0..config.repetitions)
        .into_par_iter()
        .map(|i| generate(config, alt, derive_seed(setting_seed, &[0, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let skipped: usize = generated.iter().flatten().map(|g| g.skipped).sum::<usize>()
        + generated.iter().filter(|g| g.is_none()).count() * (config.max_redraws + 1);
    let abandoned = generated.iter().filter(|g| g.is_none()).count();
    let usable: Vec<(usize, &Generated)> =
        generated.iter().enumerate().filter_map(|(i, g)| g.as_ref().map(|g| (i, g))).collect();

    let mut out = Vec::new();
    for (j, method) in config.methods.iter().enumerate() {
        let method_seed = derive_seed(setting_seed, &[1, j as u64]);
        let shared = if config.share_null_set {
            let p0 = config.scenario.fixed_null(&labels)?.expect("validated");
            let opts = method_options(config, method, pairs, derive_seed(method_seed, &[u64::MAX]));
            Some(null_statistics(&p0, &labels, &method.kernel, &opts)?)
        } else {
            None
        };
        let records = usable
            .iter()
            .map(|&(i, gen)| {
                let seed = derive_seed(method_seed, &[i as u64]);
                let opts = method_options(config, method, pairs, seed);
                let p0 = if method.estimated { opts.refit.apply(&gen.graph, &gen.p0) } else { gen.p0.clone() };
                let result = match &shared {
                    Some(null) if !method.estimated => {
                        let phi = observed_statistic(&gen.graph, &p0, &method.kernel, &opts)?;
                        evaluate(phi, null.clone(), &method.kernel, &opts)?
                    }
                    _ => run_test_with(&gen.graph, &p0, &method.kernel, &opts)?,
                };
                Ok(record(i, seed, &gen.graph, result.phi, result.p_value, result.reject, None))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(PowerSummary::from_records(alt.label(), method.label(), skipped, abandoned, records));
    }

    if let Some(spec) = &config.spectral {
        let method_seed = derive_seed(setting_seed, &[2]);
        let records = usable
            .par_iter()
            .map(|&(i, gen)| {
                let seed = derive_seed(method_seed, &[i as u64]);
                match lei_bootstrap_test(&gen.graph, spec.m_boot, config.alpha, seed) {
                    Ok(r) => record(i, seed, &gen.graph, r.t_boot, r.p_value, r.reject, None),
                    Err(e) => record(i, seed, &gen.graph, f64::NAN, f64::NAN, false, Some(e.to_string())),
                }
            })
            .collect();
        out.push(PowerSummary::from_records(alt.label(), "spectral".into(), skipped, abandoned, records));
    }

    if config.glr {
        let records = usable
            .iter()
            .map(|&(i, gen)| {
                // The null is fixed, so every block entry of the alternative is free.
                match glr_test(&gen.graph, &gen.p0, 0, config.alpha) {
                    Ok(r) => record(i, 0, &gen.graph, r.lambda_log, r.p_value, r.reject, None),
                    Err(e) => record(i, 0, &gen.graph, f64::NAN, f64::NAN, false, Some(e.to_string())),
                }
            })
            .collect();
        out.push(PowerSummary::from_records(alt.label(), "glr".into(), skipped, abandoned, records));
    }
    Ok(out)
}

fn record(i: usize, seed: u64, g: &Graph, statistic: f64, p_value: f64, reject: bool, error: Option<String>) -> RunRecord {
    RunRecord {
        repetition: i,
        seed,
        statistic,
        p_value,
        reject,
        max_degree: g.degree_vector().into_iter().max().unwrap_or(0),
        edges: g.edge_count(),
        error,
    }
}

/// Every setting of the experiment, in configuration order.
pub fn power_experiment(config: &ExperimentConfig) -> Result<Vec<PowerSummary>> {
    config.validate()?;
    let mut out = Vec::new();
    for setting in 0..config.alternatives.len() {
        out.extend(power_experiment_setting(config, setting)?);
    }
    Ok(out)
}

/// Group sizes of the degree-corrected experiments on 27 vertices.
pub fn dcsbm_experiment_sizes() -> Vec<usize> {
    vec![13, 14]
}
