//! Command implementations. Human-readable reports go to standard error, CSV
//! and parameter files to `--out` or standard output.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use irg_gkss::baselines::{glr_test, lei_bootstrap_test};
use irg_gkss::datasets::{florentine, karate};
use irg_gkss::diagnostics::{
    analytic_diag_mean, analytic_offdiag_mean, discrepancy_bound, exhaustive_moments, theorem_bound,
    triangle_proportion_delta, variance_lower_bound, MAX_EXHAUSTIVE_PAIRS,
};
use irg_gkss::experiment::power_experiment;
use irg_gkss::graph::{format_edge_list, format_labels, load_graph, max_vertex_id};
use irg_gkss::mctest::{run_test_with, Refit, Resampling, TestOptions};
use irg_gkss::models::{irg_sample, nlpa_sample, NlpaParams};
use irg_gkss::plant::{plant_clique, plant_hubs_with, HubOptions};
use irg_gkss::rng::{derive_seed, stream};
use irg_gkss::{Graph, KernelSpec};

use crate::config::{load_config, load_preset, preset_names};
use crate::error::{CliError, CliResult};
use crate::model::{self, FitKind, FittedModel, ModelSpec, ParamFile};
use crate::output::{fixed, power_row, record_rows, sci, Table, CSV_SCHEMA_VERSION, POWER_HEADER, RECORD_HEADER, TEST_HEADER};
use crate::{
    Dataset, DiagnosticsArgs, FitArgs, GraphArgs, PlantArgs, PlantKind, PowerArgs, RefitArg, SimulateArgs, TestArgs,
};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn count_labels(path: &Path) -> CliResult<usize> {
    Ok(read(path)?
        .lines()
        .filter(|l| !l.split('#').next().unwrap_or("").trim().is_empty())
        .count())
}

/// Whether the graph carries labels from a file or a bundled dataset.
struct LoadedGraph {
    graph: Graph,
    name: String,
    has_labels: bool,
}

impl GraphArgs {
    fn load(&self) -> CliResult<LoadedGraph> {
        if let Some(d) = self.dataset {
            if self.labels.is_some() {
                return Err(CliError::input("--labels cannot be combined with --dataset"));
            }
            let (graph, name) = match d {
                Dataset::Karate => (karate(), "karate"),
                Dataset::Florentine => (florentine(), "florentine"),
            };
            let has_labels = graph.group_count() > 1;
            return Ok(LoadedGraph { graph, name: name.into(), has_labels });
        }
        let path = self.graph.as_deref().ok_or_else(|| CliError::input("pass --graph or --dataset"))?;
        let n = match (self.n, &self.labels) {
            (Some(n), _) => n,
            (None, Some(l)) => count_labels(l)?,
            (None, None) => max_vertex_id(path)?,
        };
        let graph = load_graph(path, n, self.labels.as_deref())?;
        Ok(LoadedGraph { graph, name: path.display().to_string(), has_labels: self.labels.is_some() })
    }
}

/// Use the model's labels when the graph has none; reject conflicting ones.
fn reconcile_labels(loaded: LoadedGraph, model_labels: Option<&[u32]>) -> CliResult<LoadedGraph> {
    match model_labels {
        Some(labels) if loaded.has_labels && labels != loaded.graph.labels() => {
            Err(CliError::input("the model's group labels differ from the graph's labels"))
        }
        Some(labels) if !loaded.has_labels => {
            let graph = loaded.graph.with_labels(labels.to_vec())?;
            Ok(LoadedGraph { graph, has_labels: true, ..loaded })
        }
        _ => Ok(loaded),
    }
}

/// Free parameters fitted to the data under the null, or `None` when the null
/// is not nested in the blockmodel alternative.
fn null_parameters(spec: &ModelSpec, resolved_file: Option<&FittedModel>) -> Option<usize> {
    let blocks = |q: &[Vec<f64>]| q.len() * (q.len() + 1) / 2;
    match (spec, resolved_file) {
        (ModelSpec::Er(_), _) => Some(0),
        (ModelSpec::Estimated(FitKind::Er, _), _) => Some(1),
        (ModelSpec::Estimated(FitKind::Ermm, _), _) => None,
        (ModelSpec::Estimated(FitKind::Dcsbm, _), _) => None,
        (ModelSpec::File(_), Some(FittedModel::Er { .. })) => Some(1),
        (ModelSpec::File(_), Some(FittedModel::Ermm(m))) => Some(blocks(&m.q)),
        _ => None,
    }
}

pub fn test(a: &TestArgs) -> CliResult<()> {
    let kernel = KernelSpec::parse(&a.kernel)?;
    let spec = ModelSpec::parse(&a.model)?;
    let loaded = a.graph.load()?;
    let file = match &spec {
        ModelSpec::File(path) => Some(ParamFile::load(path)?.model),
        _ => None,
    };
    let resolved = model::resolve(&spec, Some(&loaded.graph), None)?;
    let loaded = reconcile_labels(loaded, resolved.labels.as_deref())?;
    let g = &loaded.graph;

    let resampling = match a.resample {
        Some(0) => return Err(CliError::input("--B must be positive")),
        Some(b) => Resampling::Uniform(b),
        None => Resampling::Full,
    };
    let refit = match a.refit {
        RefitArg::None => Refit::Fixed,
        RefitArg::Ermm => Refit::Ermm,
        RefitArg::Dcsbm => Refit::Dcsbm { eps: model::DEFAULT_EPS },
    };
    let opts = TestOptions { null_size: a.null_size, alpha: a.alpha, resampling, refit, seed: a.seed };
    opts.validate()?;
    let result = run_test_with(g, &resolved.p, &kernel, &opts)?;

    let base = |method: &str| {
        vec![
            CSV_SCHEMA_VERSION.to_string(),
            loaded.name.clone(),
            g.n().to_string(),
            g.edge_count().to_string(),
            method.to_string(),
            resolved.description.clone(),
            if method.starts_with("gkss") { kernel.label() } else { String::new() },
        ]
    };
    let decision = |reject: bool| if reject { "reject" } else { "do not reject" };
    let mut rows = Vec::new();
    let method = if matches!(refit, Refit::Fixed) { "gkss" } else { "gkss-estimated" };
    eprintln!("graph {} with {} vertices and {} edges; null {}", loaded.name, g.n(), g.edge_count(), resolved.description);
    eprintln!(
        "{method} ({}): statistic {:.6e}, null quantiles [{:.6e}, {:.6e}], p-value {:.5}, {}",
        kernel.label(),
        result.phi,
        result.gamma_lo,
        result.gamma_hi,
        result.p_value,
        decision(result.reject)
    );
    let mut row = base(method);
    row.extend([
        a.null_size.to_string(),
        result.b.to_string(),
        fixed(a.alpha, 4),
        a.seed.to_string(),
        sci(result.phi),
        sci(result.gamma_lo),
        sci(result.gamma_hi),
        fixed(result.p_value, 5),
        u8::from(result.reject).to_string(),
    ]);
    rows.push(row);

    if a.glr {
        match null_parameters(&spec, file.as_ref()) {
            None => eprintln!("glr: skipped, the null is not nested in the blockmodel on the labels"),
            Some(k) => match glr_test(g, &resolved.p, k, a.alpha) {
                Ok(r) => {
                    eprintln!(
                        "glr (df {}): -2 ln L {:.4}, critical value {:.4}, p-value {:.5}, {}",
                        r.df,
                        r.lambda_log,
                        r.critical_value,
                        r.p_value,
                        decision(r.reject)
                    );
                    let mut row = base("glr");
                    row.extend([
                        String::new(),
                        String::new(),
                        fixed(a.alpha, 4),
                        String::new(),
                        sci(r.lambda_log),
                        String::new(),
                        sci(r.critical_value),
                        fixed(r.p_value, 5),
                        u8::from(r.reject).to_string(),
                    ]);
                    rows.push(row);
                }
                Err(e) => eprintln!("glr: skipped, {e}"),
            },
        }
    }

    if let Some(m_boot) = a.spectral {
        let seed = derive_seed(a.seed, &[4]);
        match lei_bootstrap_test(g, m_boot, a.alpha, seed) {
            Ok(r) => {
                eprintln!(
                    "spectral ({} groups): statistic {:.4}, critical value {:.4}, p-value {:.5}, {}",
                    g.group_count(),
                    r.t_boot,
                    r.critical_value,
                    r.p_value,
                    decision(r.reject)
                );
                let mut row = base("spectral");
                row.extend([
                    m_boot.to_string(),
                    String::new(),
                    fixed(a.alpha, 4),
                    seed.to_string(),
                    sci(r.t_boot),
                    String::new(),
                    sci(r.critical_value),
                    fixed(r.p_value, 5),
                    u8::from(r.reject).to_string(),
                ]);
                rows.push(row);
            }
            Err(e) => eprintln!("spectral: skipped, {e}"),
        }
    }

    let mut table = Table::create(a.out.as_deref(), TEST_HEADER)?;
    for row in rows {
        table.row(row)?;
    }
    table.finish()
}

pub fn power(a: &PowerArgs) -> CliResult<()> {
    if a.list_presets {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let mut config = match (&a.config, &a.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => load_preset(name)?,
        _ => return Err(CliError::input("pass a configuration file or --preset")),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(m) = a.null_size {
        config.null_size = m;
    }
    if let Some(r) = a.repetitions {
        config.repetitions = r;
    }
    config.validate().map_err(|e| CliError::input(e.to_string()))?;

    let name = if config.name.is_empty() { "experiment".to_string() } else { config.name.clone() };
    let summaries = if config.repetitions == 0 {
        eprintln!("warning: zero repetitions, writing an empty result");
        Vec::new()
    } else {
        power_experiment(&config)?
    };
    for s in &summaries {
        eprintln!(
            "{} / {}: rejection rate {:.2} in {} runs, band [{:.3}, {:.3}], {} skipped",
            s.setting, s.method, s.rejection_rate, s.runs, s.band_lo, s.band_hi, s.skipped
        );
    }
    let mut table = Table::create(a.out.as_deref(), POWER_HEADER)?;
    for s in &summaries {
        table.row(power_row(&name, s))?;
    }
    table.finish()?;
    if let Some(path) = &a.records {
        let mut table = Table::create(Some(path), RECORD_HEADER)?;
        for s in &summaries {
            for row in record_rows(&name, s) {
                table.row(row)?;
            }
        }
        table.finish()?;
    }
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write to standard output: {e}"))),
    }
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let loaded = a.graph.load()?;
    let g = &loaded.graph;
    if g.edge_count() == 0 {
        eprintln!("warning: the graph has no edges, every estimated probability is zero");
    }
    let fitted = model::fit(g, a.model, a.eps);
    if let FittedModel::Ermm(m) = &fitted {
        let sizes = m.group_sizes();
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            eprintln!("warning: group {} has no vertices, its block entries are set to zero", empty + 1);
        }
    }
    let file = ParamFile::new(fitted);
    write_text(a.out.as_deref(), &file.to_toml()?)
}

fn kv(table: &mut Table, key: &str, value: String) -> CliResult<()> {
    eprintln!("{key} = {value}");
    table.row([CSV_SCHEMA_VERSION.to_string(), key.to_string(), value])
}

pub fn diagnostics(a: &DiagnosticsArgs) -> CliResult<()> {
    let kernel = KernelSpec::parse(&a.kernel)?;
    let spec = ModelSpec::parse(&a.model)?;
    let resolved = model::resolve(&spec, None, a.n)?;
    let p = &resolved.p;
    let mut table = Table::create(a.out.as_deref(), &["schema_version", "quantity", "value"])?;
    let n0 = p.as_slice().iter().filter(|&&q| q > 0.0 && q < 1.0).count();
    kv(&mut table, "n", p.n().to_string())?;
    kv(&mut table, "pairs", p.len().to_string())?;
    kv(&mut table, "n0", n0.to_string())?;
    kv(&mut table, "kernel", kernel.label())?;

    if kernel.product_gap().is_some() {
        let off = analytic_offdiag_mean(p, &kernel)?;
        let diag = analytic_diag_mean(p, &kernel)?;
        kv(&mut table, "analytic_offdiag_mean", sci(off))?;
        kv(&mut table, "analytic_diag_mean", sci(diag))?;
        kv(&mut table, "analytic_mean", sci(off + diag))?;
        let bound = variance_lower_bound(p, &kernel)?;
        kv(&mut table, "variance_lower_bound", sci(bound.value))?;
        match theorem_bound(p, &kernel) {
            Ok(t) => {
                kv(&mut table, "d0", sci(t.d0))?;
                kv(&mut table, "sigma2", sci(t.sigma2))?;
                kv(&mut table, "sigma2_is_lower_bound", t.sigma2_is_lower_bound.to_string())?;
                kv(&mut table, "c_n", sci(t.c_n))?;
                kv(&mut table, "c1", sci(t.c1))?;
                kv(&mut table, "wasserstein_bound", sci(t.wasserstein_bound))?;
                kv(&mut table, "main_text_bound", sci(t.main_text_bound))?;
            }
            Err(e) => eprintln!("note: normal approximation bound unavailable, {e}"),
        }
        if p.len() <= MAX_EXHAUSTIVE_PAIRS {
            let exact = exhaustive_moments(p, &kernel)?;
            kv(&mut table, "exhaustive_mean", sci(exact.mean))?;
            kv(&mut table, "exhaustive_variance", sci(exact.variance))?;
            kv(&mut table, "mean_gap", sci((off + diag - exact.mean).abs()))?;
        }
    } else {
        eprintln!("note: {} is not a product kernel, bounds skipped", kernel.label());
        if p.len() <= MAX_EXHAUSTIVE_PAIRS {
            let exact = exhaustive_moments(p, &kernel)?;
            kv(&mut table, "exhaustive_mean", sci(exact.mean))?;
            kv(&mut table, "exhaustive_variance", sci(exact.variance))?;
        }
    }

    if let Some(other) = &a.compare {
        let other = model::resolve(&ModelSpec::parse(other)?, None, Some(p.n()))?;
        let delta = match a.delta.as_str() {
            "triangle" => triangle_proportion_delta(p.n()),
            s => s.parse().map_err(|_| CliError::input(format!("--delta `{s}`: expected a number or `triangle`")))?,
        };
        let total = discrepancy_bound(p, &other.p, 1.0)?;
        kv(&mut table, "total_abs_difference", sci(total))?;
        kv(&mut table, "delta", sci(delta))?;
        kv(&mut table, "discrepancy_bound", sci(discrepancy_bound(p, &other.p, delta)?))?;
    }
    table.finish()
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let spec = ModelSpec::parse(&a.model)?;
    let g = match spec {
        ModelSpec::Nlpa { m, alpha } => {
            let n = a.n.ok_or_else(|| CliError::input("nlpa needs --n"))?;
            nlpa_sample(n, NlpaParams::new(m, alpha), &mut stream(a.seed, &[]))?
        }
        _ => {
            let resolved = model::resolve(&spec, None, a.n)?;
            let g = irg_sample(&resolved.p, a.seed);
            match resolved.labels {
                Some(l) => g.with_labels(l)?,
                None => g,
            }
        }
    };
    eprintln!("{} vertices, {} edges", g.n(), g.edge_count());
    write_text(a.out.as_deref(), &format_edge_list(&g))?;
    if let Some(path) = &a.labels_out {
        write_text(Some(path), &format_labels(&g))?;
    }
    Ok(())
}

pub fn plant(a: &PlantArgs) -> CliResult<()> {
    let loaded = a.graph.load()?;
    let g = &loaded.graph;
    let outcome = match a.kind {
        PlantKind::Clique => plant_clique(g, a.size, a.max_rep, a.seed)?,
        PlantKind::Hubs => {
            let opts = HubOptions { target: a.hub_target.into(), ..HubOptions::default() };
            plant_hubs_with(g, a.rounds, a.scale, opts, &mut stream(a.seed, &[]))?
        }
    };
    let vertices: Vec<String> = outcome.vertices.iter().map(|v| (v + 1).to_string()).collect();
    match outcome.skipped_reason {
        Some(reason) if !outcome.planted => {
            eprintln!("not planted after {} attempts: {}", outcome.attempts, reason.as_str())
        }
        _ => eprintln!(
            "planted on vertices {} after {} attempts; {} edges before and after",
            vertices.join(" "),
            outcome.attempts,
            g.edge_count()
        ),
    }
    write_text(a.out.as_deref(), &format_edge_list(&outcome.graph))?;
    if let Some(path) = &a.labels_out {
        write_text(Some(path), &format_labels(&outcome.graph))?;
    }
    Ok(())
}
