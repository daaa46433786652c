mod commands;
mod config;
mod error;
mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use irg_gkss::plant::HubTarget;

use crate::error::CliError;
use crate::model::{FitKind, DEFAULT_EPS};

/// Kernel Stein goodness-of-fit tests for inhomogeneous random graph models.
#[derive(Debug, Parser)]
#[command(name = "irg-gkss", version)]
struct Cli {
    /// Worker threads for Monte Carlo replicates (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test the fit of a null model to an observed network.
    Test(TestArgs),
    /// Run a calibration or power experiment from a configuration file or preset.
    Power(PowerArgs),
    /// Estimate model parameters from a network and write a parameter file.
    Fit(FitArgs),
    /// Report moment identities and approximation bounds for a model.
    Diagnostics(DiagnosticsArgs),
    /// Draw a network from a model.
    Simulate(SimulateArgs),
    /// Plant a clique or hubs into a network.
    Plant(PlantArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list with 1-based vertex ids, one pair per line.
    #[arg(long, conflicts_with = "dataset")]
    pub graph: Option<PathBuf>,
    /// Group labels, one positive integer per vertex and line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Bundled network instead of --graph.
    #[arg(long, value_enum)]
    pub dataset: Option<Dataset>,
    /// Number of vertices; inferred from the label file or the largest id when omitted.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dataset {
    Karate,
    Florentine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefitArg {
    None,
    Ermm,
    Dcsbm,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Null model: er:P, er-mle, ermm-mle, dcsbm-mle[:EPS] or params:PATH.
    #[arg(long)]
    pub model: String,
    /// Kernel: wl3, wl3n, graphlet3, graphlet3n, veh1, ...
    #[arg(long, default_value = "wl3")]
    pub kernel: String,
    /// Number of simulated null networks.
    #[arg(long = "M", default_value_t = 200)]
    pub null_size: usize,
    /// Number of vertex pairs sampled with replacement per statistic; all pairs when omitted.
    #[arg(long = "B")]
    pub resample: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-estimate the null probabilities on every simulated network.
    #[arg(long, value_enum, default_value_t = RefitArg::None)]
    pub refit: RefitArg,
    /// Add the generalised likelihood ratio test against the blockmodel on the labels.
    #[arg(long)]
    pub glr: bool,
    /// Add the bootstrap-corrected spectral test with this many bootstrap networks.
    #[arg(long)]
    pub spectral: Option<usize>,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Experiment configuration file.
    #[arg(conflicts_with_all = ["preset", "list_presets"])]
    pub config: Option<PathBuf>,
    /// Bundled configuration.
    #[arg(long)]
    pub preset: Option<String>,
    /// Print the bundled configuration names and exit.
    #[arg(long)]
    pub list_presets: bool,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of simulated null networks per test.
    #[arg(long = "M")]
    pub null_size: Option<usize>,
    /// Override the number of repetitions per setting.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Summary CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-repetition CSV.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub model: FitKind,
    /// Constant added to every degree-corrected block entry.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Parameter file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    /// Model: er:P (with --n) or params:PATH.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "veh1")]
    pub kernel: String,
    /// Second model for the discrepancy bound.
    #[arg(long)]
    pub compare: Option<String>,
    /// Lipschitz constant of the test function: a number or `triangle`.
    #[arg(long, default_value = "triangle")]
    pub delta: String,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model: er:P, params:PATH or nlpa:M:ALPHA.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlantKind {
    Clique,
    Hubs,
}

#[derive(Debug, Args)]
pub struct PlantArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub kind: PlantKind,
    /// Clique size.
    #[arg(long, default_value_t = 6)]
    pub size: usize,
    /// Clique placement attempts before giving up.
    #[arg(long, default_value_t = 100)]
    pub max_rep: usize,
    /// Number of hubs to plant.
    #[arg(long, default_value_t = 2)]
    pub rounds: usize,
    /// Degree scale factor of each hub.
    #[arg(long, default_value_t = 3.0)]
    pub scale: f64,
    #[arg(long, value_enum, default_value_t = HubTargetArg::Absolute)]
    pub hub_target: HubTargetArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HubTargetArg {
    Absolute,
    Increment,
}

impl From<HubTargetArg> for HubTarget {
    fn from(t: HubTargetArg) -> Self {
        match t {
            HubTargetArg::Absolute => HubTarget::Absolute,
            HubTargetArg::Increment => HubTarget::Increment,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result: Result<(), CliError> = pool.install(|| match cli.command {
        Command::Test(a) => commands::test(&a),
        Command::Power(a) => commands::power(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Diagnostics(a) => commands::diagnostics(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Plant(a) => commands::plant(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
