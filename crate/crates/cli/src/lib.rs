//! `logiq` command line: simulate, predict, compare, fit and prep-check.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logiq::model::{ModelKind, T2Convention};
use logiq::noise::{Correlation, EngineKind, NoiseKind};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "logiq", version, about = "Logical-qubit dephasing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the encoded state and write observables as CSV.
    Simulate(CommonArgs),
    /// Write the closed-form curves as CSV.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Echo error of the |0_L> preparation; sets theta = 2 delta, phi = 0.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
    },
    /// Run two or more engines on one grid and report the largest deviations as JSON.
    Compare(CommonArgs),
    /// Fit a CSV of observables to the decay model and report JSON.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// CSV with at least the `t` column and the fitted observable columns.
        #[arg(long)]
        input: PathBuf,
        /// Columns to fit, e.g. `Rx,Rz,p`. Defaults to every modelled column.
        #[arg(long, value_delimiter = ',', value_parser = parse_observable)]
        observables: Vec<logiq::observables::Observable>,
    },
    /// Check the preparation circuits and their error expansion, as JSON.
    PrepCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.05,0.1,0.16,0.2")]
        deltas: Vec<f64>,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in code name (`three_qubit`, `grassl`, `grassl_dfs`; `physical` for predict).
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Engine, or a comma list for compare.
    #[arg(long, value_delimiter = ',', value_parser = parse_engine)]
    pub engine: Vec<EngineKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub correlation: Option<CorrelationArg>,
    #[arg(long, value_enum)]
    pub kind: Option<NoiseKindArg>,
    /// Closed form to use in predict and fit; defaults to the one matching the code.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// End of the time grid, in units of 1/gamma unless the config says otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub ntraj: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub t2_convention: Option<T2Arg>,
}

fn parse_engine(s: &str) -> Result<EngineKind, String> {
    s.parse().map_err(|e: logiq::Error| e.to_string())
}

fn parse_observable(s: &str) -> Result<logiq::observables::Observable, String> {
    logiq::observables::Observable::parse(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorrelationArg {
    Global,
    Local,
}

impl From<CorrelationArg> for Correlation {
    fn from(c: CorrelationArg) -> Self {
        match c {
            CorrelationArg::Global => Correlation::Global,
            CorrelationArg::Local => Correlation::Local,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseKindArg {
    Dephasing,
    AmplitudeDamping,
}

impl From<NoiseKindArg> for NoiseKind {
    fn from(k: NoiseKindArg) -> Self {
        match k {
            NoiseKindArg::Dephasing => NoiseKind::Dephasing,
            NoiseKindArg::AmplitudeDamping => NoiseKind::AmplitudeDamping,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Physical,
    ThreeQubit,
    Grassl,
    GrasslDfs,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Physical => ModelKind::Physical,
            ModelArg::ThreeQubit => ModelKind::ThreeQubit,
            ModelArg::Grassl => ModelKind::Grassl,
            ModelArg::GrasslDfs => ModelKind::GrasslDfs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum T2Arg {
    Main,
    Appendix,
}

impl From<T2Arg> for T2Convention {
    fn from(c: T2Arg) -> Self {
        match c {
            T2Arg::Main => T2Convention::Main,
            T2Arg::Appendix => T2Convention::Appendix,
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(common) => commands::simulate(&common),
        Command::Predict { common, delta } => commands::predict(&common, delta),
        Command::Compare(common) => commands::compare(&common),
        Command::Fit { common, input, observables } => commands::fit(&common, &input, &observables),
        Command::PrepCheck { common, deltas } => commands::prep_check(&common, &deltas),
    }
}
