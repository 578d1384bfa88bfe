//! `pfsm`: signal generation, plant simulation, identification and Bode data
//! for dual-axis piezoelectric fast-steering mirrors.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage, 3 domain/range,
//! 4 data format, 5 I/O.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfsm_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    At { path: String, source: Error },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) | CliError::At { source: e, .. } => match e {
                Error::Parameter { .. } | Error::Config(_) | Error::UnsupportedVariant(_) => 2,
                Error::Domain { .. }
                | Error::DegenerateRange(_)
                | Error::UndefinedMetric(_)
                | Error::Alignment(_)
                | Error::PoleAtOrigin => 3,
                Error::Format { .. } | Error::Json(_) => 4,
                Error::Io(_) => 5,
                Error::Numeric { .. } | Error::Fit(_) => 1,
            },
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "pfsm",
    version,
    about = "Piezoelectric fast-steering mirror modelling and identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an excitation signal as a `t,value` CSV.
    Gen(GenArgs),
    /// Run drive signals through a plant model.
    Simulate(SimulateArgs),
    /// Identify a model from a dataset manifest.
    Identify(IdentifyArgs),
    /// Score a model on the held-out records of a dataset.
    Eval(EvalArgs),
    /// Frequency response of one model channel.
    Bode(BodeArgs),
    /// Simulate an identification dataset from the reference plant.
    SynthesizeDataset(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    ModulatedSine,
    Square,
    Chirp,
    Multisine,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Defaults to 50 V.
    #[arg(long)]
    offset: Option<f64>,
    /// Defaults to 40 V (30 V for a square wave).
    #[arg(long)]
    amp: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    carrier: f64,
    #[arg(long, default_value_t = 0.25)]
    env: f64,
    #[arg(long, default_value_t = 80.0)]
    period: f64,
    #[arg(long, default_value_t = 1.0)]
    f0: f64,
    #[arg(long, default_value_t = 2000.0)]
    f1: f64,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phase0: f64,
    /// Multisine term `amp:freq[:phase[:sin|cos]]`; repeatable.
    #[arg(long = "term", allow_hyphen_values = true)]
    terms: Vec<String>,
    #[arg(long)]
    dur: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelSource {
    /// Model JSON (pfsm-model-v1).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use the built-in reference plant.
    #[arg(long)]
    reference: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Unit {
    Drive,
    Command,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    source: ModelSource,
    /// X drive as `t,value` CSV; a missing axis is held at mid-range.
    #[arg(long)]
    ux: Option<PathBuf>,
    #[arg(long)]
    uy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Unit::Drive)]
    unit: Unit,
    /// Measured θX to score against.
    #[arg(long)]
    ref_x: Option<PathBuf>,
    #[arg(long)]
    ref_y: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Classic,
    AsymmetricSign,
    Improved,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Improved)]
    variant: VariantArg,
    #[arg(long, default_value_t = 3)]
    creep_order: usize,
    /// Joint hysteresis/creep refinement passes after the staged fits.
    #[arg(long, default_value_t = 2)]
    refine_passes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long)]
    manifest: PathBuf,
    /// Also write the scores as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    Xx,
    Xy,
    Yy,
    Yx,
    #[value(name = "crp_x")]
    CrpX,
    #[value(name = "crp_y")]
    CrpY,
}

#[derive(Debug, Args)]
pub struct BodeArgs {
    #[command(flatten)]
    source: ModelSource,
    #[arg(long, value_enum)]
    channel: Channel,
    #[arg(long, default_value_t = 1.0)]
    fmin: f64,
    #[arg(long, default_value_t = 2000.0)]
    fmax: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Sensor SNR in dB; omit for noiseless records.
    #[arg(long)]
    noise_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60.0)]
    chirp_duration: f64,
    #[arg(long, default_value_t = 5.0)]
    carrier: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Identify(a) => commands::identify(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bode(a) => commands::bode(a),
        Command::SynthesizeDataset(a) => commands::synthesize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
