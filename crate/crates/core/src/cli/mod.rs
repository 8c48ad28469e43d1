//! Command-line harness.
//!
//! Exit status: 0 on success, 2 for usage and validation errors, 3 when a
//! computation is infeasible (caps, off-path states, undefined divergences).

mod commands;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::flow::PathMode;
use crate::schedule::AlphaSchedule;
use crate::space::DEFAULT_DENSE_CAP;

#[derive(Debug, Parser)]
#[command(
    name = "redi",
    version,
    about = "Exact laboratory for rectified discrete flow couplings"
)]
pub struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Largest d^n allowed for exact enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coupling file.
    Make(MakeArgs),
    /// Conditional total correlation of a coupling.
    Tc(TcArgs),
    /// Iterated rectification with a TC curve.
    Rectify(RectifyArgs),
    /// Generation quality of a coupling's sampler.
    Eval(EvalArgs),
    /// Sample the one-step factorized model of a coupling.
    Onestep(OnestepArgs),
    /// Dump raw sampler trajectories.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MakeKind {
    Independent,
    #[value(name = "fig1-pi0")]
    Fig1Pi0,
    #[value(name = "fig1-pi1")]
    Fig1Pi1,
    Masked,
    Random,
}

#[derive(Debug, Args)]
pub struct MakeArgs {
    pub kind: MakeKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub mask: Option<u32>,
    /// Mask interpolation ratio.
    #[arg(long, default_value_t = 0.3)]
    pub r: f64,
    /// Source law: `uniform` or a distribution file.
    #[arg(long, default_value = "uniform")]
    pub source: String,
    /// Target law: `uniform`, `fig1` or a distribution file.
    #[arg(long, default_value = "uniform")]
    pub target: String,
    /// Number of distinct pairs for `random`.
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Clone)]
pub struct PathArgs {
    /// `linear`, `cosine` or `power:<p>`.
    #[arg(long, default_value = "linear")]
    pub schedule: AlphaSchedule,
    /// `coordinatewise` or `holistic`.
    #[arg(long = "path", default_value = "coordinatewise")]
    pub mode: PathMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TcMethodArg {
    Exact,
    Plugin,
}

#[derive(Debug, Args)]
pub struct TcArgs {
    pub coupling: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, value_enum, default_value_t = TcMethodArg::Exact)]
    pub method: TcMethodArg,
    #[arg(long, default_value_t = 5000)]
    pub roots: usize,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub path: PathArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RectifyMethodArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct RectifyArgs {
    pub coupling: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = RectifyMethodArg::Exact)]
    pub method: RectifyMethodArg,
    #[arg(long, default_value_t = 50_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub path: PathArgs,
    #[arg(long, default_value = "redi_run")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub coupling: PathBuf,
    /// `coupling` (its own target marginal), `uniform`, `fig1` or a distribution file.
    #[arg(long, default_value = "coupling")]
    pub target: String,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SamplerArg::Exact)]
    pub sampler: SamplerArg,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub path: PathArgs,
}

#[derive(Debug, Args)]
pub struct OnestepArgs {
    pub coupling: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value = "coupling")]
    pub target: String,
    #[arg(long, default_value = "onestep_samples.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub coupling: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub path: PathArgs,
    #[arg(long, default_value = "trajectories.txt")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    if let Some(threads) = cli.threads {
        // A pool may already exist when embedded; the result is the same either way.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match commands::dispatch(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::CapExceeded { .. } = e {
                let hint = match cli.command {
                    Command::Rectify(_) => "rerun with --method sampled",
                    Command::Tc(_) => "rerun with --method plugin",
                    _ => "raise --dense-cap or shrink the instance",
                };
                eprintln!("hint: {hint}");
            }
            e.exit_code()
        }
    }
}
