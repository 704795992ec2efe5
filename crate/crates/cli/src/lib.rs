//! The `permcover` command line.
//!
//! Every subcommand resolves its configuration (flags, then `PERMCOVER_*`
//! environment variables, then defaults), runs on a rayon pool of the
//! requested size and emits one machine-readable payload. JSON payloads
//! carry a `meta` object with the tool version, the resolved configuration,
//! a timestamp, the wall time and any warnings; CSV payloads get the same
//! object in a `<out>.meta.json` sidecar.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use permcover_core::{Error, Limits};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "permcover", version, about = "Coverings of S_n by (n+1)-permutations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "PERMCOVER_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[arg(long, global = true, env = "PERMCOVER_CACHE", default_value = permcover_core::cache::DEFAULT_CACHE_DIR)]
    pub cache_dir: PathBuf,
    /// Largest n for which the coverage graph may be built.
    #[arg(long, global = true, env = "PERMCOVER_MAX_N", default_value_t = Limits::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Largest n for exhaustive pair computations (audit, exact variance).
    #[arg(long, global = true, env = "PERMCOVER_PAIR_MAX_N", default_value_t = Limits::DEFAULT_PAIR_MAX_N)]
    pub pair_max_n: usize,
}

impl GlobalArgs {
    pub fn limits(&self) -> Limits {
        Limits {
            max_n: self.max_n,
            pair_max_n: self.pair_max_n.min(self.max_n),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Construct (and verify) a cover or λ-cover.
    Solve(SolveArgs),
    /// Build the coverage graph, check its identities, optionally audit pair overlaps.
    Graph(GraphArgs),
    /// Cover probability across a grid of p values (CSV).
    Threshold(ThresholdArgs),
    /// Distribution of the uncovered count against its Poisson reference.
    Gap(GapArgs),
    /// Analytic bounds per n, with the best cached certificate (CSV).
    Bounds(BoundsArgs),
    /// Repeated λ-cover constructions over consecutive seeds.
    Lambda(LambdaArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub lambda: u32,
    /// exact, greedy, alteration or lambda.
    #[arg(long, default_value = "greedy")]
    pub method: String,
    /// Seed for the randomized methods.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time budget for the exact solver.
    #[arg(long, default_value_t = 60.0)]
    pub budget_seconds: f64,
    /// Initial random selection size for the alteration method.
    #[arg(long)]
    pub initial_size: Option<u64>,
    /// Neither read nor write the certificate cache.
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: usize,
    /// Run the pairwise overlap audit.
    #[arg(long)]
    pub audit: bool,
    /// Audit this many sampled patterns instead of all (required above the pair budget).
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub pmin: f64,
    #[arg(long)]
    pub pmax: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("p_source").required(true).multiple(false)))]
pub struct GapArgs {
    #[arg(long)]
    pub n: usize,
    /// Use p = (ln n − 1 + ½·ln n/n − K/n)/n with this K.
    #[arg(long = "K", allow_hyphen_values = true, group = "p_source")]
    pub k: Option<f64>,
    /// Use the p whose exact mean uncovered count is this value.
    #[arg(long, group = "p_source")]
    pub lambda_target: Option<f64>,
    #[arg(long, group = "p_source")]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub lambda: u32,
    /// Run the exact solver for rows with no cached certificate (n within --max-n).
    #[arg(long)]
    pub fill: bool,
    #[arg(long, default_value_t = 10.0)]
    pub budget_seconds: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: u32,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds to run.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceLimit { .. } => EXIT_RESOURCE,
            Error::InvalidInput(_) | Error::OutOfRange(_) | Error::UniverseMismatch { .. } => EXIT_USAGE,
            Error::Io(_) | Error::Json(_) => EXIT_VIOLATION,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cli.global.workers);
            return EXIT_RESOURCE;
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
