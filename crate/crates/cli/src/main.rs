//! `mmjsr` command-line front end.
//!
//! Exit codes: 0 success or `yes`, 1 `no-at-horizon` (or a falsified
//! hourglass set), 2 input error, 3 budget exceeded (the partial report is
//! still printed), 4 `inconclusive`, 5 no saddle point.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmjsr::{NormKind, DEFAULT_BUDGET, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "mmjsr", version, about = "Joint, lower and minimax joint spectral radii of matrix-set pairs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Print a JSON report instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report (or the trajectory CSV) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampling and random adversaries.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Maximum leaf products per enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Disable branch-and-bound pruning.
    #[arg(long, global = true)]
    pub no_prune: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bracket the joint spectral radius of a square set.
    Jsr(RadiusArgs),
    /// Bracket the lower spectral radius of a square set.
    Lsr(RadiusArgs),
    /// Minimax radii of a pair, horizon by horizon.
    Minimax(RadiusArgs),
    /// Stability and stabilizability verdicts with certificates.
    Stabilize(StabilizeArgs),
    /// Hourglass-set tools.
    Hset(HsetArgs),
    /// Simulate the closed loop and write the trajectory as CSV.
    Simulate(SimulateArgs),
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    s.parse()
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    pub file: PathBuf,
    /// Set name (jsr, lsr) or pair name (minimax).
    pub name: String,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value = "row-sum", value_parser = parse_norm)]
    pub norm: NormKind,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Asymptotic,
    Uniform,
    PathDep,
    PathIndep,
}

#[derive(Args, Debug)]
pub struct StabilizeArgs {
    pub file: PathBuf,
    /// Pair name. `asymptotic` also accepts a set (uncontrolled system);
    /// `uniform` accepts a set, or a pair whose step products are all controlled.
    pub name: String,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long, default_value = "row-sum", value_parser = parse_norm)]
    pub norm: NormKind,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsetAction {
    Materialize,
    Falsify,
    Saddle,
    Exact,
}

#[derive(Args, Debug)]
pub struct HsetArgs {
    pub file: PathBuf,
    /// Hourglass spec or set name; a pair name for `saddle` and `exact`.
    pub name: String,
    #[arg(long, value_enum)]
    pub action: HsetAction,
    /// Random vectors tried by the falsifier.
    #[arg(long, default_value_t = mmjsr::hourglass::DEFAULT_SAMPLES)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub file: PathBuf,
    pub name: String,
    /// `none`, `periodic:0,1`, `greedy:K`, or a JSON report from `stabilize --json`.
    #[arg(long, default_value = "none")]
    pub controller: String,
    /// `worst-case-greedy`, `fixed:0,1`, `random` or `random:SEED`.
    #[arg(long, default_value = "worst-case-greedy")]
    pub adversary: String,
    /// Comma-separated initial state; all ones by default.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long, default_value = "row-sum", value_parser = parse_norm)]
    pub norm: NormKind,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    No = 1,
    Input = 2,
    Budget = 3,
    Inconclusive = 4,
    NoSaddle = 5,
}

impl From<&mmjsr::Error> for Exit {
    fn from(e: &mmjsr::Error) -> Self {
        match e {
            mmjsr::Error::BudgetExceeded { .. } => Exit::Budget,
            mmjsr::Error::NoSaddle { .. } => Exit::NoSaddle,
            mmjsr::Error::NotHourglass { .. } => Exit::No,
            _ => Exit::Input,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(Exit::Input as u8);
        }
    }
    let exit = match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<mmjsr::Error>() {
                Some(inner) => Exit::from(inner),
                None => Exit::Input,
            }
        }
    };
    ExitCode::from(exit as u8)
}
