//! `lcl`: command-line access to the cut-lemma checkers, threshold solvers
//! and samplers.
//!
//! Exit codes: 0 feasible or success, 1 a negative verdict, 2 usage, IO or
//! schema errors, 3 a cap was hit before a verdict.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lcl_core::Execution;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "lcl", version, about = "Local Cut Lemma checkers, solvers and samplers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Base seed for randomized subcommands.
    #[arg(long, global = true, env = "LCL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Feasibility tolerance.
    #[arg(long, global = true, env = "LCL_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    /// Iteration or resampling cap (each subcommand has its own default).
    #[arg(long, global = true, env = "LCL_CAP")]
    pub cap: Option<u64>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true, env = "LCL_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, env = "LCL_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "LCL_OUT")]
    pub out: Option<PathBuf>,
}

impl Global {
    pub fn exec(&self) -> Execution {
        if self.jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check or solve the cut condition on a digraph with a risk table.
    CheckLcl(commands::CheckLclArgs),
    /// Check the downward-closed family condition (bound mode).
    CheckFamily(commands::FileArgs),
    /// Check the lopsided local lemma; finds μ when none is given.
    CheckLll(commands::FileArgs),
    /// Scalar threshold solvers for the classical applications.
    Threshold(commands::ThresholdArgs),
    /// Expectation condition for choice functions, optionally with a search.
    Choice(commands::ChoiceArgs),
    /// Randomized samplers with independent verification.
    Sample(commands::SampleArgs),
    /// Validate a built-in cut model by enumeration.
    ValidateModel(commands::ValidateArgs),
    /// Greedy peeling certificate for critical hypergraphs.
    Peel(commands::PeelArgs),
}

fn configure_threads(jobs: usize) -> anyhow::Result<()> {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<output::Report> {
    configure_threads(cli.global.jobs)?;
    let g = &cli.global;
    match &cli.command {
        Command::CheckLcl(a) => commands::check_lcl(g, a),
        Command::CheckFamily(a) => commands::check_family(g, a),
        Command::CheckLll(a) => commands::check_lll(g, a),
        Command::Threshold(a) => commands::threshold(g, a),
        Command::Choice(a) => commands::choice(g, a),
        Command::Sample(a) => commands::sample(g, a),
        Command::ValidateModel(a) => commands::validate_model(g, a),
        Command::Peel(a) => commands::peel(g, a),
    }
}

fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<lcl_core::Error>() {
        Some(lcl_core::Error::CapExhausted { .. } | lcl_core::Error::EnumerationCap { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (format, out) = (cli.global.format, cli.global.out.clone());
    let result = run(cli).and_then(|r| output::emit(&r, format, out.as_deref()).map(|_| r.status));
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
