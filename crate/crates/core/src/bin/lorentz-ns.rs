//! `lorentz-ns`: run Lorentz-norm, singular-integral and Navier-Stokes
//! experiments from a TOML config.
//!
//! Exit codes: 0 when every invariant holds, 2 when at least one fails,
//! 1 on configuration, input or numerical errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lorentz_ns::harness::{run, Command, ExperimentConfig, RunOptions, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "lorentz-ns", version, about = "Lorentz norms and mild Navier-Stokes diagnostics")]
struct Cli {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for every random field (overrides `seed`).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Run independent diagnostics concurrently. Outputs are unchanged.
    #[arg(long, global = true)]
    parallel: bool,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Lorentz quasinorms and norms with the sandwich check.
    Norms {
        /// Field file (`.lnsf`); the configured initial data otherwise.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Riesz identities and truncated-kernel convergence.
    RieszCheck,
    /// Calderon-Zygmund decomposition over a sweep of heights.
    Cz {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Hardy inequalities over the built-in step-function family.
    Hardy,
    /// Solve the configured problem and run its trajectory diagnostics.
    Solve,
    /// Solve and check the energy equality and cross-energy identity.
    Energy,
    /// Gronwall weak-strong comparison of two trajectories.
    WeakStrong {
        /// Strong solution (`.lnst`); solved from the config when omitted.
        #[arg(long)]
        u: Option<PathBuf>,
        /// Comparison solution (`.lnst`); the perturbed solve when omitted.
        #[arg(long)]
        v: Option<PathBuf>,
    },
    /// Print the annotated configuration schema.
    PrintSchema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::PrintSchema => {
            print!("{SCHEMA}");
            return ExitCode::SUCCESS;
        }
        Sub::Norms { field } => Command::Norms { field },
        Sub::RieszCheck => Command::RieszCheck,
        Sub::Cz { field } => Command::Cz { field },
        Sub::Hardy => Command::Hardy,
        Sub::Solve => Command::Solve,
        Sub::Energy => Command::Energy,
        Sub::WeakStrong { u, v } => Command::WeakStrong { u, v },
    };
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| format!("{}: {e}", path.display())),
        None => Ok(ExperimentConfig::default()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let opts = RunOptions { out: cli.out, seed: cli.seed, parallel: cli.parallel };
    match run(&command, &config, &opts) {
        Ok(summary) => {
            for inv in &summary.invariants {
                let status = if inv.passed { "ok  " } else { "FAIL" };
                println!("{status} {} = {:e} ({} {:e})", inv.name, inv.value, inv.relation, inv.threshold);
            }
            for (name, value) in &summary.constants {
                println!("     {name} = {value:e}");
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
