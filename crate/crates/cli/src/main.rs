//! `ope`: analytic reports, simulations, figure data, self-checks and
//! combination-lock instances from the command line.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ope_core::OpeError;

#[derive(Parser)]
#[command(name = "ope", version, about = "Off-policy evaluation: estimators, risk bounds and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form quantities and bounds of an instance at one sample size.
    Analytic {
        #[arg(long)]
        instance: PathBuf,
        /// Sample size.
        #[arg(short, long)]
        n: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo MSE curves for an instance.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// JSON simulation config (`sample_sizes`, `replications`, ...).
        #[arg(long)]
        config: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the full result as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Data behind the two simulation figures.
    Figure {
        experiment: Experiment,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
        /// Comma-separated action counts for `kscaling`.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
    },
    /// Self-check suites; exits with 1 if any check fails.
    Verify {
        /// Suites to run (all when omitted).
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Random instances per suite.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a combination-lock MDP as JSON.
    Locks {
        /// Number of states in the chain.
        #[arg(long)]
        states: usize,
        /// Behavior probability of the resetting action.
        #[arg(long, default_value_t = 0.5)]
        p_left: f64,
        #[arg(long, default_value_t = 1.0)]
        rmax: f64,
        /// Defaults to `states - 1`.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Comparison,
    Kscaling,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Model(OpeError),
    ChecksFailed,
}

impl From<OpeError> for CliError {
    fn from(e: OpeError) -> Self {
        match e {
            OpeError::InvalidConfig(_)
            | OpeError::InvalidPolicy(_)
            | OpeError::InvalidReward(_)
            | OpeError::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            other => CliError::Model(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analytic { instance, n, out } => commands::analytic(&instance, n, out.as_deref()),
        Command::Simulate {
            instance,
            config,
            out,
            seed,
            threads,
            json,
        } => commands::simulate(&instance, &config, &out, seed, threads, json.as_deref()),
        Command::Figure {
            experiment,
            out,
            seed,
            threads,
            replications,
            ks,
        } => commands::figure(experiment, &out, seed, threads, replications, ks),
        Command::Verify {
            suites,
            seed,
            instances,
            out,
        } => commands::verify(&suites, seed, instances, out.as_deref()),
        Command::Locks {
            states,
            p_left,
            rmax,
            horizon,
            out,
        } => commands::locks(states, p_left, rmax, horizon, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::ChecksFailed) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}
