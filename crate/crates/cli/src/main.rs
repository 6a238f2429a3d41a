//! `incompat`: evaluate incompatibility witnesses on assemblage files, run
//! the steering and instrument scans, locate zero-violation thresholds and
//! run the built-in self-test.
//!
//! Exit status: 0 when no violation is certified, 2 when a violation is
//! certified (`witness` only), 1 on any error.

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "incompat",
    version,
    about = "Convex-functional incompatibility witnesses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionalName {
    /// Skew information with the variance as roof (needs an observable).
    Wysi,
    /// ℓ2 coherence with the summed variance as roof (needs a basis).
    L2,
}

impl FunctionalName {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionalName::Wysi => "wysi",
            FunctionalName::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ContextArgs {
    /// JSON file holding a Hermitian matrix, used as the observable H.
    #[arg(long)]
    pub observable: Option<PathBuf>,
    /// JSON file holding a list of rank-one projectors.
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    /// |φ(θ)> with noisy Pauli measurements over (θ, w).
    Steering,
    /// Amplitude-damping instrument over (γ, w).
    Instrument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// ℓ2 witness at θ = π/4.
    Mn,
    /// Skew-information witness at θ = π/4.
    Mi,
    /// The steering-scan column of `--functional` at `--theta`.
    Scan,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a witness on an assemblage file and print the report as JSON.
    Witness {
        input: PathBuf,
        #[arg(long, value_enum)]
        functional: FunctionalName,
        #[command(flatten)]
        context: ContextArgs,
        /// Seed for the candidate search on measurement and instrument files.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a parameter scan and write CSV.
    Scan {
        #[arg(value_enum)]
        panel: Panel,
        /// Functionals to evaluate, one CSV column each (default: wysi and l2).
        #[arg(long, value_enum)]
        functional: Vec<FunctionalName>,
        #[command(flatten)]
        context: ContextArgs,
        /// θ range as a:b:n (steering panel), e.g. 0:pi/2:101.
        #[arg(long)]
        theta: Option<String>,
        /// w range as a:b:n.
        #[arg(long)]
        w: Option<String>,
        /// γ range as a:b:n (instrument panel).
        #[arg(long)]
        gamma: Option<String>,
        /// Accepted for reproducible pipelines; scans contain no randomness.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the zero-violation boundary in w by bisection.
    Threshold {
        #[arg(value_enum)]
        curve: Curve,
        /// Bisection tolerance on w.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Functional for the `scan` curve.
        #[arg(long, value_enum, default_value = "wysi")]
        functional: FunctionalName,
        /// θ for the `scan` curve (default π/4).
        #[arg(long)]
        theta: Option<String>,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
        /// Directory with ho.json, noisy_pauli_w0.json and nonhermitian.json
        /// replacing the embedded fixtures.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("INCOMPAT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            anyhow::anyhow!("INCOMPAT_THREADS must be a positive integer, got '{v}'")
        })?;
        incompat::par::set_max_threads(n).map_err(anyhow::Error::msg)?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Witness {
            input,
            functional,
            context,
            seed,
        } => commands::witness(&input, functional, &context, seed),
        Command::Scan {
            panel,
            functional,
            context,
            theta,
            w,
            gamma,
            seed: _,
            out,
        } => commands::scan(
            panel,
            &functional,
            &context,
            theta,
            w,
            gamma,
            out.as_deref(),
        ),
        Command::Threshold {
            curve,
            tol,
            functional,
            theta,
        } => commands::threshold(curve, tol, functional, theta),
        Command::Selftest {
            quick: _,
            full,
            fixtures,
        } => selftest::run(full, fixtures.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
