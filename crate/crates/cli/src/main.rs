//! `cpplab` — command-line front end for the coalescent point process
//! laboratory: simulate random trees, evaluate their closed-form laws,
//! verify the two against each other, and export plots and data.
//!
//! Exit codes: 0 on success, 1 when a verification check fails or a run
//! aborts, 2 on configuration or usage errors.

mod config;
mod laws;
mod plot;
mod simulate;
mod study;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// A command failure, carrying the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or usage: exit code 2.
    Config(String),
    /// Runtime failure (simulation, IO, failed checks): exit code 1.
    Run(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Run(m) => m,
        }
    }
}

impl From<cpplab_core::Error> for Failure {
    fn from(e: cpplab_core::Error) -> Self {
        match e {
            cpplab_core::Error::InvalidInput(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Run(format!("serialization error: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "cpplab", version, about = "Coalescent point process laboratory")]
struct Cli {
    /// Cap the worker thread count (also honored via CPPLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// A coalescent point process with neutral mutations.
    Cpp,
    /// A birth-death genealogy run to a horizon.
    Bd,
    /// A clonal tree grown by grafting over an eta window.
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotStyle {
    /// Comb function: vertical teeth at the branching atoms.
    Comb,
    /// Allele frequency spectrum tail, empirical vs analytic.
    Spectrum,
    /// Empirical distribution overlays from a summary CSV.
    Cdf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random objects and write tree, mutation, and trajectory files.
    Simulate {
        /// What to simulate.
        #[arg(long, value_enum)]
        kind: SimKind,
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form laws for a configuration and print JSON.
    Analytics {
        #[arg(long)]
        config: PathBuf,
        /// Also write analytics.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites; exit 0 only if every check passes.
    Verify {
        /// Suite name, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
        /// Directory for the JSON/CSV reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a stored artifact as SVG with a companion CSV.
    Plot {
        /// Input artifact (tree JSON for comb/spectrum, summary CSV for cdf).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        style: PlotStyle,
        /// Model config for analytic overlays (spectrum style).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track a statistic across a decreasing resolution ladder.
    EpsilonStudy {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated strictly decreasing resolutions.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_ladder: Vec<f64>,
        /// Registered statistic to track.
        #[arg(long, default_value = "clonal-mass")]
        statistic: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn setup_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("CPPLAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            kind,
            config,
            seed,
            out,
        } => {
            let cfg = config::RunConfig::load(&config)?;
            simulate::run(kind, &cfg, cfg.seed(seed), &cfg.out_dir(out))
        }
        Command::Analytics { config, out } => {
            let cfg = config::RunConfig::load(&config)?;
            laws::run(&cfg, out.as_deref())
        }
        Command::Verify { suite, seed, out } => verify::run(&suite, seed, out.as_deref()),
        Command::Plot {
            input,
            style,
            config,
            out,
        } => {
            let cfg = config.map(|p| config::RunConfig::load(&p)).transpose()?;
            plot::run(&input, style, cfg.as_ref(), out.as_deref())
        }
        Command::EpsilonStudy {
            config,
            eps_ladder,
            statistic,
            seed,
            out,
        } => {
            let cfg = config::RunConfig::load(&config)?;
            study::run(
                &cfg,
                &statistic,
                cfg.seed(seed),
                &eps_ladder,
                &cfg.out_dir(out),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    setup_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
