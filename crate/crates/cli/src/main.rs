//! `qpa`: exact security calculations for privacy amplification by
//! two-universal hashing.
//!
//! Exit codes: 0 when everything passed, 1 when a property check or bound
//! failed, 2 on usage, parse, or validation errors.

mod commands;
mod output;
mod scenario;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(qpa_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn usage(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

impl From<qpa_core::Error> for CliError {
    fn from(e: qpa_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "qpa",
    version,
    about = "Privacy amplification by two-universal hashing: exact security bounds, key rates, and randomized verification"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write results to this file instead of stdout
    #[arg(long, global = true, env = "QPA_OUT")]
    out: Option<PathBuf>,

    /// Output format for result tables
    #[arg(long, global = true, env = "QPA_FORMAT", value_enum, default_value = "csv")]
    format: Format,

    /// Override the scenario's RNG seed
    #[arg(long, global = true, env = "QPA_RNG_SEED")]
    rng_seed: Option<u64>,

    /// Maximum number of hash seeds enumerated for exact averages
    #[arg(long, global = true, env = "QPA_CAP_SEEDS", default_value_t = 1u64 << 24)]
    cap_seeds: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Security bounds, key length rule, and rate (no exact distance)
    Bound {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Bounds plus the exact hashed-key distance
    Exact {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Full reports across the scenario's sweep grid
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Asymptotic key rate of the scenario's source
    Rate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Smooth-entropy convergence of i.i.d. product states
    Aep {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Randomized verification of the crate's inequalities and identities
    VerifyLemmas {
        /// Trials per check
        #[arg(long, env = "QPA_TRIALS", default_value_t = 100)]
        trials: u32,
        /// Run a single named check
        #[arg(long)]
        check: Option<String>,
        /// Replay one dumped trial (a `.replay.json` file)
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Self-test: corrupt a bound and require the harness to catch it
        #[arg(long)]
        inject_failure: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Bound { scenario } => commands::bound(cli, scenario),
        Command::Exact { scenario } => commands::exact(cli, scenario),
        Command::Sweep { scenario } => commands::sweep(cli, scenario),
        Command::Rate { scenario } => commands::rate(cli, scenario),
        Command::Aep { scenario } => commands::aep(cli, scenario),
        Command::VerifyLemmas {
            trials,
            check,
            replay,
            inject_failure,
        } => commands::verify_lemmas(cli, *trials, check.as_deref(), replay.as_deref(), *inject_failure),
    }
}

impl Cli {
    /// Seed precedence: command line / environment, then scenario file.
    pub fn seed_for(&self, file: Option<&scenario::ScenarioFile>) -> u64 {
        self.rng_seed
            .or_else(|| file.and_then(|f| f.rng_seed))
            .unwrap_or(0)
    }

    pub fn cap_bits(&self) -> u64 {
        63 - self.cap_seeds.max(1).leading_zeros() as u64
    }

    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Directory where failure dumps land: next to the output file, or the
    /// working directory.
    pub fn dump_dir(&self) -> PathBuf {
        self.out
            .as_ref()
            .and_then(|p| p.parent().map(|d| d.to_path_buf()))
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
