//! Command-line front end for the `twfpd` library.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use twfpd::transform::SynthesisMode;
use twfpd::Orientation;

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::Options;
pub use config::parse_bank_config;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "twfpd", version, about = "Tight wavelet filter banks with prescribed directions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Bank configuration (JSON).
    #[arg(long, global = true)]
    pub bank: Option<PathBuf>,
    /// Input signal (PGM or TWS1), or a decomposition manifest for `synthesize`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output directory (output file for `synthesize`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Number of levels J; J + 1 analysis steps are run.
    #[arg(long, global = true, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Standard)]
    pub mode: ModeArg,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Overrides the spectral factor orientation of the config.
    #[arg(long, global = true, value_enum)]
    pub orientation: Option<OrientationArg>,
    /// Remove the given complementary mask (1-based) before running.
    #[arg(long, global = true)]
    pub drop_complementary: Option<usize>,
    /// Signal shape for `complexity`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,
    /// Filter tables cover the full bounding box, zeros included.
    #[arg(long, global = true)]
    pub dense: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Build the bank and dump every mask.
    Build,
    /// Check tightness and moments; exits 2 when the bank is not tight.
    Verify,
    /// Write one CSV per filter plus a metadata index.
    Table,
    /// Decompose a signal into per-subband TWS1 files and a manifest.
    Analyze,
    /// Reconstruct a signal from a decomposition manifest.
    Synthesize,
    /// Analyze, synthesize and report errors and multiply counts.
    Roundtrip,
    /// Report filter sizes and measured multiply counts of one cycle.
    Complexity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Standard,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Min,
    Max,
}

impl Cli {
    pub fn options(&self) -> Options {
        Options {
            bank: self.bank.clone(),
            input: self.input.clone(),
            output: self.output.clone(),
            levels: self.levels,
            mode: match self.mode {
                ModeArg::Standard => SynthesisMode::Standard,
                ModeArg::Lp => SynthesisMode::Lp,
            },
            tol: self.tol,
            orientation: self.orientation.map(|o| match o {
                OrientationArg::Min => Orientation::MinPhase,
                OrientationArg::Max => Orientation::MaxPhase,
            }),
            drop_complementary: self.drop_complementary,
            shape: self.shape.clone(),
            dense: self.dense,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let opts = cli.options();
    match cli.command {
        Command::Build => commands::cmd_build(&opts),
        Command::Verify => commands::cmd_verify(&opts),
        Command::Table => commands::cmd_table(&opts),
        Command::Analyze => commands::cmd_analyze(&opts),
        Command::Synthesize => commands::cmd_synthesize(&opts),
        Command::Roundtrip => commands::cmd_roundtrip(&opts),
        Command::Complexity => commands::cmd_complexity(&opts),
    }
}

/// Caps the global rayon pool at `TWFPD_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TWFPD_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Validation(format!("TWFPD_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("TWFPD_THREADS: {e}")))
}
