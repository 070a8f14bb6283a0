//! The `setchain` command line.
//!
//! Subcommands: `sample`, `exact`, `diagnose`, `bounds` and `experiment`.
//! Exit status is 0 on success, 1 for configuration errors and 2 for
//! failures after the inputs were accepted.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod traces;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "setchain", version, about = "Markov chain sampling of constrained subset distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run chains and write one trace CSV per chain.
    Sample(commands::SampleArgs),
    /// Exact answers by enumeration (small ground sets only).
    Exact(commands::ExactArgs),
    /// PSRF and running estimates from a trace directory.
    Diagnose(commands::DiagnoseArgs),
    /// Evaluate a closed-form mixing-time bound.
    Bounds(commands::BoundsArgs),
    /// Run a named experiment preset.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// ising-partition, dpp-size-sweep or mix-vs-adddelete
    preset: presets::Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    chains: usize,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Sample(a) => commands::sample(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Diagnose(a) => commands::diagnose(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Experiment(a) => {
            let name = match a.preset {
                presets::Preset::IsingPartition => "ising-partition",
                presets::Preset::DppSizeSweep => "dpp-size-sweep",
                presets::Preset::MixVsAddDelete => "mix-vs-adddelete",
            };
            let out = a.out.unwrap_or_else(|| config::default_output_dir().join(name));
            let opts = presets::PresetOptions { seed: a.seed, chains: a.chains, steps: a.steps };
            presets::run_preset(a.preset, &opts, &out)
        }
    }
}

/// Runs the command line on `args` (including the program name), printing
/// results to stdout and errors to stderr. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Like [`run`] but returns the output instead of printing it.
pub fn run_captured<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    dispatch(cli)
}
