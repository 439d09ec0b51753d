//! Command-line front end for the duopoly model: equilibrium reports,
//! trajectories, map iterates, parameter sweeps and certification runs.

pub mod commands;
pub mod config;
pub mod format;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

use crate::config::{ConfigError, RawConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("cannot write `{path}`: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) | CliError::Write { .. } => EXIT_CHECK_FAILED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rendered primary output, optional metadata for a sidecar, and the check verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub meta: Option<Value>,
    pub failed: bool,
}

impl Output {
    pub fn json(v: Value) -> Self {
        Output { body: format::to_text(&v), meta: None, failed: false }
    }

    pub fn with_meta(body: String, meta: Value) -> Self {
        Output { body, meta: Some(meta), failed: false }
    }
}

#[derive(Debug, Parser)]
#[command(name = "duopoly", version, about = "Conjectural-variation duopoly dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every randomized check; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Override one config entry; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Critical points, Jacobians, classification and the Liapunov constants.
    Equilibria,
    /// Integrate the continuous system; CSV `t,u,v` plus an events sidecar.
    Simulate,
    /// Parameter grid table.
    Sweep,
    /// Run the certification suites; exits 1 if any check fails.
    Verify,
    /// Iterate the discrete adjustment map; CSV `t,x,y`.
    Discrete,
}

impl Command {
    fn default_format(self) -> Format {
        match self {
            Command::Equilibria | Command::Verify => Format::Json,
            Command::Simulate | Command::Sweep | Command::Discrete => Format::Csv,
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    for pair in &cli.set {
        raw.apply_override(pair)?;
    }
    if let Some(seed) = cli.seed {
        raw.set_seed(seed);
    }
    Ok(RunConfig::from_raw(&raw)?)
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let cfg = load_config(cli)?;
    let format = cli.format.unwrap_or(cli.command.default_format());
    match cli.command {
        Command::Equilibria => commands::equilibria(&cfg, format),
        Command::Simulate => commands::simulate(&cfg, format),
        Command::Discrete => commands::discrete(&cfg, format),
        Command::Sweep => commands::sweep(&cfg, format),
        Command::Verify => {
            if format == Format::Csv {
                return Err(CliError::Usage("verify only writes JSON".into()));
            }
            let p = cfg.params()?;
            let (report, failed) = verify::report(&cfg, &p);
            Ok(Output { failed, ..Output::json(report) })
        }
    }
}

/// `traj.csv` → `traj.events.json` for trajectories, `<stem>.meta.json` otherwise.
pub fn sidecar_path(out: &Path, command: Command) -> PathBuf {
    let suffix = if command == Command::Simulate { "events.json" } else { "meta.json" };
    out.with_extension(suffix)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

/// Writes outputs and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|out| {
        match &cli.out {
            Some(path) => {
                write_file(path, &out.body)?;
                if let Some(meta) = &out.meta {
                    write_file(&sidecar_path(path, cli.command), &format::to_text(meta))?;
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(out.body.as_bytes())
                    .map_err(|source| CliError::Write { path: "stdout".into(), source })?;
                if let Some(meta) = &out.meta {
                    eprint!("{}", format::to_text(meta));
                }
            }
        }
        Ok(out.failed)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
