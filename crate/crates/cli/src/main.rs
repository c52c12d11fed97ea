//! `revivals`: recurrence times of driven power-law potentials from the
//! command line.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use commands::{CommandOutput, Format};
use config::{apply_overrides, load_document, ConfigError, ExperimentConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_NO_RECURRENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "revivals",
    version,
    about = "Classical periods and quantum revival times of driven power-law potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set drive.lambda=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write outputs and metadata.json here instead of printing to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// WKB (and optionally numerical) level energies and spacings.
    Spectrum(Common),
    /// Undriven and driven recurrence times.
    Times(Common),
    /// Mathieu characteristic value a_nu(q).
    Mathieu {
        #[arg(long, allow_hyphen_values = true)]
        nu: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        /// Fourier basis size; defaults to 2 ceil(|nu|) + 40.
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Propagate a wave packet and detect its recurrences.
    Evolve(Common),
    /// Repeat `times` or `evolve` over the values in the config's sweep section.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep points run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn document(common: &Common) -> anyhow::Result<Value> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut doc = load_document(path)?;
    apply_overrides(&mut doc, &common.overrides)?;
    Ok(doc)
}

fn emit(output: CommandOutput, out_dir: Option<&Path>) -> anyhow::Result<()> {
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for artifact in &output.artifacts {
                let path = dir.join(&artifact.name);
                std::fs::write(&path, &artifact.contents).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut meta = serde_json::to_vec_pretty(&Value::Object(output.metadata))?;
            meta.push(b'\n');
            std::fs::write(dir.join("metadata.json"), meta)?;
        }
        None => {
            let first = output.artifacts.first().context("command produced no output")?;
            std::io::stdout().lock().write_all(&first.contents)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (output, out_dir) = match cli.command {
        Command::Spectrum(c) => {
            let config = ExperimentConfig::from_document(&document(&c)?)?;
            (commands::spectrum(&config, c.format.unwrap_or(Format::Csv))?, c.out_dir)
        }
        Command::Times(c) => {
            let config = ExperimentConfig::from_document(&document(&c)?)?;
            (commands::times(&config, c.format.unwrap_or(Format::Json))?, c.out_dir)
        }
        Command::Mathieu {
            nu,
            q,
            basis,
            out_dir,
            format,
        } => (
            commands::mathieu(nu, q, basis, format.unwrap_or(Format::Json))?,
            out_dir,
        ),
        Command::Evolve(c) => {
            let config = ExperimentConfig::from_document(&document(&c)?)?;
            if c.format == Some(Format::Json) {
                return Err(ConfigError(
                    "evolve writes a CSV trajectory and a JSON report; --format does not apply".into(),
                )
                .into());
            }
            (commands::evolve(&config, c.out_dir.as_deref())?, c.out_dir)
        }
        Command::Sweep { common, jobs } => {
            if jobs == 0 {
                return Err(ConfigError("--jobs must be >= 1".into()).into());
            }
            let doc = document(&common)?;
            (
                commands::sweep(&doc, jobs, common.format.unwrap_or(Format::Csv))?,
                common.out_dir,
            )
        }
    };
    let no_recurrence = output.no_recurrence;
    emit(output, out_dir.as_deref())?;
    Ok(no_recurrence)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("no recurrence detected");
            ExitCode::from(EXIT_NO_RECURRENCE)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|e| e.is::<ConfigError>()) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
