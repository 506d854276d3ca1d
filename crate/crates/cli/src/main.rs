//! `revdiss` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid request, 2 numerical failure.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use commands::{
    Artifact, BandwidthArgs, ChiralityArgs, EigenArgs, EpFindArgs, FigureArgs, Numerical, Outcome, SmatrixArgs,
};
use config::{CommonArgs, Config};

#[derive(Debug, Parser)]
#[command(
    name = "revdiss",
    version,
    about = "Reversed-dissipation cavity optomechanics: spectra, EPs and scattering"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues at one parameter point, optionally with sheets or full-model branches.
    Eigen(EigenArgs),
    /// Transmission curves for selected port pairs.
    Smatrix(SmatrixArgs),
    /// Locate exceptional points in a (theta, J/G) box.
    EpFind(EpFindArgs),
    /// Chirality against the coupling phase.
    Chirality(ChiralityArgs),
    /// Nonreciprocal difference curves and their widths.
    Bandwidth(BandwidthArgs),
    /// Regenerate a figure dataset.
    Figure(FigureArgs),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = match &cli.common.config {
        Some(path) => config::load_config(path)?,
        None => Config::default(),
    };
    let resolved = config::resolve(cfg, &cli.common)?;
    let outcome = match &cli.command {
        Command::Eigen(a) => commands::eigen(&resolved, a)?,
        Command::Smatrix(a) => commands::smatrix(&resolved, a)?,
        Command::EpFind(a) => commands::ep_find(&resolved, a)?,
        Command::Chirality(a) => commands::chirality_cmd(&resolved, a)?,
        Command::Bandwidth(a) => commands::bandwidth(&resolved, a)?,
        Command::Figure(a) => commands::figure(a)?,
    };
    write_outcome(&resolved.out_dir, outcome)
}

/// Nothing touches the disk until the command has fully succeeded.
fn write_outcome(dir: &Path, outcome: Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for artifact in &outcome.artifacts {
        match artifact {
            Artifact::Data(ds) => {
                let (csv, meta) = ds
                    .write_files(dir)
                    .with_context(|| format!("writing dataset {}", ds.id))?;
                log::info!("wrote {} and {}", csv.display(), meta.display());
            }
            Artifact::Json { name, value } => {
                let path = dir.join(name);
                let mut text = serde_json::to_string_pretty(value)?;
                text.push('\n');
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                log::info!("wrote {}", path.display());
            }
            Artifact::Text { name, text } => {
                let path = dir.join(name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                log::info!("wrote {}", path.display());
            }
        }
    }
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &outcome.summary)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<Numerical>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
