//! `logloss-lab`: command-line front end for logloss-core.
//!
//! Exit status is 0 on success, 1 when a verification check fails and 2 on
//! configuration or input errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "logloss-lab", version, about = "Minimax regret, covers and rate bounds for log-loss prediction")]
struct Cli {
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = "LOGLOSS_LAB_WORKERS")]
    workers: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid step for numerical checks
    #[arg(long, global = true)]
    resolution: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run from a JSON config written by --emit-config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the effective config to this path before running
    #[arg(long, global = true)]
    emit_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn load_config(cli: Cli) -> Result<(RunConfig, Option<PathBuf>), String> {
    let cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err("give either --config or a subcommand, not both".into()),
        (None, None) => return Err("no subcommand given; see --help".into()),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, Some(command)) => RunConfig {
            seed: cli.seed,
            workers: cli.workers,
            out: cli.out,
            resolution: cli.resolution,
            format: cli.format,
            command,
        },
    };
    Ok((cfg, cli.emit_config))
}

fn run(cli: Cli) -> Result<bool, String> {
    let (cfg, emit) = load_config(cli)?;
    if let Some(path) = emit {
        let text = serde_json::to_string_pretty(&cfg).map_err(|e| e.to_string())? + "\n";
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err("--workers must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| e.to_string())?;
    }
    let report = commands::dispatch(&cfg)?;
    output::write(&cfg, &report)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
