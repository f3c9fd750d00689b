//! `anderson-clock`: runs one experiment from a TOML config and writes CSV/JSON
//! results to an output directory.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Serialize;

use commands::Command;
use config::Config;
use error::CliError;
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "anderson-clock", version, about = "Eigenvalue experiments for the decaying fat-tailed Anderson model")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "output")]
    out: PathBuf,
    /// Overrides `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.threads` (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: Command,
    version: &'a str,
    unix_time: u64,
    threads: usize,
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let mut config = Config::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.run.master_seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.run.threads = threads;
    }
    commands::resolve(&mut config, cli.command);
    commands::validate(&config, cli.command)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.threads)
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    let mut out = OutputDir::create(&cli.out)?;
    out.write_text("config.resolved.toml", &config.to_toml())?;
    let summary = pool.install(|| commands::run(&config, cli.command, &mut out));
    out.write_json(
        "metadata.json",
        &Metadata {
            command: cli.command,
            version: env!("CARGO_PKG_VERSION"),
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            threads: pool.current_num_threads(),
        },
    )?;
    let summary = summary?;
    Ok(format!("{summary} -> {} ({} files)", cli.out.display(), out.written().len()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
