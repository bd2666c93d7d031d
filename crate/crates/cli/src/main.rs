use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shuffle_dp_cli::{configure_workers, execute, CliResult, CommandKind, ExperimentConfig, Overrides};

/// Run, estimate and audit shuffle-model protocols.
#[derive(Parser, Debug)]
#[command(name = "shuffle-dp", version)]
struct Cli {
    /// Overrides the command named in the config file.
    #[arg(value_enum)]
    command: Option<CommandKind>,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&cli.overrides);
    if cli.command.is_some() {
        cfg.command = cli.command;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers()
        .and_then(|()| resolve(&cli))
        .and_then(|cfg| execute(&cfg))
        .and_then(|report| report.emit());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shuffle-dp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
