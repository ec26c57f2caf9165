use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use wgqed_cli::config::{parse_value, resolve as resolve_config, set_path, Command, ExperimentConfig};
use wgqed_cli::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "wgqed", version, about = "Waveguide QED with atomic Bragg mirrors")]
struct Cli {
    /// spectrum, cavity, dynamics, modes, transfer, sweep or figures
    command: String,

    /// Figure names for `figures` (default: all)
    names: Vec<String>,

    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: one per core)
    #[arg(long)]
    workers: Option<usize>,

    /// Override a config key, e.g. --set params.gamma_1d=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let command: Command = serde_json::from_value(parse_value(&cli.command))
        .map_err(|_| CliError::Config(format!("unknown command '{}'", cli.command)))?;
    let mut value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => serde_json::json!({}),
    };
    set_path(&mut value, "command", serde_json::to_value(command).expect("command serializes"))?;
    if !cli.names.is_empty() {
        if command != Command::Figures {
            return Err(CliError::Config(format!("unexpected arguments {:?}", cli.names)));
        }
        set_path(&mut value, "figures", serde_json::to_value(&cli.names).expect("names serialize"))?;
    }
    if let Some(out) = &cli.out {
        set_path(&mut value, "out", serde_json::Value::String(out.display().to_string()))?;
    }
    if let Some(n) = cli.workers {
        set_path(&mut value, "workers", n.into())?;
    }
    resolve_config(value, &cli.overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(&cli).and_then(|cfg| wgqed_cli::run(&cfg)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wgqed: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
