use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use deephazard::cli::{self, merge, parse_config, preset_base};
use deephazard::error::{HazardError, Result};

#[derive(Parser)]
#[command(name = "deephazard", version, about = "Interval neural networks for additive hazards with time-varying covariates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config for the subcommand; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset (see `deephazard presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from one of the six hazard models.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<u8>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        censoring: Option<f64>,
    },
    /// Fit interval networks and the baseline cumulative hazard.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        covariates: Option<PathBuf>,
        #[arg(long)]
        max_epochs: Option<usize>,
    },
    /// Predict monotone survival curves.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        covariates: Option<PathBuf>,
        #[arg(long)]
        outcomes: Option<PathBuf>,
    },
    /// Concordance, IMSPE and proportional-hazards diagnostics.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        imspe: Option<bool>,
    },
    /// List the named presets.
    Presets,
}

fn base_config(command: &str, common: &Common) -> Result<Value> {
    let mut value = match &common.preset {
        Some(name) => preset_base(command, name)?,
        None => json!({}),
    };
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| HazardError::InvalidInput(format!("{}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| HazardError::InvalidInput(format!("{}: {e}", path.display())))?;
        merge(&mut value, file);
    }
    Ok(value)
}

fn put<T: serde::Serialize>(value: &mut Value, path: &[&str], v: Option<T>) {
    let Some(v) = v else { return };
    let mut patch = serde_json::to_value(v).expect("plain value");
    for key in path.iter().rev() {
        patch = json!({ *key: patch });
    }
    merge(value, patch);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, model, n, censoring } => {
            let mut v = base_config("simulate", &common)?;
            put(&mut v, &["model"], model);
            put(&mut v, &["n"], n);
            put(&mut v, &["censoring"], censoring);
            put(&mut v, &["seed"], common.seed);
            cli::cmd_simulate(&parse_config(v)?, &common.out)
        }
        Command::Train { common, outcomes, covariates, max_epochs } => {
            let mut v = base_config("train", &common)?;
            put(&mut v, &["outcomes"], outcomes);
            put(&mut v, &["covariates"], covariates);
            put(&mut v, &["train", "max_epochs"], max_epochs);
            put(&mut v, &["train", "seed"], common.seed);
            cli::cmd_train(&parse_config(v)?, &common.out)
        }
        Command::Predict { common, model, covariates, outcomes } => {
            let mut v = base_config("predict", &common)?;
            put(&mut v, &["model"], model);
            put(&mut v, &["covariates"], covariates);
            put(&mut v, &["outcomes"], outcomes);
            cli::cmd_predict(&parse_config(v)?, &common.out)
        }
        Command::Evaluate { common, predictions, outcomes, truth, imspe } => {
            let mut v = base_config("evaluate", &common)?;
            put(&mut v, &["predictions"], predictions);
            put(&mut v, &["outcomes"], outcomes);
            put(&mut v, &["truth"], truth);
            put(&mut v, &["imspe"], imspe);
            cli::cmd_evaluate(&parse_config(v)?, &common.out)
        }
        Command::Presets => {
            for name in deephazard::presets::PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = run(Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(cli::exit_code(&result) as u8)
}
