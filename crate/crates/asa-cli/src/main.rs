//! `asa` — learn, run, evaluate, and export symbolic-automaton classifiers
//! over multivariate symbolic sequences.
//!
//! Every subcommand reads its settings from an optional `--config` TOML
//! file overridden field-by-field by flags, writes a manifest next to its
//! outputs, and prints one JSON summary object to stdout. Exit codes:
//! 0 success, 1 validation/data error, 2 configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "asa",
    version,
    about = "Symbolic-automaton pattern learning over labeled symbolic sequences"
)]
struct Cli {
    /// TOML config file; flags override its values field by field.
    #[arg(long, global = true, value_name = "TOML")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discretize real-valued series into symbolic sequences (PAA + binning).
    Discretize(commands::DiscretizeArgs),
    /// Learn an automaton from the whole dataset at once.
    LearnBatch(commands::LearnBatchArgs),
    /// Learn an automaton incrementally, revising over mini-batches.
    LearnIncr(commands::LearnIncrArgs),
    /// Run a saved automaton over sequences and write predictions.
    Run(commands::RunArgs),
    /// Cross-validate a learner and write the evaluation report.
    Eval(commands::EvalArgs),
    /// Export the dataset and search space as an ASP optimization program.
    ExportAsp(commands::ExportAspArgs),
    /// Sample a labeled dataset from a planted ground-truth automaton.
    Generate(commands::GenerateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<asa_core::Error>()
                .map_or(1, |e| e.exit_code());
            ExitCode::from(code.clamp(0, 255) as u8)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    init_workers()?;
    let file = config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Discretize(a) => commands::discretize(&file, a),
        Command::LearnBatch(a) => commands::learn_batch(&file, a),
        Command::LearnIncr(a) => commands::learn_incr(&file, a),
        Command::Run(a) => commands::run(&file, a),
        Command::Eval(a) => commands::eval_cmd(&file, a),
        Command::ExportAsp(a) => commands::export_asp(&file, a),
        Command::Generate(a) => commands::generate(&file, a),
    }
}

/// Size the global worker pool (parallel folds, parallel restarts) from
/// ASA_WORKERS; all cores when unset.
fn init_workers() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("ASA_WORKERS") else {
        return Ok(());
    };
    let n = v
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            asa_core::Error::Config(format!("ASA_WORKERS must be a positive integer, got {v:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| asa_core::Error::Config(format!("worker pool: {e}")))?;
    Ok(())
}
