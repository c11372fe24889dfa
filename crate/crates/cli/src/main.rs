//! bevid: simulate impedance sweeps for beverage classes, analyze frequency
//! importance, train and evaluate classifiers, fit circuit models, and
//! replay acquisition frame streams.

mod commands;
mod common;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "bevid", version, about)]
pub struct Cli {
    /// Master seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for outputs and config echoes.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Format of the one-line summary printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (or a single sweep with --circuit).
    Simulate(commands::simulate::SimulateArgs),
    /// Fit circuit parameters to a spectrum CSV.
    Fit(commands::fitcmd::FitArgs),
    /// SVD frequency-importance profiles per feature kind.
    Svd(commands::analyze::SvdArgs),
    /// Reduce a dataset's features to a low-frequency band.
    Reduce(commands::analyze::ReduceArgs),
    /// Train a classifier on a dataset or feature file.
    Train(commands::model::TrainArgs),
    /// Evaluate a trained model.
    Evaluate(commands::model::EvaluateArgs),
    /// Classify a single spectrum with a trained model.
    Classify(commands::model::ClassifyArgs),
    /// Run the full classifier × feature-set grid.
    Experiment(commands::model::ExperimentArgs),
    /// Serialize a dataset as an acquisition frame stream.
    Replay(commands::wire::ReplayArgs),
    /// Rebuild a dataset from a frame stream.
    Ingest(commands::wire::IngestArgs),
    /// Render an SVG chart (amplitude per class, or an importance profile).
    Plot(commands::plot::PlotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = common::Global {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        format: cli.format,
    };
    if let Err(e) = std::fs::create_dir_all(&global.out_dir) {
        return fail(&format!("cannot create out-dir: {e}"));
    }
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args, &global),
        Command::Fit(args) => commands::fitcmd::run(args, &global),
        Command::Svd(args) => commands::analyze::run_svd(args, &global),
        Command::Reduce(args) => commands::analyze::run_reduce(args, &global),
        Command::Train(args) => commands::model::run_train(args, &global),
        Command::Evaluate(args) => commands::model::run_evaluate(args, &global),
        Command::Classify(args) => commands::model::run_classify(args, &global),
        Command::Experiment(args) => commands::model::run_experiment_cmd(args, &global),
        Command::Replay(args) => commands::wire::run_replay(args, &global),
        Command::Ingest(args) => commands::wire::run_ingest(args, &global),
        Command::Plot(args) => commands::plot::run(args, &global),
    };
    match result {
        Ok(summary) => {
            match cli.format {
                OutputFormat::Json => println!("{summary}"),
                OutputFormat::Csv => println!("{}", common::summary_csv(&summary)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&format!("{e:#}")),
    }
}

/// Machine-readable error JSON on stderr, nonzero exit.
fn fail(message: &str) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "message": message } })
    );
    ExitCode::FAILURE
}
