//! `bevid train`, `evaluate`, `classify` and `experiment`.

use crate::common::{self, Global};
use anyhow::{bail, Context, Result};
use bevid_core::classify::{
    evaluate, predict, stratified_split, train_forest, train_mlp, ForestHyper, MlpHyper,
    TrainedModel,
};
use bevid_core::experiment::{run_experiment, ExperimentConfig};
use bevid_core::features::{
    build_variant_matrix, reduce_to_band, row_for_columns, DatasetVariant, FeatureMatrix,
};
use bevid_core::io::{read_dataset, read_spectrum_csv};
use bevid_core::registry::LabelRegistry;
use clap::Args;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Shared input selection: a dataset CSV (+variant, optionally reduced) or a
/// feature-matrix JSON written by `reduce`.
#[derive(Debug, Args)]
pub struct FeatureInput {
    /// Dataset CSV (manifest expected next to it).
    #[arg(long, conflicts_with = "features")]
    pub dataset: Option<PathBuf>,
    /// Feature kinds as a dataset variant: A, B, C or D.
    #[arg(long, default_value = "A")]
    pub variant: DatasetVariant,
    /// Reduce to the low-frequency band before use.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, default_value_t = 100.0)]
    pub f_lo: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub f_hi: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Feature-matrix JSON (from `reduce`).
    #[arg(long)]
    pub features: Option<PathBuf>,
}

impl FeatureInput {
    fn load(&self) -> Result<FeatureMatrix> {
        match (&self.dataset, &self.features) {
            (Some(csv), None) => {
                let (dataset, _) = read_dataset(csv)?;
                let full = build_variant_matrix(&dataset, self.variant)?;
                if self.reduced {
                    Ok(reduce_to_band(&full, self.f_lo, self.f_hi, self.n)?)
                } else {
                    Ok(full)
                }
            }
            (None, Some(path)) => {
                let fm: FeatureMatrix = common::read_json(path)?;
                Ok(fm)
            }
            _ => bail!("exactly one of --dataset or --features is required"),
        }
    }

    fn argv(&self) -> Vec<String> {
        let mut argv = Vec::new();
        if let Some(d) = &self.dataset {
            argv.extend([
                "--dataset".into(),
                d.display().to_string(),
                "--variant".into(),
                self.variant.to_string(),
            ]);
            if self.reduced {
                argv.extend([
                    "--reduced".into(),
                    "--f-lo".into(),
                    self.f_lo.to_string(),
                    "--f-hi".into(),
                    self.f_hi.to_string(),
                    "--n".into(),
                    self.n.to_string(),
                ]);
            }
        }
        if let Some(f) = &self.features {
            argv.extend(["--features".into(), f.display().to_string()]);
        }
        argv
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "dataset": self.dataset,
            "variant": self.variant,
            "reduced": self.reduced,
            "band": [self.f_lo, self.f_hi],
            "n": self.n,
            "features": self.features,
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: FeatureInput,
    /// rf (random forest) or dnn (dense net).
    #[arg(long, default_value = "rf")]
    pub model: String,
    /// Held-out fraction (stratified); 0 trains on everything.
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Comma-separated hidden layer sizes for dnn.
    #[arg(long, default_value = "64,32")]
    pub hidden: String,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    /// Output model JSON.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Where to store the held-out rows (feature-matrix JSON).
    #[arg(long, default_value = "test-features.json")]
    pub test_out: PathBuf,
}

fn parse_hidden(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().context("hidden layer sizes must be integers"))
        .collect()
}

pub fn run_train(args: &TrainArgs, global: &Global) -> Result<serde_json::Value> {
    let fm = args.input.load()?;
    let (train, test) = if args.test_fraction > 0.0 {
        let (tr, te) = stratified_split(&fm, args.test_fraction, global.seed)?;
        (tr, Some(te))
    } else {
        (fm, None)
    };
    let train_rows = train.rows();
    let test_rows = test.as_ref().map(|t| t.rows());

    let model: TrainedModel = match args.model.as_str() {
        "rf" => train_forest(
            &train,
            &ForestHyper {
                n_trees: args.trees,
                max_depth: args.max_depth,
                seed: global.seed,
                ..ForestHyper::default()
            },
        )?,
        "dnn" => train_mlp(
            &train,
            &MlpHyper {
                hidden_layers: parse_hidden(&args.hidden)?,
                epochs: args.epochs,
                learning_rate: args.learning_rate,
                seed: global.seed,
                ..MlpHyper::default()
            },
        )?,
        other => bail!("unknown model `{other}` (expected rf or dnn)"),
    };

    let out = global.out_path(&args.out);
    common::write_json(&out, &model)?;
    let mut test_path = None;
    if let Some(test) = &test {
        let path = global.out_path(&args.test_out);
        common::write_json(&path, test)?;
        test_path = Some(path);
    }

    let mut argv = vec!["train".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend(args.input.argv());
    argv.extend([
        "--model".into(),
        args.model.clone(),
        "--test-fraction".into(),
        args.test_fraction.to_string(),
        "--trees".into(),
        args.trees.to_string(),
        "--hidden".into(),
        args.hidden.clone(),
        "--epochs".into(),
        args.epochs.to_string(),
        "--learning-rate".into(),
        args.learning_rate.to_string(),
        "--out".into(),
        args.out.display().to_string(),
        "--test-out".into(),
        args.test_out.display().to_string(),
    ]);
    if let Some(d) = args.max_depth {
        argv.extend(["--max-depth".into(), d.to_string()]);
    }
    common::write_echo(
        global,
        "train",
        json!({
            "input": args.input.echo(),
            "model": args.model,
            "test_fraction": args.test_fraction,
            "hyper": model.hyper_echo(),
            "out": out,
            "test_out": test_path,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "train",
        "model": args.model,
        "classes": model.classes.len(),
        "train_rows": train_rows,
        "test_rows": test_rows,
        "out": out,
        "test_out": test_path,
    }))
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: FeatureInput,
    /// Output report JSON.
    #[arg(long, default_value = "eval.json")]
    pub out: PathBuf,
}

pub fn run_evaluate(args: &EvaluateArgs, global: &Global) -> Result<serde_json::Value> {
    let model: TrainedModel = common::read_json(&args.model)?;
    model.check_schema()?;
    let fm = args.input.load()?;
    let report = evaluate(&model, &fm)?;

    let out = global.out_path(&args.out);
    common::write_json(&out, &report)?;

    let mut argv = vec!["evaluate".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend(["--model".into(), args.model.display().to_string()]);
    argv.extend(args.input.argv());
    argv.extend(["--out".into(), args.out.display().to_string()]);
    common::write_echo(
        global,
        "evaluate",
        json!({
            "model": args.model,
            "input": args.input.echo(),
            "out": out,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "evaluate",
        "accuracy": report.accuracy,
        "n_test": report.n_test,
        "out": out,
    }))
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Spectrum CSV (frequency_hz,re_ohm,im_ohm).
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Label registry JSON for display names (builtin table when omitted).
    #[arg(long)]
    pub registry: Option<PathBuf>,
}

pub fn run_classify(args: &ClassifyArgs, global: &Global) -> Result<serde_json::Value> {
    let model: TrainedModel = common::read_json(&args.model)?;
    model.check_schema()?;
    let spectrum = read_spectrum_csv(&args.spectrum)?;
    let row = row_for_columns(&model.col_meta, &spectrum)?;
    let (label, probabilities) = predict(&model, &row)?;

    let registry = match &args.registry {
        Some(path) => Some(common::read_json::<LabelRegistry>(path)?),
        None => Some(LabelRegistry::builtin()),
    };
    let label_name = registry
        .as_ref()
        .and_then(|r| r.name(label))
        .map(String::from);

    let mut argv = vec!["classify".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--model".into(),
        args.model.display().to_string(),
        "--spectrum".into(),
        args.spectrum.display().to_string(),
    ]);
    common::write_echo(
        global,
        "classify",
        json!({
            "model": args.model,
            "spectrum": args.spectrum,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "classify",
        "label": label,
        "label_name": label_name,
        "classes": model.classes,
        "probabilities": probabilities,
    }))
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Dataset CSV (manifest expected next to it).
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value = "64,32")]
    pub hidden: String,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 100.0)]
    pub f_lo: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub f_hi: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Output report JSON.
    #[arg(long, default_value = "experiment.json")]
    pub out: PathBuf,
    /// Output accuracy grid CSV.
    #[arg(long, default_value = "experiment-grid.csv")]
    pub grid_out: PathBuf,
}

pub fn run_experiment_cmd(args: &ExperimentArgs, global: &Global) -> Result<serde_json::Value> {
    let (dataset, _) = read_dataset(&args.dataset)?;
    let config = ExperimentConfig {
        seed: global.seed,
        test_fraction: args.test_fraction,
        band_lo_hz: args.f_lo,
        band_hi_hz: args.f_hi,
        band_points: args.n,
        forest: ForestHyper {
            n_trees: args.trees,
            ..ForestHyper::default()
        },
        mlp: MlpHyper {
            hidden_layers: parse_hidden(&args.hidden)?,
            epochs: args.epochs,
            ..MlpHyper::default()
        },
    };
    let report = run_experiment(&dataset, &config)?;

    let out = global.out_path(&args.out);
    common::write_json(&out, &report)?;

    let grid = report.accuracy_grid();
    let mut csv = String::from("features,RF-A,RF-B,RF-C,RF-D,DNN-C,DNN-D\n");
    for (row, name) in grid.iter().zip(["full", "reduced"]) {
        let _ = write!(csv, "{name}");
        for cell in row {
            let _ = write!(csv, ",{cell}");
        }
        csv.push('\n');
    }
    let grid_path = global.out_path(&args.grid_out);
    common::write_text(&grid_path, &csv)?;

    let mut argv = vec!["experiment".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--dataset".into(),
        args.dataset.display().to_string(),
        "--test-fraction".into(),
        args.test_fraction.to_string(),
        "--trees".into(),
        args.trees.to_string(),
        "--hidden".into(),
        args.hidden.clone(),
        "--epochs".into(),
        args.epochs.to_string(),
        "--f-lo".into(),
        args.f_lo.to_string(),
        "--f-hi".into(),
        args.f_hi.to_string(),
        "--n".into(),
        args.n.to_string(),
        "--out".into(),
        args.out.display().to_string(),
        "--grid-out".into(),
        args.grid_out.display().to_string(),
    ]);
    common::write_echo(
        global,
        "experiment",
        json!({
            "dataset": args.dataset,
            "config": &config,
            "out": out,
            "grid_out": grid_path,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "experiment",
        "cells": report.cells.len(),
        "grid": {
            "full": grid[0],
            "reduced": grid[1],
        },
        "out": out,
        "grid_out": grid_path,
    }))
}
