//! `bevid svd` and `bevid reduce`: frequency-importance profiles and
//! low-frequency band reduction.

use crate::common::{self, Global};
use anyhow::{Context, Result};
use bevid_core::features::{build_feature_matrix, build_variant_matrix, reduce_to_band, DatasetVariant};
use bevid_core::io::read_dataset;
use bevid_core::spectrum::FeatureKind;
use bevid_core::svd::importance_profile_with;
use clap::Args;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct SvdArgs {
    /// Dataset CSV (manifest expected next to it).
    #[arg(long)]
    pub dataset: PathBuf,
    /// One feature kind, or `all` for all four.
    #[arg(long, default_value = "all")]
    pub kind: String,
    /// Skip column mean-centering before the decomposition.
    #[arg(long)]
    pub no_center: bool,
}

pub fn run_svd(args: &SvdArgs, global: &Global) -> Result<serde_json::Value> {
    let (dataset, _) = read_dataset(&args.dataset)?;
    let kinds: Vec<FeatureKind> = if args.kind == "all" {
        FeatureKind::ALL.to_vec()
    } else {
        vec![args.kind.parse().map_err(anyhow::Error::msg)?]
    };

    let mut peaks = serde_json::Map::new();
    let mut outputs = Vec::new();
    for kind in &kinds {
        let fm = build_feature_matrix(&dataset, std::slice::from_ref(kind))?;
        let profile = importance_profile_with(&fm, !args.no_center)?;

        let json_path = global.out_path(PathBuf::from(format!("importance-{kind}.json")).as_path());
        common::write_json(&json_path, &profile)?;

        let mut csv = String::from("frequency_hz,weight\n");
        for (f, w) in profile.frequencies_hz.iter().zip(&profile.weights) {
            let _ = writeln!(csv, "{f},{w}");
        }
        let csv_path = global.out_path(PathBuf::from(format!("importance-{kind}.csv")).as_path());
        common::write_text(&csv_path, &csv)?;

        peaks.insert(kind.to_string(), json!(profile.peak_frequency_hz));
        outputs.push(json_path.display().to_string());
    }

    let mut argv = vec!["svd".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--dataset".into(),
        args.dataset.display().to_string(),
        "--kind".into(),
        args.kind.clone(),
    ]);
    if args.no_center {
        argv.push("--no-center".into());
    }
    common::write_echo(
        global,
        "svd",
        json!({
            "dataset": args.dataset,
            "kinds": kinds,
            "center": !args.no_center,
            "outputs": outputs,
        }),
        argv,
    )?;

    Ok(json!({"command": "svd", "peak_frequency_hz": peaks}))
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Dataset CSV (manifest expected next to it).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Feature kinds as a dataset variant: A, B, C or D.
    #[arg(long, default_value = "B")]
    pub variant: DatasetVariant,
    #[arg(long, default_value_t = 100.0)]
    pub f_lo: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub f_hi: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Output feature-matrix JSON.
    #[arg(long, default_value = "features.json")]
    pub out: PathBuf,
}

pub fn run_reduce(args: &ReduceArgs, global: &Global) -> Result<serde_json::Value> {
    let (dataset, _) = read_dataset(&args.dataset)?;
    let full = build_variant_matrix(&dataset, args.variant)?;
    let reduced = reduce_to_band(&full, args.f_lo, args.f_hi, args.n)
        .context("reducing to frequency band")?;

    let out = global.out_path(&args.out);
    common::write_json(&out, &reduced)?;

    let selected: Vec<f64> = {
        let first_kind = reduced.col_meta()[0].kind;
        reduced
            .col_meta()
            .iter()
            .filter(|m| m.kind == first_kind)
            .map(|m| m.frequency_hz)
            .collect()
    };

    let mut argv = vec!["reduce".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--dataset".into(),
        args.dataset.display().to_string(),
        "--variant".into(),
        args.variant.to_string(),
        "--f-lo".into(),
        args.f_lo.to_string(),
        "--f-hi".into(),
        args.f_hi.to_string(),
        "--n".into(),
        args.n.to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    common::write_echo(
        global,
        "reduce",
        json!({
            "dataset": args.dataset,
            "variant": args.variant,
            "band": [args.f_lo, args.f_hi],
            "n": args.n,
            "selected_frequencies_hz": selected,
            "out": out,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "reduce",
        "rows": reduced.rows(),
        "cols": reduced.cols(),
        "frequencies": selected.len(),
        "out": out,
    }))
}
