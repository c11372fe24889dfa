//! `bevid simulate`: synthetic dataset generation (or a single sweep).

use crate::common::{self, Global};
use anyhow::{bail, Context, Result};
use bevid_core::io::{write_dataset_with_registry, write_spectrum_csv};
use bevid_core::registry::LabelRegistry;
use bevid_core::spectrum::make_log_grid;
use bevid_core::synth::{
    default_freshness_spec, default_kind_bundle, generate_freshness_dataset,
    generate_kind_dataset, simulate_sweep, ClassSpec, FreshnessSpec,
};
use clap::Args;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Class-spec JSON (kind bundle: array of class specs; freshness: an
    /// object with base/drift/hours). Built-in specs when omitted.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    /// Generate the freshness dataset instead of the kind dataset.
    #[arg(long)]
    pub freshness: bool,
    /// Samples per class.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Sweep grid: point count and bounds in Hz.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 100.0)]
    pub f_min: f64,
    #[arg(long, default_value_t = 100_000.0)]
    pub f_max: f64,
    /// Output CSV name (manifest lands next to it).
    #[arg(long, default_value = "dataset.csv")]
    pub out: PathBuf,
    /// Write the effective spec JSON here and continue.
    #[arg(long)]
    pub dump_spec: Option<PathBuf>,
    /// Simulate a single sweep of this circuit JSON instead of a dataset.
    #[arg(long, conflicts_with_all = ["spec_file", "freshness"])]
    pub circuit: Option<PathBuf>,
    /// Relative noise for --circuit mode.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

pub fn run(args: &SimulateArgs, global: &Global) -> Result<serde_json::Value> {
    let grid = make_log_grid(args.f_min, args.f_max, args.points)?;
    let out = global.out_path(&args.out);

    let mut argv = vec!["simulate".to_string()];
    argv.extend(common::global_argv(global));

    if let Some(circuit_path) = &args.circuit {
        let circuit = common::read_json(circuit_path)?;
        let sweep = simulate_sweep(&circuit, &grid, args.noise, global.seed)?;
        write_spectrum_csv(&sweep, &out)?;
        argv.extend([
            "--circuit".into(),
            circuit_path.display().to_string(),
            "--noise".into(),
            args.noise.to_string(),
            "--points".into(),
            args.points.to_string(),
            "--f-min".into(),
            args.f_min.to_string(),
            "--f-max".into(),
            args.f_max.to_string(),
            "--out".into(),
            args.out.display().to_string(),
        ]);
        common::write_echo(
            global,
            "simulate",
            json!({
                "mode": "single-sweep",
                "circuit": circuit_path,
                "noise": args.noise,
                "grid": {"f_min": args.f_min, "f_max": args.f_max, "points": args.points},
                "out": out,
            }),
            argv,
        )?;
        return Ok(json!({"command": "simulate", "points": sweep.len(), "out": out}));
    }

    let (dataset, registry, spec_echo) = if args.freshness {
        let spec: FreshnessSpec = match &args.spec_file {
            Some(path) => common::read_json(path)?,
            None => default_freshness_spec(),
        };
        if let Some(dump) = &args.dump_spec {
            common::write_json(&global.out_path(dump), &spec)?;
        }
        let d = generate_freshness_dataset(
            &spec.base,
            &spec.drift,
            &spec.hours,
            args.samples,
            &grid,
            global.seed,
        )?;
        (d, None, serde_json::to_value(&spec)?)
    } else {
        let specs: Vec<ClassSpec> = match &args.spec_file {
            Some(path) => common::read_json(path)?,
            None => default_kind_bundle(),
        };
        if specs.is_empty() {
            bail!("spec file contains no classes");
        }
        if let Some(dump) = &args.dump_spec {
            common::write_json(&global.out_path(dump), &specs)?;
        }
        let d = generate_kind_dataset(&specs, args.samples, &grid, global.seed)?;
        // The builtin bundle matches the builtin registry; custom spec
        // files carry their own labels, echoed in the spec dump instead.
        let registry = if args.spec_file.is_none() {
            Some(LabelRegistry::builtin())
        } else {
            None
        };
        (d, registry, serde_json::to_value(&specs)?)
    };

    write_dataset_with_registry(&dataset, &out, registry.as_ref())
        .context("writing dataset")?;

    argv.extend([
        "--samples".into(),
        args.samples.to_string(),
        "--points".into(),
        args.points.to_string(),
        "--f-min".into(),
        args.f_min.to_string(),
        "--f-max".into(),
        args.f_max.to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    if args.freshness {
        argv.push("--freshness".into());
    }
    if let Some(path) = &args.spec_file {
        argv.extend(["--spec-file".into(), path.display().to_string()]);
    }
    common::write_echo(
        global,
        "simulate",
        json!({
            "mode": if args.freshness { "freshness" } else { "kinds" },
            "samples": args.samples,
            "grid": {"f_min": args.f_min, "f_max": args.f_max, "points": args.points},
            "out": out,
            "spec": spec_echo,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "simulate",
        "observations": dataset.len(),
        "classes": dataset.labels().len(),
        "out": out,
    }))
}
