//! `bevid fit`: circuit parameter recovery from a spectrum CSV.

use crate::common::{self, Global};
use anyhow::Result;
use bevid_core::circuit::CircuitModel;
use bevid_core::fit::{fit_circuit, FitOptions, FitProblem, FitResult, Weighting};
use bevid_core::io::read_spectrum_csv;
use clap::Args;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Spectrum CSV (frequency_hz,re_ohm,im_ohm).
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Circuit JSON; its parameter values are the initial guess.
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, default_value = "proportional")]
    pub weighting: Weighting,
    /// Extra seeded restarts from perturbed initial guesses; best cost wins.
    #[arg(long, default_value_t = 0)]
    pub restarts: u32,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Output JSON name.
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
}

pub fn run(args: &FitArgs, global: &Global) -> Result<serde_json::Value> {
    let template: CircuitModel = common::read_json(&args.circuit)?;
    let target = read_spectrum_csv(&args.spectrum)?;
    let problem = FitProblem::new(template, target, args.weighting)?;
    let options = FitOptions {
        max_iter: args.max_iter,
        ..FitOptions::default()
    };

    let p0 = problem.initial_guess();
    let mut best: FitResult = fit_circuit(&problem, &p0, &options)?;
    for restart in 0..args.restarts {
        // Deterministic restart multipliers in [1/2, 2), staggered per
        // restart and parameter; no RNG machinery needed for a few probes.
        let perturbed: Vec<f64> = p0
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let phase = (global.seed as f64 + restart as f64 * 0.73 + k as f64 * 0.37).sin();
                p * 2f64.powf(phase)
            })
            .collect();
        if let Ok(candidate) = fit_circuit(&problem, &perturbed, &options) {
            if candidate.cost < best.cost {
                best = candidate;
            }
        }
    }

    let out = global.out_path(&args.out);
    let result_json = json!({
        "parameter_names": problem.free_names(),
        "result": &best,
        "weighting": args.weighting,
    });
    common::write_json_file(&out, &result_json)?;

    let mut argv = vec!["fit".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--spectrum".into(),
        args.spectrum.display().to_string(),
        "--circuit".into(),
        args.circuit.display().to_string(),
        "--weighting".into(),
        format!("{:?}", args.weighting).to_lowercase(),
        "--restarts".into(),
        args.restarts.to_string(),
        "--max-iter".into(),
        args.max_iter.to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    common::write_echo(
        global,
        "fit",
        json!({
            "spectrum": args.spectrum,
            "circuit": args.circuit,
            "weighting": args.weighting,
            "restarts": args.restarts,
            "max_iter": args.max_iter,
            "out": out,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "fit",
        "converged": best.converged,
        "cost": best.cost,
        "iterations": best.iterations,
        "params": best.params,
        "out": out,
    }))
}
