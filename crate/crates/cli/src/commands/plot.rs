//! `bevid plot`: per-class amplitude chart for a dataset, or an importance
//! profile with its peak marked. Every chart gets a CSV sidecar carrying
//! exactly the plotted numbers.

use crate::common::{self, Global};
use crate::svg::{render, Chart};
use anyhow::{bail, Result};
use bevid_core::io::read_dataset;
use bevid_core::registry::LabelRegistry;
use bevid_core::spectrum::FeatureKind;
use bevid_core::svd::ImportanceProfile;
use clap::Args;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Dataset CSV: plots mean amplitude vs frequency per class.
    #[arg(long, conflicts_with = "profile")]
    pub dataset: Option<PathBuf>,
    /// Importance-profile JSON from `svd`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Output SVG (the CSV sidecar shares its stem).
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
}

fn sidecar(svg_path: &Path) -> PathBuf {
    svg_path.with_extension("csv")
}

pub fn run(args: &PlotArgs, global: &Global) -> Result<serde_json::Value> {
    let out = global.out_path(&args.out);
    let csv_out = sidecar(&out);

    let summary = match (&args.dataset, &args.profile) {
        (Some(dataset_path), None) => {
            let (dataset, manifest) = read_dataset(dataset_path)?;
            let points = dataset.grid.points().to_vec();
            let registry = manifest.registry.clone();

            // Mean amplitude per class at each grid point.
            let mut sums: BTreeMap<u32, (usize, Vec<f64>)> = BTreeMap::new();
            for obs in &dataset.observations {
                let entry = sums
                    .entry(obs.label)
                    .or_insert_with(|| (0, vec![0.0; points.len()]));
                entry.0 += 1;
                for (acc, z) in entry.1.iter_mut().zip(&obs.values) {
                    *acc += FeatureKind::Amplitude.of(*z);
                }
            }

            let mut csv = String::from("class_id,frequency_hz,amplitude_ohm\n");
            let mut series = Vec::new();
            for (&label, (count, sums)) in &sums {
                let means: Vec<f64> = sums.iter().map(|s| s / *count as f64).collect();
                for (f, a) in points.iter().zip(&means) {
                    let _ = writeln!(csv, "{label},{f},{a}");
                }
                let name = registry
                    .as_ref()
                    .and_then(|r: &LabelRegistry| r.name(label))
                    .map(|n| format!("{label}-{n}"))
                    .unwrap_or_else(|| format!("class-{label}"));
                series.push((name, points.iter().copied().zip(means).collect()));
            }

            let chart = Chart {
                title: "Mean amplitude per class",
                x_label: "frequency (Hz)",
                y_label: "|Z| (ohm)",
                log_x: true,
                log_y: true,
                series,
                marker: None,
            };
            common::write_text(&out, &render(&chart))?;
            common::write_text(&csv_out, &csv)?;
            json!({
                "command": "plot",
                "mode": "dataset",
                "classes": sums.len(),
                "out": out,
                "csv": csv_out,
            })
        }
        (None, Some(profile_path)) => {
            let profile: ImportanceProfile = common::read_json(profile_path)?;
            let mut csv = String::from("frequency_hz,weight\n");
            for (f, w) in profile.frequencies_hz.iter().zip(&profile.weights) {
                let _ = writeln!(csv, "{f},{w}");
            }
            let peak_weight = profile
                .frequencies_hz
                .iter()
                .zip(&profile.weights)
                .find(|(f, _)| **f == profile.peak_frequency_hz)
                .map(|(_, w)| *w)
                .unwrap_or(0.0);
            let title = format!("Importance profile ({})", profile.kind);
            let chart = Chart {
                title: &title,
                x_label: "frequency (Hz)",
                y_label: "|v1| weight",
                log_x: true,
                log_y: false,
                series: vec![(
                    profile.kind.to_string(),
                    profile
                        .frequencies_hz
                        .iter()
                        .copied()
                        .zip(profile.weights.iter().copied())
                        .collect(),
                )],
                marker: Some((
                    profile.peak_frequency_hz,
                    peak_weight,
                    format!("peak {:.2} Hz", profile.peak_frequency_hz),
                )),
            };
            common::write_text(&out, &render(&chart))?;
            common::write_text(&csv_out, &csv)?;
            json!({
                "command": "plot",
                "mode": "profile",
                "peak_frequency_hz": profile.peak_frequency_hz,
                "out": out,
                "csv": csv_out,
            })
        }
        _ => bail!("exactly one of --dataset or --profile is required"),
    };

    let mut argv = vec!["plot".to_string()];
    argv.extend(common::global_argv(global));
    if let Some(d) = &args.dataset {
        argv.extend(["--dataset".into(), d.display().to_string()]);
    }
    if let Some(p) = &args.profile {
        argv.extend(["--profile".into(), p.display().to_string()]);
    }
    argv.extend(["--out".into(), args.out.display().to_string()]);
    common::write_echo(
        global,
        "plot",
        json!({
            "dataset": args.dataset,
            "profile": args.profile,
            "out": out,
            "csv": csv_out,
        }),
        argv,
    )?;

    Ok(summary)
}
