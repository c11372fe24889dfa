//! `bevid replay` and `bevid ingest`: dataset ↔ acquisition frame stream.

use crate::common::{self, Global};
use anyhow::{bail, Context, Result};
use bevid_core::dataset::{Dataset, Observation};
use bevid_core::frames::{assemble_sweep, decode_frame, encode_frame, stream_sweep, FRAME_LEN};
use bevid_core::io::{grid_from_manifest, read_dataset, write_dataset_with_registry, DatasetManifest};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Sidecar restoring per-sweep identity after a wire trip.
#[derive(Debug, Serialize, Deserialize)]
struct SweepLabels {
    /// sweep_id → (label, sample_id)
    sweeps: BTreeMap<u16, (u32, u32)>,
}

fn labels_path(frames_path: &Path) -> PathBuf {
    frames_path.with_extension("labels.json")
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Dataset CSV (manifest expected next to it).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output frame stream (raw concatenated frames).
    #[arg(long, default_value = "frames.bin")]
    pub out: PathBuf,
    /// Also write the stream to standard output.
    #[arg(long)]
    pub stdout: bool,
}

pub fn run_replay(args: &ReplayArgs, global: &Global) -> Result<serde_json::Value> {
    let (dataset, _) = read_dataset(&args.dataset)?;
    if dataset.len() > u16::MAX as usize + 1 {
        bail!("dataset has {} observations; sweep ids are 16-bit", dataset.len());
    }

    let mut bytes = Vec::with_capacity(dataset.len() * dataset.grid.len() * FRAME_LEN);
    let mut labels = SweepLabels {
        sweeps: BTreeMap::new(),
    };
    for (index, obs) in dataset.observations.iter().enumerate() {
        let sweep_id = index as u16;
        let spectrum = dataset.spectrum(index)?;
        for frame in stream_sweep(&spectrum, sweep_id)? {
            bytes.extend_from_slice(&encode_frame(&frame)?);
        }
        labels.sweeps.insert(sweep_id, (obs.label, obs.sample_id));
    }

    let out = global.out_path(&args.out);
    std::fs::write(&out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    let labels_out = labels_path(&out);
    common::write_json(&labels_out, &labels)?;
    if args.stdout {
        std::io::stdout().write_all(&bytes)?;
    }

    let mut argv = vec!["replay".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--dataset".into(),
        args.dataset.display().to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    common::write_echo(
        global,
        "replay",
        json!({
            "dataset": args.dataset,
            "out": out,
            "labels_out": labels_out,
            "frames": bytes.len() / FRAME_LEN,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "replay",
        "sweeps": dataset.len(),
        "frames": bytes.len() / FRAME_LEN,
        "bytes": bytes.len(),
        "out": out,
        "labels_out": labels_out,
    }))
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw frame stream.
    #[arg(long)]
    pub frames: PathBuf,
    /// Dataset manifest describing the expected grid.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Label sidecar from `replay`; without it labels default to 0 and
    /// sample ids to the sweep id.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output dataset CSV.
    #[arg(long, default_value = "ingested.csv")]
    pub out: PathBuf,
}

pub fn run_ingest(args: &IngestArgs, global: &Global) -> Result<serde_json::Value> {
    let manifest: DatasetManifest = common::read_json(&args.manifest)?;
    let grid = grid_from_manifest(&manifest.grid, &args.manifest)?;

    let bytes =
        std::fs::read(&args.frames).with_context(|| format!("reading {}", args.frames.display()))?;
    if bytes.len() % FRAME_LEN != 0 {
        bail!(
            "frame stream length {} is not a multiple of the {FRAME_LEN}-byte frame size",
            bytes.len()
        );
    }

    let mut per_sweep: BTreeMap<u16, Vec<bevid_core::frames::PointFrame>> = BTreeMap::new();
    for (i, chunk) in bytes.chunks_exact(FRAME_LEN).enumerate() {
        let frame = decode_frame(chunk).with_context(|| format!("frame {i}"))?;
        per_sweep.entry(frame.sweep_id).or_default().push(frame);
    }

    let labels: Option<SweepLabels> = match &args.labels {
        Some(path) => Some(common::read_json(path)?),
        None => None,
    };

    let mut observations = Vec::with_capacity(per_sweep.len());
    for (&sweep_id, frames) in &per_sweep {
        let spectrum = assemble_sweep(frames, &grid)
            .with_context(|| format!("assembling sweep {sweep_id}"))?;
        let (label, sample_id) = labels
            .as_ref()
            .and_then(|l| l.sweeps.get(&sweep_id).copied())
            .unwrap_or((0, sweep_id as u32));
        observations.push(Observation {
            label,
            sample_id,
            values: spectrum.values().to_vec(),
        });
    }
    if observations.is_empty() {
        bail!("frame stream contains no sweeps");
    }

    let mut dataset = Dataset::new(grid, observations)?;
    dataset.stimulus_amplitude_mv = manifest.stimulus_amplitude_mv;
    let out = global.out_path(&args.out);
    write_dataset_with_registry(&dataset, &out, manifest.registry.as_ref())?;

    let mut argv = vec!["ingest".to_string()];
    argv.extend(common::global_argv(global));
    argv.extend([
        "--frames".into(),
        args.frames.display().to_string(),
        "--manifest".into(),
        args.manifest.display().to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    if let Some(l) = &args.labels {
        argv.extend(["--labels".into(), l.display().to_string()]);
    }
    common::write_echo(
        global,
        "ingest",
        json!({
            "frames": args.frames,
            "manifest": args.manifest,
            "labels": args.labels,
            "out": out,
        }),
        argv,
    )?;

    Ok(json!({
        "command": "ingest",
        "sweeps": dataset.len(),
        "out": out,
    }))
}

