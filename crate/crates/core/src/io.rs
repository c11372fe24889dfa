//! Disk formats: the dataset CSV with its sibling JSON manifest, single
//! spectrum CSVs, and report-only dataset validation.
//!
//! The dataset CSV is `label,sample_id,re_0,im_0,…,re_N,im_N` with one row
//! per observation. Numbers are written in shortest round-trip decimal form,
//! so write → read → write is byte-identical. Row/column numbers in
//! diagnostics are 1-based; the header is line 1.

use crate::dataset::{Dataset, DatasetError, Observation};
use crate::registry::LabelRegistry;
use crate::spectrum::{
    make_log_grid, ComplexImpedance, FrequencyGrid, Spacing, Spectrum, SweepMeta,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("missing manifest {path} (expected next to the CSV)")]
    MissingManifest { path: PathBuf },
    #[error("cannot parse {path}: {detail}")]
    BadManifest { path: PathBuf, detail: String },
    #[error("unsupported dataset schema_version {got} (supported: {DATASET_SCHEMA_VERSION})")]
    UnknownSchemaVersion { got: u32 },
    #[error("refusing to write an empty dataset")]
    EmptyDataset,
    #[error("row 1: expected header `{expected}`, got `{got}`")]
    BadHeader { expected: String, got: String },
    #[error("row {row}: expected {expected} columns, got {got}")]
    ColumnCount {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("row {row}, column {col}: `{content}` is not a number")]
    BadNumber {
        row: usize,
        col: usize,
        content: String,
    },
    #[error("row {row}, column {col}: non-finite value")]
    NonFinite { row: usize, col: usize },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("spectrum CSV {path} is empty")]
    EmptySpectrum { path: PathBuf },
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
}

/// Grid description inside a manifest. Explicit grids carry their points;
/// logarithmic grids are reconstructed from the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub n_points: usize,
    pub spacing: Spacing,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<Vec<f64>>,
}

/// Sidecar JSON describing a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub grid: GridManifest,
    pub stimulus_amplitude_mv: f64,
    /// Column layout marker for the value columns.
    pub storage: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub registry: Option<LabelRegistry>,
}

pub const STORAGE_CONVENTION: &str = "cartesian-re-im-interleaved";

/// `data.csv` → `data.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

fn grid_manifest(grid: &FrequencyGrid) -> GridManifest {
    let points = grid.points();
    GridManifest {
        f_min_hz: points[0],
        f_max_hz: points[points.len() - 1],
        n_points: points.len(),
        spacing: grid.spacing(),
        points: match grid.spacing() {
            Spacing::Logarithmic => None,
            Spacing::Explicit => Some(points.to_vec()),
        },
    }
}

/// Reconstructs the frequency grid a manifest describes. `path` is only
/// used in diagnostics.
pub fn grid_from_manifest(m: &GridManifest, path: &Path) -> Result<FrequencyGrid, IoError> {
    match m.spacing {
        Spacing::Logarithmic => {
            make_log_grid(m.f_min_hz, m.f_max_hz, m.n_points).map_err(|e| IoError::BadManifest {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })
        }
        Spacing::Explicit => {
            let points = m.points.clone().ok_or_else(|| IoError::BadManifest {
                path: path.to_path_buf(),
                detail: "explicit spacing requires a `points` array".into(),
            })?;
            if points.len() != m.n_points {
                return Err(IoError::BadManifest {
                    path: path.to_path_buf(),
                    detail: format!(
                        "`points` has {} entries, n_points says {}",
                        points.len(),
                        m.n_points
                    ),
                });
            }
            FrequencyGrid::explicit(points).map_err(|e| IoError::BadManifest {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })
        }
    }
}

fn dataset_header(n_points: usize) -> String {
    let mut header = String::from("label,sample_id");
    for i in 0..n_points {
        let _ = write!(header, ",re_{i},im_{i}");
    }
    header
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `d` as CSV plus sibling manifest, embedding a label registry when
/// given.
pub fn write_dataset_with_registry(
    d: &Dataset,
    csv_path: &Path,
    registry: Option<&LabelRegistry>,
) -> Result<(), IoError> {
    if d.is_empty() {
        return Err(IoError::EmptyDataset);
    }
    d.check_consistent()?;

    let n_points = d.grid.len();
    let mut csv = dataset_header(n_points);
    csv.push('\n');
    for obs in &d.observations {
        let _ = write!(csv, "{},{}", obs.label, obs.sample_id);
        for z in &obs.values {
            let _ = write!(csv, ",{},{}", z.real, z.imag);
        }
        csv.push('\n');
    }
    write_file(csv_path, &csv)?;

    let manifest = DatasetManifest {
        schema_version: DATASET_SCHEMA_VERSION,
        grid: grid_manifest(&d.grid),
        stimulus_amplitude_mv: d.stimulus_amplitude_mv,
        storage: STORAGE_CONVENTION.to_string(),
        registry: registry.cloned(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&manifest_path(csv_path), &json)
}

/// Writes `d` as CSV plus sibling manifest.
pub fn write_dataset(d: &Dataset, csv_path: &Path) -> Result<(), IoError> {
    write_dataset_with_registry(d, csv_path, None)
}

/// Reads a dataset CSV and its manifest back.
pub fn read_dataset(csv_path: &Path) -> Result<(Dataset, DatasetManifest), IoError> {
    let m_path = manifest_path(csv_path);
    if !m_path.exists() {
        return Err(IoError::MissingManifest { path: m_path });
    }
    let manifest: DatasetManifest =
        serde_json::from_str(&read_file(&m_path)?).map_err(|e| IoError::BadManifest {
            path: m_path.clone(),
            detail: e.to_string(),
        })?;
    if manifest.schema_version != DATASET_SCHEMA_VERSION {
        return Err(IoError::UnknownSchemaVersion {
            got: manifest.schema_version,
        });
    }
    let grid = grid_from_manifest(&manifest.grid, &m_path)?;

    let text = read_file(csv_path)?;
    let n_points = grid.len();
    let expected_cols = 2 + 2 * n_points;
    let expected_header = dataset_header(n_points);

    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != expected_header {
        return Err(IoError::BadHeader {
            expected: expected_header,
            got: header.to_string(),
        });
    }

    let parse_u32 = |field: &str, row: usize, col: usize| -> Result<u32, IoError> {
        field.parse::<u32>().map_err(|_| IoError::BadNumber {
            row,
            col,
            content: field.to_string(),
        })
    };
    let parse_f64 = |field: &str, row: usize, col: usize| -> Result<f64, IoError> {
        let value: f64 = field.parse().map_err(|_| IoError::BadNumber {
            row,
            col,
            content: field.to_string(),
        })?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(IoError::NonFinite { row, col })
        }
    };

    let mut observations = Vec::new();
    for (line_idx, line) in lines.enumerate() {
        let row = line_idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(IoError::ColumnCount {
                row,
                got: fields.len(),
                expected: expected_cols,
            });
        }
        let label = parse_u32(fields[0], row, 1)?;
        let sample_id = parse_u32(fields[1], row, 2)?;
        let mut values = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let re = parse_f64(fields[2 + 2 * i], row, 3 + 2 * i)?;
            let im = parse_f64(fields[3 + 2 * i], row, 4 + 2 * i)?;
            values.push(ComplexImpedance::new(re, im));
        }
        observations.push(Observation {
            label,
            sample_id,
            values,
        });
    }
    if observations.is_empty() {
        return Err(IoError::EmptyDataset);
    }

    let mut dataset = Dataset::new(grid, observations)?;
    dataset.stimulus_amplitude_mv = manifest.stimulus_amplitude_mv;
    Ok((dataset, manifest))
}

/// Writes one sweep as `frequency_hz,re_ohm,im_ohm` rows.
pub fn write_spectrum_csv(s: &Spectrum, path: &Path) -> Result<(), IoError> {
    let mut csv = String::from("frequency_hz,re_ohm,im_ohm\n");
    for (f, z) in s.grid().points().iter().zip(s.values()) {
        let _ = writeln!(csv, "{f},{},{}", z.real, z.imag);
    }
    write_file(path, &csv)
}

/// Reads a sweep written by [`write_spectrum_csv`]. The grid is taken as
/// explicit points.
pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum, IoError> {
    let text = read_file(path)?;
    let expected_header = "frequency_hz,re_ohm,im_ohm";
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != expected_header {
        return Err(IoError::BadHeader {
            expected: expected_header.to_string(),
            got: header.to_string(),
        });
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line_idx, line) in lines.enumerate() {
        let row = line_idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::ColumnCount {
                row,
                got: fields.len(),
                expected: 3,
            });
        }
        let mut nums = [0.0f64; 3];
        for (col, (slot, field)) in nums.iter_mut().zip(&fields).enumerate() {
            let value: f64 = field.parse().map_err(|_| IoError::BadNumber {
                row,
                col: col + 1,
                content: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IoError::NonFinite { row, col: col + 1 });
            }
            *slot = value;
        }
        points.push(nums[0]);
        values.push(ComplexImpedance::new(nums[1], nums[2]));
    }
    if points.is_empty() {
        return Err(IoError::EmptySpectrum {
            path: path.to_path_buf(),
        });
    }
    let grid = FrequencyGrid::explicit(points)?;
    Ok(Spectrum::new(grid, values, SweepMeta::default())?)
}

/// Loads a registry from a JSON id → name map, or the builtin table.
pub fn load_label_registry(path: Option<&Path>) -> Result<LabelRegistry, IoError> {
    match path {
        None => Ok(LabelRegistry::builtin()),
        Some(p) => {
            serde_json::from_str(&read_file(p)?).map_err(|e| IoError::BadManifest {
                path: p.to_path_buf(),
                detail: e.to_string(),
            })
        }
    }
}

/// What a validation pass found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    UnknownLabel,
    DuplicateSampleId,
    ClassImbalance,
    GridInconsistency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

/// Report-only validation result: per-class counts plus any findings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub per_class_counts: BTreeMap<u32, usize>,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks labels (against a registry when given), class balance, duplicate
/// sample ids and grid consistency. Never fails; everything is a finding.
pub fn validate_dataset(d: &Dataset, registry: Option<&LabelRegistry>) -> ValidationReport {
    let mut findings = Vec::new();

    let mut per_class_counts: BTreeMap<u32, usize> = BTreeMap::new();
    for obs in &d.observations {
        *per_class_counts.entry(obs.label).or_insert(0) += 1;
    }

    if let Some(reg) = registry {
        for &label in per_class_counts.keys() {
            if !reg.contains(label) {
                findings.push(Finding {
                    kind: FindingKind::UnknownLabel,
                    message: format!("label {label} is not in the registry (0..{})", reg.len()),
                });
            }
        }
    }

    if let (Some(min), Some(max)) = (
        per_class_counts.values().min(),
        per_class_counts.values().max(),
    ) {
        if min != max {
            findings.push(Finding {
                kind: FindingKind::ClassImbalance,
                message: format!(
                    "observations per class range from {min} to {max}: {per_class_counts:?}"
                ),
            });
        }
    }

    let mut seen = BTreeMap::new();
    for (index, obs) in d.observations.iter().enumerate() {
        if let Some(first) = seen.insert(obs.sample_id, index) {
            findings.push(Finding {
                kind: FindingKind::DuplicateSampleId,
                message: format!(
                    "sample_id {} appears at observations {first} and {index}",
                    obs.sample_id
                ),
            });
        }
    }

    if let Err(e) = d.check_consistent() {
        findings.push(Finding {
            kind: FindingKind::GridInconsistency,
            message: e.to_string(),
        });
    }

    ValidationReport {
        per_class_counts,
        findings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::FrequencyGrid;
    use crate::synth::{default_kind_bundle, generate_kind_dataset};
    use tempfile::tempdir;

    fn canonical_dataset() -> Dataset {
        generate_kind_dataset(&default_kind_bundle(), 10, &FrequencyGrid::standard(), 0).unwrap()
    }

    #[test]
    fn canonical_dataset_dimensions() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("kinds.csv");
        let d = canonical_dataset();
        write_dataset_with_registry(&d, &path, Some(&LabelRegistry::builtin())).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 201);
        for line in &lines {
            assert_eq!(line.split(',').count(), 204);
        }
    }

    #[test]
    fn write_read_write_is_byte_identical() {
        let dir = tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        let d = canonical_dataset();
        write_dataset(&d, &p1).unwrap();
        let (back, manifest) = read_dataset(&p1).unwrap();
        assert_eq!(back, d);
        assert_eq!(manifest.schema_version, DATASET_SCHEMA_VERSION);
        write_dataset(&back, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn empty_dataset_rejected_on_write() {
        let d = Dataset::new(FrequencyGrid::standard(), vec![]).unwrap();
        let dir = tempdir().unwrap();
        let err = write_dataset(&d, &dir.path().join("x.csv")).unwrap_err();
        assert!(matches!(err, IoError::EmptyDataset));
    }

    #[test]
    fn missing_manifest_is_a_distinct_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "label,sample_id,re_0,im_0\n0,0,1.0,2.0\n").unwrap();
        let err = read_dataset(&path).unwrap_err();
        assert!(matches!(err, IoError::MissingManifest { .. }));
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = {
            let grid = FrequencyGrid::explicit(vec![100.0, 1000.0]).unwrap();
            Dataset::new(
                grid,
                vec![
                    Observation {
                        label: 0,
                        sample_id: 0,
                        values: vec![ComplexImpedance::new(1.0, 2.0); 2],
                    },
                    Observation {
                        label: 1,
                        sample_id: 1,
                        values: vec![ComplexImpedance::new(3.0, 4.0); 2],
                    },
                ],
            )
            .unwrap()
        };
        write_dataset(&d, &path).unwrap();

        // Truncated row.
        let good = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[2] = "1,1,3,4".into();
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        match read_dataset(&path).unwrap_err() {
            IoError::ColumnCount { row, got, expected } => {
                assert_eq!((row, got, expected), (3, 4, 6));
            }
            other => panic!("unexpected error {other:?}"),
        }

        // Non-numeric cell.
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[1] = "0,0,oops,2,1,2".into();
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        match read_dataset(&path).unwrap_err() {
            IoError::BadNumber { row, col, content } => {
                assert_eq!((row, col), (2, 3));
                assert_eq!(content, "oops");
            }
            other => panic!("unexpected error {other:?}"),
        }

        // NaN cell.
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[1] = "0,0,NaN,2,1,2".into();
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        match read_dataset(&path).unwrap_err() {
            IoError::NonFinite { row, col } => assert_eq!((row, col), (2, 3)),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_schema_version_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = canonical_dataset();
        write_dataset(&d, &path).unwrap();
        let m_path = manifest_path(&path);
        let mangled = fs::read_to_string(&m_path)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        fs::write(&m_path, mangled).unwrap();
        let err = read_dataset(&path).unwrap_err();
        assert!(matches!(err, IoError::UnknownSchemaVersion { got: 9 }));
    }

    #[test]
    fn validate_canonical_dataset_is_clean() {
        let d = canonical_dataset();
        let report = validate_dataset(&d, Some(&LabelRegistry::builtin()));
        assert!(report.is_clean(), "findings: {:?}", report.findings);
        assert_eq!(report.per_class_counts.len(), 20);
        assert!(report.per_class_counts.values().all(|&c| c == 10));
    }

    #[test]
    fn validate_reports_unknown_label() {
        let mut d = canonical_dataset();
        d.observations[5].label = 25;
        let report = validate_dataset(&d, Some(&LabelRegistry::builtin()));
        assert!(report
            .findings
            .iter()
            .any(|f| f.kind == FindingKind::UnknownLabel));
    }

    #[test]
    fn validate_reports_duplicate_sample_ids() {
        let mut d = canonical_dataset();
        d.observations[7].sample_id = d.observations[3].sample_id;
        let report = validate_dataset(&d, None);
        assert!(report
            .findings
            .iter()
            .any(|f| f.kind == FindingKind::DuplicateSampleId));
    }

    #[test]
    fn validate_reports_imbalance_and_grid_issues() {
        let mut d = canonical_dataset();
        d.observations.pop();
        d.observations[0].values.pop();
        let report = validate_dataset(&d, None);
        assert!(report
            .findings
            .iter()
            .any(|f| f.kind == FindingKind::ClassImbalance));
        assert!(report
            .findings
            .iter()
            .any(|f| f.kind == FindingKind::GridInconsistency));
    }

    #[test]
    fn registry_loading() {
        let builtin = load_label_registry(None).unwrap();
        assert_eq!(builtin.name(0), Some("Mineral water"));
        let dir = tempdir().unwrap();
        let path = dir.path().join("reg.json");
        fs::write(&path, r#"{"0":"water","1":"cola"}"#).unwrap();
        let reg = load_label_registry(Some(&path)).unwrap();
        assert_eq!(reg.name(1), Some("cola"));
        fs::write(&path, r#"{"0":"water","2":"cola"}"#).unwrap();
        assert!(load_label_registry(Some(&path)).is_err());
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let s = crate::synth::simulate_sweep(
            &crate::circuit::CircuitModel::series(vec![
                crate::circuit::CircuitModel::resistor(100.0),
                crate::circuit::CircuitModel::capacitor(1e-6),
            ]),
            &FrequencyGrid::standard(),
            0.01,
            7,
        )
        .unwrap();
        write_spectrum_csv(&s, &path).unwrap();
        let back = read_spectrum_csv(&path).unwrap();
        assert_eq!(back.grid().points(), s.grid().points());
        assert_eq!(back.values(), s.values());
    }
}
