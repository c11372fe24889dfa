//! Observation × feature matrices derived from datasets, the dataset
//! variants used by the experiment grid, low-frequency band reduction and
//! column standardization.

use crate::dataset::Dataset;
use crate::spectrum::{FeatureKind, Spectrum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("observation {index} has {values} values for a {grid} point grid")]
    MixedGrids {
        index: usize,
        values: usize,
        grid: usize,
    },
    #[error("feature kinds must be non-empty and distinct")]
    BadKinds,
    #[error("matrix must contain exactly one feature kind")]
    NotSingleKind,
    #[error("band [{f_lo}, {f_hi}] is invalid or outside the grid range")]
    BadBand { f_lo: f64, f_hi: f64 },
    #[error("band reduction selected no frequencies")]
    EmptySelection,
    #[error("matrix has {got} columns, expected {expected}")]
    ColumnMismatch { got: usize, expected: usize },
    #[error("centered matrix has no principal direction (all zeros)")]
    NoPrincipalDirection,
    #[error("feature row wants frequency {frequency_hz} Hz, absent from the spectrum grid")]
    FrequencyNotInGrid { frequency_hz: f64 },
}

/// Provenance of one matrix column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub kind: FeatureKind,
    pub frequency_hz: f64,
}

/// Dense row-major observations × features matrix with per-row labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_meta: Vec<ColumnMeta>,
    labels: Vec<u32>,
}

impl FeatureMatrix {
    pub fn from_parts(
        data: Vec<f64>,
        col_meta: Vec<ColumnMeta>,
        labels: Vec<u32>,
    ) -> Result<Self, FeatureError> {
        let cols = col_meta.len();
        let rows = labels.len();
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(FeatureError::EmptyDataset);
        }
        Ok(Self {
            rows,
            cols,
            data,
            col_meta,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col_meta(&self) -> &[ColumnMeta] {
        &self.col_meta
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Distinct labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<u32> {
        let mut labels = self.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// New matrix keeping `indices` rows (in the given order).
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
            col_meta: self.col_meta.clone(),
            labels,
        }
    }

    /// New matrix keeping `col_indices` columns (in the given order).
    pub fn select_cols(&self, col_indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.rows * col_indices.len());
        for row in 0..self.rows {
            for &c in col_indices {
                data.push(self.get(row, c));
            }
        }
        FeatureMatrix {
            rows: self.rows,
            cols: col_indices.len(),
            data,
            col_meta: col_indices.iter().map(|&c| self.col_meta[c]).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Columns of a single feature kind, preserving frequency order.
    pub fn restrict_to_kind(&self, kind: FeatureKind) -> Result<FeatureMatrix, FeatureError> {
        let cols: Vec<usize> = (0..self.cols)
            .filter(|&c| self.col_meta[c].kind == kind)
            .collect();
        if cols.is_empty() {
            return Err(FeatureError::NotSingleKind);
        }
        Ok(self.select_cols(&cols))
    }

    /// The single kind of this matrix, or an error if columns mix kinds.
    pub fn single_kind(&self) -> Result<FeatureKind, FeatureError> {
        let kind = self.col_meta[0].kind;
        if self.col_meta.iter().all(|m| m.kind == kind) {
            Ok(kind)
        } else {
            Err(FeatureError::NotSingleKind)
        }
    }

    /// Builds the feature row of one spectrum following this matrix's column
    /// layout. Frequencies must exist in the spectrum grid within 0.01%
    /// relative.
    pub fn row_from_spectrum(&self, s: &Spectrum) -> Result<Vec<f64>, FeatureError> {
        row_for_columns(&self.col_meta, s)
    }
}

/// Builds the feature row for arbitrary column metadata from a spectrum.
pub fn row_for_columns(col_meta: &[ColumnMeta], s: &Spectrum) -> Result<Vec<f64>, FeatureError> {
    let points = s.grid().points();
    let mut out = Vec::with_capacity(col_meta.len());
    for meta in col_meta {
        let idx = s.grid().nearest_index(meta.frequency_hz);
        let rel = (points[idx] - meta.frequency_hz).abs() / meta.frequency_hz;
        if rel > 1e-4 {
            return Err(FeatureError::FrequencyNotInGrid {
                frequency_hz: meta.frequency_hz,
            });
        }
        out.push(meta.kind.of(s.values()[idx]));
    }
    Ok(out)
}

/// The four dataset variants of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetVariant {
    /// Real and imaginary components.
    A,
    /// Amplitude and phase.
    B,
    /// Amplitude only.
    C,
    /// Phase only.
    D,
}

impl DatasetVariant {
    pub const ALL: [DatasetVariant; 4] = [
        DatasetVariant::A,
        DatasetVariant::B,
        DatasetVariant::C,
        DatasetVariant::D,
    ];

    pub fn kinds(self) -> &'static [FeatureKind] {
        match self {
            DatasetVariant::A => &[FeatureKind::Real, FeatureKind::Imaginary],
            DatasetVariant::B => &[FeatureKind::Amplitude, FeatureKind::Phase],
            DatasetVariant::C => &[FeatureKind::Amplitude],
            DatasetVariant::D => &[FeatureKind::Phase],
        }
    }
}

impl std::fmt::Display for DatasetVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DatasetVariant::A => "A",
            DatasetVariant::B => "B",
            DatasetVariant::C => "C",
            DatasetVariant::D => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for DatasetVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(DatasetVariant::A),
            "B" => Ok(DatasetVariant::B),
            "C" => Ok(DatasetVariant::C),
            "D" => Ok(DatasetVariant::D),
            other => Err(format!("unknown dataset variant `{other}`")),
        }
    }
}

/// One column per (kind, grid frequency), kinds grouped in the given order.
pub fn build_feature_matrix(
    d: &Dataset,
    kinds: &[FeatureKind],
) -> Result<FeatureMatrix, FeatureError> {
    if d.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    if kinds.is_empty() {
        return Err(FeatureError::BadKinds);
    }
    for (i, k) in kinds.iter().enumerate() {
        if kinds[..i].contains(k) {
            return Err(FeatureError::BadKinds);
        }
    }
    let n_points = d.grid.len();
    for (index, obs) in d.observations.iter().enumerate() {
        if obs.values.len() != n_points {
            return Err(FeatureError::MixedGrids {
                index,
                values: obs.values.len(),
                grid: n_points,
            });
        }
    }

    let mut col_meta = Vec::with_capacity(kinds.len() * n_points);
    for &kind in kinds {
        for &f in d.grid.points() {
            col_meta.push(ColumnMeta {
                kind,
                frequency_hz: f,
            });
        }
    }
    let mut data = Vec::with_capacity(d.len() * col_meta.len());
    let mut labels = Vec::with_capacity(d.len());
    for obs in &d.observations {
        for &kind in kinds {
            data.extend(obs.values.iter().map(|&z| kind.of(z)));
        }
        labels.push(obs.label);
    }
    FeatureMatrix::from_parts(data, col_meta, labels)
}

/// Convenience wrapper for the experiment variants.
pub fn build_variant_matrix(
    d: &Dataset,
    variant: DatasetVariant,
) -> Result<FeatureMatrix, FeatureError> {
    build_feature_matrix(d, variant.kinds())
}

/// Restricts every kind's columns to (up to) `n` log-spaced frequencies in
/// `[f_lo, f_hi]`, snapping each target to the nearest grid frequency and
/// dropping duplicates. Defaults in the pipeline: band [100, 1000] Hz, n=20.
pub fn reduce_to_band(
    fm: &FeatureMatrix,
    f_lo: f64,
    f_hi: f64,
    n: usize,
) -> Result<FeatureMatrix, FeatureError> {
    let frequencies: Vec<f64> = {
        let first_kind = fm.col_meta[0].kind;
        fm.col_meta
            .iter()
            .filter(|m| m.kind == first_kind)
            .map(|m| m.frequency_hz)
            .collect()
    };
    let grid_min = frequencies.first().copied().unwrap_or(f64::NAN);
    let grid_max = frequencies.last().copied().unwrap_or(f64::NAN);
    if !(f_lo > 0.0 && f_lo < f_hi) || f_lo < grid_min || f_hi > grid_max || n == 0 {
        return Err(FeatureError::BadBand { f_lo, f_hi });
    }

    let targets: Vec<f64> = if n == 1 {
        vec![(f_lo * f_hi).sqrt()]
    } else {
        let ratio = f_hi / f_lo;
        (0..n)
            .map(|k| f_lo * ratio.powf(k as f64 / (n - 1) as f64))
            .collect()
    };

    let mut selected: Vec<usize> = Vec::with_capacity(n);
    for target in targets {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &f) in frequencies.iter().enumerate() {
            let dist = (f - target).abs();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        if !selected.contains(&best) {
            selected.push(best);
        }
    }
    if selected.is_empty() {
        return Err(FeatureError::EmptySelection);
    }

    let n_freq = frequencies.len();
    let mut col_indices = Vec::new();
    let mut kind_starts: Vec<(FeatureKind, usize)> = Vec::new();
    for (c, meta) in fm.col_meta.iter().enumerate() {
        if !kind_starts.iter().any(|(k, _)| *k == meta.kind) {
            kind_starts.push((meta.kind, c));
        }
    }
    for &(_, start) in &kind_starts {
        debug_assert!(start + n_freq <= fm.cols);
        for &idx in &selected {
            col_indices.push(start + idx);
        }
    }
    Ok(fm.select_cols(&col_indices))
}

/// Per-column mean and population standard deviation of a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Standard-deviation floor; columns at or below it are treated as constant
/// and standardize to exactly zero.
pub const STD_FLOOR: f64 = 1e-12;

pub fn standardize_fit(train: &FeatureMatrix) -> StandardizationStats {
    let rows = train.rows() as f64;
    let cols = train.cols();
    let mut mean = vec![0.0; cols];
    for r in 0..train.rows() {
        for (c, m) in mean.iter_mut().enumerate() {
            *m += train.get(r, c);
        }
    }
    for m in mean.iter_mut() {
        *m /= rows;
    }
    let mut var = vec![0.0; cols];
    for r in 0..train.rows() {
        for (c, v) in var.iter_mut().enumerate() {
            let d = train.get(r, c) - mean[c];
            *v += d * d;
        }
    }
    let std = var.iter().map(|v| (v / rows).sqrt()).collect();
    StandardizationStats { mean, std }
}

/// Applies `(x − mean)/std` columnwise with the training statistics.
/// Columns whose training std is at or below [`STD_FLOOR`] become zero.
pub fn standardize_apply(
    stats: &StandardizationStats,
    fm: &FeatureMatrix,
) -> Result<FeatureMatrix, FeatureError> {
    if stats.mean.len() != fm.cols() {
        return Err(FeatureError::ColumnMismatch {
            got: fm.cols(),
            expected: stats.mean.len(),
        });
    }
    let mut out = fm.clone();
    for r in 0..out.rows {
        for c in 0..out.cols {
            let idx = r * out.cols + c;
            out.data[idx] = standardize_value(stats, c, out.data[idx]);
        }
    }
    Ok(out)
}

/// Standardizes a single value with column `col`'s training statistics.
pub fn standardize_value(stats: &StandardizationStats, col: usize, x: f64) -> f64 {
    if stats.std[col] <= STD_FLOOR {
        0.0
    } else {
        (x - stats.mean[col]) / stats.std[col]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{extract_series, make_log_grid, FrequencyGrid};
    use crate::synth::{default_kind_bundle, generate_kind_dataset};

    fn kind_dataset(points: usize, samples: usize) -> Dataset {
        let grid = make_log_grid(100.0, 100_000.0, points).unwrap();
        generate_kind_dataset(&default_kind_bundle(), samples, &grid, 0).unwrap()
    }

    #[test]
    fn variant_shapes() {
        let d = kind_dataset(101, 10);
        let b = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        assert_eq!((b.rows(), b.cols()), (200, 202));
        let c = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        assert_eq!((c.rows(), c.cols()), (200, 101));
        let a = build_variant_matrix(&d, DatasetVariant::A).unwrap();
        assert_eq!((a.rows(), a.cols()), (200, 202));
    }

    #[test]
    fn rows_concatenate_series() {
        let d = kind_dataset(11, 1);
        let fm = build_feature_matrix(&d, &[FeatureKind::Real, FeatureKind::Imaginary]).unwrap();
        for i in 0..2 {
            let s = d.spectrum(i).unwrap();
            let mut expect = extract_series(&s, FeatureKind::Real);
            expect.extend(extract_series(&s, FeatureKind::Imaginary));
            assert_eq!(fm.row(i), expect.as_slice());
        }
    }

    #[test]
    fn mixed_grids_rejected() {
        let mut d = kind_dataset(11, 1);
        d.observations[3].values.pop();
        let err = build_feature_matrix(&d, &[FeatureKind::Amplitude]).unwrap_err();
        assert_eq!(
            err,
            FeatureError::MixedGrids {
                index: 3,
                values: 10,
                grid: 11
            }
        );
    }

    #[test]
    fn duplicate_kinds_rejected() {
        let d = kind_dataset(5, 1);
        let err =
            build_feature_matrix(&d, &[FeatureKind::Amplitude, FeatureKind::Amplitude]).unwrap_err();
        assert_eq!(err, FeatureError::BadKinds);
    }

    #[test]
    fn reduce_standard_grid_default_band() {
        let d = kind_dataset(101, 1);
        let fm = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        let reduced = reduce_to_band(&fm, 100.0, 1000.0, 20).unwrap();
        assert_eq!(reduced.cols(), 20);
        let freqs: Vec<f64> = reduced.col_meta().iter().map(|m| m.frequency_hz).collect();
        assert_eq!(freqs[0], 100.0);
        assert!(freqs.windows(2).all(|w| w[0] < w[1]));
        assert!(freqs.iter().all(|&f| (100.0..=1000.0).contains(&f)));

        let two_kinds = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        let reduced = reduce_to_band(&two_kinds, 100.0, 1000.0, 20).unwrap();
        assert_eq!(reduced.cols(), 40);
    }

    #[test]
    fn reduce_n1_snaps_to_log_midpoint() {
        let d = kind_dataset(101, 1);
        let fm = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        let reduced = reduce_to_band(&fm, 100.0, 1000.0, 1).unwrap();
        assert_eq!(reduced.cols(), 1);
        let target = (100.0f64 * 1000.0).sqrt();
        let grid = make_log_grid(100.0, 100_000.0, 101).unwrap();
        let expect = grid.points()[grid.nearest_index(target)];
        assert_eq!(reduced.col_meta()[0].frequency_hz, expect);
    }

    #[test]
    fn reduce_rejects_bad_band() {
        let d = kind_dataset(11, 1);
        let fm = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        assert!(reduce_to_band(&fm, 10.0, 1000.0, 5).is_err());
        assert!(reduce_to_band(&fm, 100.0, 1e9, 5).is_err());
        assert!(reduce_to_band(&fm, 500.0, 200.0, 5).is_err());
        assert!(reduce_to_band(&fm, 100.0, 1000.0, 0).is_err());
    }

    #[test]
    fn reduced_frequencies_are_grid_subset() {
        let d = kind_dataset(101, 1);
        let fm = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        let grid: Vec<f64> = d.grid.points().to_vec();
        let reduced = reduce_to_band(&fm, 150.0, 5000.0, 12).unwrap();
        for m in reduced.col_meta() {
            assert!(grid.contains(&m.frequency_hz));
        }
    }

    #[test]
    fn standardize_hand_example() {
        // Column [1, 3]: mean 2, population std 1, standardized [−1, 1].
        let fm = FeatureMatrix::from_parts(
            vec![1.0, 3.0],
            vec![ColumnMeta {
                kind: FeatureKind::Amplitude,
                frequency_hz: 100.0,
            }],
            vec![0, 1],
        )
        .unwrap();
        let stats = standardize_fit(&fm);
        assert_eq!(stats.mean, vec![2.0]);
        assert_eq!(stats.std, vec![1.0]);
        let out = standardize_apply(&stats, &fm).unwrap();
        assert_eq!(out.data(), &[-1.0, 1.0]);
    }

    #[test]
    fn standardize_constant_column_is_zeroed() {
        let fm = FeatureMatrix::from_parts(
            vec![0.1, 7.0, 0.1, 9.0, 0.1, 11.0],
            vec![
                ColumnMeta {
                    kind: FeatureKind::Amplitude,
                    frequency_hz: 100.0,
                },
                ColumnMeta {
                    kind: FeatureKind::Amplitude,
                    frequency_hz: 200.0,
                },
            ],
            vec![0, 1, 2],
        )
        .unwrap();
        let stats = standardize_fit(&fm);
        let out = standardize_apply(&stats, &fm).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(1, 0), 0.0);
        assert_eq!(out.get(2, 0), 0.0);
        assert!(out.get(2, 1) > 0.0);
    }

    #[test]
    fn standardized_train_has_zero_mean_unit_std() {
        let d = kind_dataset(21, 3);
        let fm = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        let stats = standardize_fit(&fm);
        let out = standardize_apply(&stats, &fm).unwrap();
        let restats = standardize_fit(&out);
        for c in 0..out.cols() {
            assert!(restats.mean[c].abs() < 1e-10);
            if stats.std[c] > STD_FLOOR {
                assert!((restats.std[c] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn standardize_apply_twice_is_identity_for_nonconstant() {
        let d = kind_dataset(21, 3);
        let fm = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        let stats = standardize_fit(&fm);
        let once = standardize_apply(&stats, &fm).unwrap();
        let stats2 = standardize_fit(&once);
        let twice = standardize_apply(&stats2, &once).unwrap();
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn apply_rejects_column_mismatch() {
        let d = kind_dataset(11, 1);
        let a = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        let b = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        let stats = standardize_fit(&a);
        assert_eq!(
            standardize_apply(&stats, &b).unwrap_err(),
            FeatureError::ColumnMismatch {
                got: 22,
                expected: 11
            }
        );
    }

    #[test]
    fn row_from_spectrum_matches_matrix_rows() {
        let d = kind_dataset(21, 2);
        let fm = build_variant_matrix(&d, DatasetVariant::B).unwrap();
        let reduced = reduce_to_band(&fm, 100.0, 1000.0, 5).unwrap();
        let s = d.spectrum(7).unwrap();
        let row = reduced.row_from_spectrum(&s).unwrap();
        assert_eq!(row.as_slice(), reduced.row(7));
    }

    #[test]
    fn row_from_spectrum_rejects_missing_frequency() {
        let d = kind_dataset(21, 1);
        let fm = build_variant_matrix(&d, DatasetVariant::C).unwrap();
        let other_grid = FrequencyGrid::explicit(vec![55.0, 66.0, 77.0]).unwrap();
        let s = crate::spectrum::Spectrum::new(
            other_grid,
            vec![crate::spectrum::ComplexImpedance::new(1.0, 0.0); 3],
            Default::default(),
        )
        .unwrap();
        assert!(matches!(
            fm.row_from_spectrum(&s).unwrap_err(),
            FeatureError::FrequencyNotInGrid { .. }
        ));
    }
}
