//! First right singular vector by one-sided Jacobi, and the frequency
//! importance profile built on it.
//!
//! One-sided Jacobi rotates column pairs of the (optionally column-centered)
//! matrix until all columns are mutually orthogonal, accumulating the
//! rotations into V. At convergence the column norms are the singular values
//! and V holds the right singular vectors. The test suites check the result
//! against an independent dense eigendecomposition of MᵀM.

use crate::features::{FeatureError, FeatureMatrix};
use crate::spectrum::FeatureKind;
use serde::{Deserialize, Serialize};

/// Frequency-importance weights for one feature kind: |v₁| entries of the
/// column-centered matrix restricted to that kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceProfile {
    pub kind: FeatureKind,
    pub frequencies_hz: Vec<f64>,
    pub weights: Vec<f64>,
    pub peak_frequency_hz: f64,
}

/// Unit-norm right singular vector for the largest singular value of the
/// row-major `rows × cols` matrix, sign-fixed so the largest-magnitude entry
/// is positive. With `center` set (the pipeline default) columns are
/// mean-centered first, making the vector the direction of maximal variance.
pub fn first_right_singular_vector(
    rows: usize,
    cols: usize,
    data: &[f64],
    center: bool,
) -> Result<Vec<f64>, FeatureError> {
    assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
    if rows == 0 || cols == 0 {
        return Err(FeatureError::EmptyDataset);
    }

    // Column-major working copy of the (centered) matrix.
    let mut w: Vec<Vec<f64>> = (0..cols)
        .map(|c| (0..rows).map(|r| data[r * cols + c]).collect())
        .collect();
    if center {
        for col in w.iter_mut() {
            let mean = col.iter().sum::<f64>() / rows as f64;
            for x in col.iter_mut() {
                *x -= mean;
            }
        }
    }
    if w.iter().flatten().all(|x| *x == 0.0) {
        return Err(FeatureError::NoPrincipalDirection);
    }

    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|c| {
            let mut col = vec![0.0; cols];
            col[c] = 1.0;
            col
        })
        .collect();

    const TOL: f64 = 1e-14;
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let (a, b, c) = {
                    let (wi, wj) = (&w[i], &w[j]);
                    let a: f64 = wi.iter().map(|x| x * x).sum();
                    let b: f64 = wj.iter().map(|x| x * x).sum();
                    let c: f64 = wi.iter().zip(wj).map(|(x, y)| x * y).sum();
                    (a, b, c)
                };
                if c.abs() <= TOL * (a * b).sqrt() || a == 0.0 || b == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * c);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;

                let (left, right) = w.split_at_mut(j);
                let wi = &mut left[i];
                let wj = &mut right[0];
                for (x, y) in wi.iter_mut().zip(wj.iter_mut()) {
                    let xi = *x;
                    let yj = *y;
                    *x = cs * xi - sn * yj;
                    *y = sn * xi + cs * yj;
                }
                let (vleft, vright) = v.split_at_mut(j);
                let vi = &mut vleft[i];
                let vj = &mut vright[0];
                for (x, y) in vi.iter_mut().zip(vj.iter_mut()) {
                    let xi = *x;
                    let yj = *y;
                    *x = cs * xi - sn * yj;
                    *y = sn * xi + cs * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Largest column norm wins; ties keep the first column.
    let mut best = 0;
    let mut best_norm = -1.0;
    for (c, col) in w.iter().enumerate() {
        let norm: f64 = col.iter().map(|x| x * x).sum();
        if norm > best_norm {
            best = c;
            best_norm = norm;
        }
    }

    let mut v1 = v[best].clone();
    let norm: f64 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v1.iter_mut() {
        *x /= norm;
    }
    let mut lead = 0;
    for (i, x) in v1.iter().enumerate() {
        if x.abs() > v1[lead].abs() {
            lead = i;
        }
    }
    if v1[lead] < 0.0 {
        for x in v1.iter_mut() {
            *x = -*x;
        }
    }
    Ok(v1)
}

/// [`first_right_singular_vector`] over a feature matrix, centered.
pub fn matrix_first_right_singular_vector(
    fm: &FeatureMatrix,
) -> Result<Vec<f64>, FeatureError> {
    first_right_singular_vector(fm.rows(), fm.cols(), fm.data(), true)
}

/// Importance profile of a single-kind matrix with the default centering.
pub fn importance_profile(fm: &FeatureMatrix) -> Result<ImportanceProfile, FeatureError> {
    importance_profile_with(fm, true)
}

/// Importance profile with explicit centering control. Weights are |v₁|
/// aligned to the matrix's frequencies; the peak is the argmax (ties go to
/// the lowest frequency).
pub fn importance_profile_with(
    fm: &FeatureMatrix,
    center: bool,
) -> Result<ImportanceProfile, FeatureError> {
    let kind = fm.single_kind()?;
    let v1 = first_right_singular_vector(fm.rows(), fm.cols(), fm.data(), center)?;
    let weights: Vec<f64> = v1.iter().map(|x| x.abs()).collect();
    let frequencies_hz: Vec<f64> = fm.col_meta().iter().map(|m| m.frequency_hz).collect();
    let mut peak = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > weights[peak] {
            peak = i;
        }
    }
    Ok(ImportanceProfile {
        kind,
        peak_frequency_hz: frequencies_hz[peak],
        frequencies_hz,
        weights,
    })
}
