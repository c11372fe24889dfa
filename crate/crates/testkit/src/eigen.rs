//! Dense symmetric eigendecomposition by the classical two-sided Jacobi
//! rotation method. Used to cross-check the production singular-vector
//! routine: the eigenvector of `MᵀM` for the largest eigenvalue equals the
//! first right singular vector of `M` up to sign.

/// Eigen-decomposes a symmetric matrix given as full square rows.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
pub fn symmetric_eigen(mat: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.len();
    assert!(n > 0, "empty matrix");
    for row in mat {
        assert_eq!(row.len(), n, "matrix must be square");
    }

    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    let norm: f64 = mat
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);

    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());

    let values: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i][k]).collect())
        .collect();
    (values, vectors)
}

/// Column-centers `m`, forms `MᵀM`, and returns the unit eigenvector of the
/// largest eigenvalue with the sign fixed so the largest-magnitude entry is
/// positive.
pub fn dominant_right_vector(m: &[Vec<f64>], center: bool) -> Vec<f64> {
    let rows = m.len();
    let cols = m[0].len();
    let mut work = m.to_vec();
    if center {
        for j in 0..cols {
            let mean = work.iter().map(|r| r[j]).sum::<f64>() / rows as f64;
            for row in work.iter_mut() {
                row[j] -= mean;
            }
        }
    }
    let mut gram = vec![vec![0.0; cols]; cols];
    for (i, gi) in gram.iter_mut().enumerate() {
        for (j, g) in gi.iter_mut().enumerate() {
            *g = work.iter().map(|r| r[i] * r[j]).sum();
        }
    }
    let (_, vectors) = symmetric_eigen(&gram);
    let mut v = vectors[0].clone();
    let lead = (0..v.len())
        .max_by(|&i, &j| v[i].abs().partial_cmp(&v[j].abs()).unwrap())
        .unwrap();
    if v[lead] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_is_identity() {
        let (vals, vecs) = symmetric_eigen(&[vec![3.0, 0.0], vec![0.0, 1.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!(vecs[0][0].abs() > 0.999);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let (vals, vecs) = symmetric_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[0][0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((vecs[0][1].abs() - inv_sqrt2).abs() < 1e-12);
    }
}
