//! Central finite differences for checking analytic derivatives.

/// Central-difference Jacobian of a vector-valued function.
///
/// Entry `[i][k]` approximates `∂f_i/∂p_k` with a per-parameter step of
/// `rel_h·|p_k|` (floored at `rel_h` for near-zero parameters), which keeps
/// the step meaningful when parameters span many decades.
pub fn jacobian<F>(f: F, p: &[f64], rel_h: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(p).len();
    let n = p.len();
    let mut jac = vec![vec![0.0; n]; m];
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    for k in 0..n {
        let step = rel_h * p[k].abs().max(rel_h);
        plus[k] = p[k] + step;
        minus[k] = p[k] - step;
        let fp = f(&plus);
        let fm = f(&minus);
        for i in 0..m {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * step);
        }
        plus[k] = p[k];
        minus[k] = p[k];
    }
    jac
}

/// Central-difference gradient of a scalar function with absolute step `h`.
pub fn gradient<F>(f: F, p: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    let mut g = vec![0.0; p.len()];
    for k in 0..p.len() {
        plus[k] = p[k] + h;
        minus[k] = p[k] - h;
        g[k] = (f(&plus) - f(&minus)) / (2.0 * h);
        plus[k] = p[k];
        minus[k] = p[k];
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let f = |p: &[f64]| p[0] * p[0] + 3.0 * p[1];
        let g = gradient(f, &[2.0, 5.0], 1e-6);
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }
}
