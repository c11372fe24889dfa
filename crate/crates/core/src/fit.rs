//! Complex nonlinear least squares: recover circuit parameters from a
//! spectrum with Levenberg–Marquardt.
//!
//! Residuals stack the weighted real parts of (model − target) over all
//! points, then the weighted imaginary parts. Optimization runs on the
//! logarithms of the parameters so positivity holds by construction across
//! the decades EIS parameters span; results are reported in linear space.

use crate::circuit::{circuit_impedance, CircuitError, CircuitModel};
use crate::spectrum::{ComplexImpedance, Spectrum};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("a fit needs at least one free parameter")]
    NoFreeParameters,
    #[error("free parameter index {index} out of range for {count} parameters")]
    FreeIndexOutOfRange { index: usize, count: usize },
    #[error("parameter vector has {got} entries, problem has {expected} free parameters")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("parameters must be positive and finite")]
    NonPositiveParameter,
    #[error("singular normal equations at damping ceiling")]
    SingularNormalEquations,
    #[error("target spectrum is empty")]
    EmptyTarget,
}

/// Residual weighting scheme. Proportional (1/|Z|) is the default: |Z|
/// spans orders of magnitude over a sweep, and unit weights would let the
/// low-frequency points dominate the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Unit,
    #[default]
    Proportional,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unit" => Ok(Weighting::Unit),
            "proportional" => Ok(Weighting::Proportional),
            other => Err(format!("unknown weighting `{other}`")),
        }
    }
}

/// A target spectrum, a circuit template, and the subset of its parameters
/// (depth-first indices) to optimize.
#[derive(Debug, Clone)]
pub struct FitProblem {
    template: CircuitModel,
    free: Vec<usize>,
    target: Spectrum,
    weighting: Weighting,
    weights: Vec<f64>,
    base_params: Vec<f64>,
}

impl FitProblem {
    /// All template parameters free.
    pub fn new(
        template: CircuitModel,
        target: Spectrum,
        weighting: Weighting,
    ) -> Result<Self, FitError> {
        let count = template.param_count();
        Self::with_free(template, (0..count).collect(), target, weighting)
    }

    /// Only the listed parameter indices free; the rest stay at template
    /// values.
    pub fn with_free(
        template: CircuitModel,
        free: Vec<usize>,
        target: Spectrum,
        weighting: Weighting,
    ) -> Result<Self, FitError> {
        template.validate()?;
        if target.is_empty() {
            return Err(FitError::EmptyTarget);
        }
        if free.is_empty() {
            return Err(FitError::NoFreeParameters);
        }
        let count = template.param_count();
        for &index in &free {
            if index >= count {
                return Err(FitError::FreeIndexOutOfRange { index, count });
            }
        }
        let weights = match weighting {
            Weighting::Unit => vec![1.0; target.len()],
            Weighting::Proportional => target
                .values()
                .iter()
                .map(|z| 1.0 / z.amplitude().max(1e-300))
                .collect(),
        };
        let base_params = template.params();
        Ok(Self {
            template,
            free,
            target,
            weighting,
            weights,
            base_params,
        })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_points(&self) -> usize {
        self.target.len()
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn target(&self) -> &Spectrum {
        &self.target
    }

    /// Template values of the free parameters: the natural initial guess.
    pub fn initial_guess(&self) -> Vec<f64> {
        self.free.iter().map(|&i| self.base_params[i]).collect()
    }

    /// Names of the free parameters in optimization order.
    pub fn free_names(&self) -> Vec<String> {
        let names = self.template.param_names();
        self.free.iter().map(|&i| names[i].clone()).collect()
    }

    fn check_params(&self, p: &[f64]) -> Result<(), FitError> {
        if p.len() != self.free.len() {
            return Err(FitError::DimensionMismatch {
                got: p.len(),
                expected: self.free.len(),
            });
        }
        if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(FitError::NonPositiveParameter);
        }
        Ok(())
    }

    fn model(&self, p: &[f64]) -> Result<CircuitModel, CircuitError> {
        let mut full = self.base_params.clone();
        for (&slot, &value) in self.free.iter().zip(p) {
            full[slot] = value;
        }
        self.template.with_params(&full)
    }

    fn model_values(&self, p: &[f64]) -> Result<Vec<ComplexImpedance>, CircuitError> {
        let model = self.model(p)?;
        self.target
            .grid()
            .points()
            .iter()
            .map(|&f| circuit_impedance(&model, TAU * f))
            .collect()
    }
}

/// Weighted residual vector of length `2·n_points`: real parts first, then
/// imaginary parts.
pub fn residuals(p: &[f64], prob: &FitProblem) -> Result<Vec<f64>, FitError> {
    prob.check_params(p)?;
    let model = prob.model_values(p)?;
    Ok(stack_residuals(&model, prob))
}

fn stack_residuals(model: &[ComplexImpedance], prob: &FitProblem) -> Vec<f64> {
    let n = model.len();
    let mut out = vec![0.0; 2 * n];
    for (i, (m, t)) in model.iter().zip(prob.target.values()).enumerate() {
        let w = prob.weights[i];
        out[i] = w * (m.real - t.real);
        out[n + i] = w * (m.imag - t.imag);
    }
    out
}

/// Forward-difference Jacobian of [`residuals`] with per-parameter step
/// `h_k = max(1e−6·|p_k|, 1e−12)`. Rows follow the residual stacking; one
/// column per free parameter.
pub fn jacobian(p: &[f64], prob: &FitProblem) -> Result<Vec<Vec<f64>>, FitError> {
    prob.check_params(p)?;
    let base = residuals(p, prob)?;
    let m = base.len();
    let k = p.len();
    let mut jac = vec![vec![0.0; k]; m];
    let mut work = p.to_vec();
    for col in 0..k {
        let h = (1e-6 * p[col].abs()).max(1e-12);
        work[col] = p[col] + h;
        let shifted = residuals(&work, prob)?;
        for row in 0..m {
            jac[row][col] = (shifted[row] - base[row]) / h;
        }
        work[col] = p[col];
    }
    Ok(jac)
}

/// Levenberg–Marquardt knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub lambda0: f64,
    pub tol_step: f64,
    pub tol_grad: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            lambda0: 1e-3,
            tol_step: 1e-10,
            tol_grad: 1e-10,
        }
    }
}

/// Fit outcome. `converged == false` is not an error: the best parameters
/// seen are still returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub covariance_diag: Option<Vec<f64>>,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_trace: Vec<f64>,
}

const LAMBDA_CEILING: f64 = 1e10;
const MAX_HALVINGS: usize = 32;

/// Standard LM on log-parameters: solve `(JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀr`,
/// accept when the cost drops (λ←λ/10), reject otherwise (λ←λ·10). The
/// damping ceiling turns persistent singular normal equations into an error;
/// plain stagnation returns `converged = false` with the best point so far.
pub fn fit_circuit(prob: &FitProblem, p0: &[f64], opts: &FitOptions) -> Result<FitResult, FitError> {
    prob.check_params(p0)?;

    // θ = ln p. Steps in θ keep every parameter positive; out-of-range trial
    // circuits (e.g. a CPE exponent pushed past 1) read as infinite cost and
    // are handled by the step-halving guard below.
    let mut theta: Vec<f64> = p0.iter().map(|v| v.ln()).collect();
    let eval = |theta: &[f64]| -> Option<(Vec<f64>, f64)> {
        let p: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        if p.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return None;
        }
        let model = prob.model_values(&p).ok()?;
        let r = stack_residuals(&model, prob);
        let cost: f64 = r.iter().map(|x| x * x).sum();
        cost.is_finite().then_some((r, cost))
    };

    let (mut r, mut cost) = eval(&theta).ok_or(FitError::NonPositiveParameter)?;
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let mut converged = false;
    let mut cost_trace = vec![cost];

    'outer: for _ in 0..opts.max_iter {
        let p: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let jac_p = jacobian(&p, prob)?;
        let m = jac_p.len();
        let k = p.len();

        // Chain rule: ∂r/∂θ_k = ∂r/∂p_k · p_k.
        let mut jac = jac_p;
        for row in jac.iter_mut() {
            for (col, value) in row.iter_mut().enumerate() {
                *value *= p[col];
            }
        }

        let mut gradient = vec![0.0; k];
        for (row, ri) in jac.iter().zip(&r) {
            for (g, jv) in gradient.iter_mut().zip(row) {
                *g += jv * ri;
            }
        }
        if gradient.iter().fold(0.0f64, |acc, g| acc.max(g.abs())) < opts.tol_grad {
            converged = true;
            break;
        }

        let mut normal = vec![vec![0.0; k]; k];
        for row in &jac {
            for i in 0..k {
                for j in 0..k {
                    normal[i][j] += row[i] * row[j];
                }
            }
        }
        let _ = m;

        loop {
            let mut damped = normal.clone();
            for i in 0..k {
                damped[i][i] += lambda * normal[i][i];
            }
            let rhs: Vec<f64> = gradient.iter().map(|g| -g).collect();
            let step = match solve_linear(&damped, &rhs) {
                Some(step) => step,
                None => {
                    lambda *= 10.0;
                    if lambda > LAMBDA_CEILING {
                        return Err(FitError::SingularNormalEquations);
                    }
                    continue;
                }
            };

            let mut delta = step;
            let mut trial = None;
            for _ in 0..=MAX_HALVINGS {
                let theta_trial: Vec<f64> =
                    theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
                if let Some(result) = eval(&theta_trial) {
                    trial = Some((theta_trial, result));
                    break;
                }
                for d in delta.iter_mut() {
                    *d *= 0.5;
                }
            }

            match trial {
                Some((theta_trial, (r_trial, cost_trial))) if cost_trial < cost => {
                    let step_norm: f64 =
                        delta.iter().map(|d| d * d).sum::<f64>().sqrt();
                    let theta_norm: f64 =
                        theta.iter().map(|t| t * t).sum::<f64>().sqrt();
                    theta = theta_trial;
                    r = r_trial;
                    cost = cost_trial;
                    cost_trace.push(cost);
                    iterations += 1;
                    lambda /= 10.0;
                    if step_norm < opts.tol_step * (1.0 + theta_norm) {
                        converged = true;
                    }
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > LAMBDA_CEILING {
                        break 'outer;
                    }
                }
            }
        }
        if converged {
            break;
        }
    }

    let params: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    let covariance_diag = converged
        .then(|| covariance(&params, prob, cost))
        .flatten();
    Ok(FitResult {
        params,
        cost,
        iterations,
        converged,
        covariance_diag,
        cost_trace,
    })
}

/// Diagonal of `s²·(JᵀJ)⁻¹` at the solution, in linear parameter space.
fn covariance(params: &[f64], prob: &FitProblem, cost: f64) -> Option<Vec<f64>> {
    let jac = jacobian(params, prob).ok()?;
    let k = params.len();
    let m = jac.len();
    if m <= k {
        return None;
    }
    let mut normal = vec![vec![0.0; k]; k];
    for row in &jac {
        for i in 0..k {
            for j in 0..k {
                normal[i][j] += row[i] * row[j];
            }
        }
    }
    let s2 = cost / (m - k) as f64;
    let mut diag = Vec::with_capacity(k);
    for i in 0..k {
        let mut unit = vec![0.0; k];
        unit[i] = 1.0;
        let column = solve_linear(&normal, &unit)?;
        diag.push(s2 * column[i]);
    }
    Some(diag)
}

/// Gaussian elimination with partial pivoting; `None` when the pivot
/// collapses (singular system). The threshold is deliberately loose:
/// merely ill-conditioned systems yield a large step for the LM rejection
/// logic to throw away, while a structurally dead parameter (zero column)
/// stays singular at any damping and surfaces as an error.
fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot_row][col].abs() < 1e-30 * scale {
            return None;
        }
        m.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = x[col];
        for k in (col + 1)..n {
            sum -= m[col][k] * x[k];
        }
        x[col] = sum / m[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}
