//! Equivalent-circuit models: resistors, capacitors and constant-phase
//! elements composed in series/parallel trees, plus impedance evaluation.
//!
//! The JSON schema uses element tags `"R"`, `"C"`, `"CPE"` and composition
//! tags `"series"`, `"parallel"`:
//!
//! ```json
//! {"type": "series", "children": [
//!   {"type": "R", "value": 50.0},
//!   {"type": "parallel", "children": [
//!     {"type": "R", "value": 1000.0},
//!     {"type": "CPE", "q": 1e-6, "alpha": 0.9}
//!   ]}
//! ]}
//! ```

use crate::spectrum::ComplexImpedance;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("resistance must be positive and finite, got {0}")]
    BadResistance(f64),
    #[error("capacitance must be positive and finite, got {0}")]
    BadCapacitance(f64),
    #[error("CPE coefficient must be positive and finite, got {0}")]
    BadCpeCoefficient(f64),
    #[error("CPE exponent must lie in [0, 1], got {0}")]
    BadCpeExponent(f64),
    #[error("angular frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("series/parallel composition needs at least 2 children, got {0}")]
    TooFewChildren(usize),
    #[error("parallel combination has zero or non-finite total admittance")]
    DegenerateParallel,
    #[error("parameter vector has {got} entries, circuit has {expected}")]
    ParamCountMismatch { got: usize, expected: usize },
}

/// A single ideal circuit element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Element {
    #[serde(rename = "R")]
    Resistor { value: f64 },
    #[serde(rename = "C")]
    Capacitor { value: f64 },
    /// Impedance `1/(Q·(jω)^α)` on the principal branch: magnitude
    /// `1/(Q·ω^α)`, phase `−απ/2`. `α = 1` is an ideal capacitor with
    /// `Q = C`; `α = 0` a resistor with `R = 1/Q`.
    #[serde(rename = "CPE")]
    ConstantPhase { q: f64, alpha: f64 },
}

impl Element {
    pub fn validate(&self) -> Result<(), CircuitError> {
        match *self {
            Element::Resistor { value } => {
                if value > 0.0 && value.is_finite() {
                    Ok(())
                } else {
                    Err(CircuitError::BadResistance(value))
                }
            }
            Element::Capacitor { value } => {
                if value > 0.0 && value.is_finite() {
                    Ok(())
                } else {
                    Err(CircuitError::BadCapacitance(value))
                }
            }
            Element::ConstantPhase { q, alpha } => {
                if !(q > 0.0 && q.is_finite()) {
                    Err(CircuitError::BadCpeCoefficient(q))
                } else if !(0.0..=1.0).contains(&alpha) {
                    Err(CircuitError::BadCpeExponent(alpha))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Element::Resistor { .. } | Element::Capacitor { .. } => 1,
            Element::ConstantPhase { .. } => 2,
        }
    }

    fn push_params(&self, out: &mut Vec<f64>) {
        match *self {
            Element::Resistor { value } | Element::Capacitor { value } => out.push(value),
            Element::ConstantPhase { q, alpha } => {
                out.push(q);
                out.push(alpha);
            }
        }
    }

    fn push_param_names(&self, prefix: &str, out: &mut Vec<String>) {
        match self {
            Element::Resistor { .. } => out.push(format!("{prefix}R")),
            Element::Capacitor { .. } => out.push(format!("{prefix}C")),
            Element::ConstantPhase { .. } => {
                out.push(format!("{prefix}Q"));
                out.push(format!("{prefix}alpha"));
            }
        }
    }

    fn rebuilt_with(&self, params: &[f64]) -> Element {
        match self {
            Element::Resistor { .. } => Element::Resistor { value: params[0] },
            Element::Capacitor { .. } => Element::Capacitor { value: params[0] },
            Element::ConstantPhase { .. } => Element::ConstantPhase {
                q: params[0],
                alpha: params[1],
            },
        }
    }
}

/// Complex impedance of a single element at angular frequency `omega` rad/s.
pub fn element_impedance(e: &Element, omega: f64) -> Result<ComplexImpedance, CircuitError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(CircuitError::BadFrequency(omega));
    }
    let z = match *e {
        Element::Resistor { value } => Complex64::new(value, 0.0),
        Element::Capacitor { value } => Complex64::new(0.0, -1.0 / (omega * value)),
        Element::ConstantPhase { q, alpha } => {
            let magnitude = 1.0 / (q * omega.powf(alpha));
            let phase = -alpha * FRAC_PI_2;
            Complex64::from_polar(magnitude, phase)
        }
    };
    Ok(z.into())
}

/// An expression tree of elements in series and parallel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub enum CircuitModel {
    Leaf(Element),
    Series(Vec<CircuitModel>),
    Parallel(Vec<CircuitModel>),
}

/// Wire form of [`CircuitModel`] (see module docs for the schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
enum CircuitJson {
    #[serde(rename = "R")]
    R { value: f64 },
    #[serde(rename = "C")]
    C { value: f64 },
    #[serde(rename = "CPE")]
    Cpe { q: f64, alpha: f64 },
    #[serde(rename = "series")]
    Series { children: Vec<CircuitJson> },
    #[serde(rename = "parallel")]
    Parallel { children: Vec<CircuitJson> },
}

impl TryFrom<CircuitJson> for CircuitModel {
    type Error = CircuitError;

    fn try_from(node: CircuitJson) -> Result<Self, CircuitError> {
        let model = match node {
            CircuitJson::R { value } => CircuitModel::Leaf(Element::Resistor { value }),
            CircuitJson::C { value } => CircuitModel::Leaf(Element::Capacitor { value }),
            CircuitJson::Cpe { q, alpha } => {
                CircuitModel::Leaf(Element::ConstantPhase { q, alpha })
            }
            CircuitJson::Series { children } => CircuitModel::Series(
                children
                    .into_iter()
                    .map(CircuitModel::try_from)
                    .collect::<Result<_, _>>()?,
            ),
            CircuitJson::Parallel { children } => CircuitModel::Parallel(
                children
                    .into_iter()
                    .map(CircuitModel::try_from)
                    .collect::<Result<_, _>>()?,
            ),
        };
        model.validate()?;
        Ok(model)
    }
}

impl From<CircuitModel> for CircuitJson {
    fn from(model: CircuitModel) -> Self {
        match model {
            CircuitModel::Leaf(Element::Resistor { value }) => CircuitJson::R { value },
            CircuitModel::Leaf(Element::Capacitor { value }) => CircuitJson::C { value },
            CircuitModel::Leaf(Element::ConstantPhase { q, alpha }) => {
                CircuitJson::Cpe { q, alpha }
            }
            CircuitModel::Series(children) => CircuitJson::Series {
                children: children.into_iter().map(CircuitJson::from).collect(),
            },
            CircuitModel::Parallel(children) => CircuitJson::Parallel {
                children: children.into_iter().map(CircuitJson::from).collect(),
            },
        }
    }
}

impl CircuitModel {
    /// Series composition; panics on fewer than 2 children only via
    /// `validate`, so construction through this helper stays infallible for
    /// static templates.
    pub fn series(children: Vec<CircuitModel>) -> CircuitModel {
        CircuitModel::Series(children)
    }

    pub fn parallel(children: Vec<CircuitModel>) -> CircuitModel {
        CircuitModel::Parallel(children)
    }

    pub fn resistor(value: f64) -> CircuitModel {
        CircuitModel::Leaf(Element::Resistor { value })
    }

    pub fn capacitor(value: f64) -> CircuitModel {
        CircuitModel::Leaf(Element::Capacitor { value })
    }

    pub fn cpe(q: f64, alpha: f64) -> CircuitModel {
        CircuitModel::Leaf(Element::ConstantPhase { q, alpha })
    }

    /// Checks element parameter ranges and composition arity.
    pub fn validate(&self) -> Result<(), CircuitError> {
        match self {
            CircuitModel::Leaf(e) => e.validate(),
            CircuitModel::Series(children) | CircuitModel::Parallel(children) => {
                if children.len() < 2 {
                    return Err(CircuitError::TooFewChildren(children.len()));
                }
                children.iter().try_for_each(CircuitModel::validate)
            }
        }
    }

    /// Number of scalar parameters in depth-first order.
    pub fn param_count(&self) -> usize {
        match self {
            CircuitModel::Leaf(e) => e.param_count(),
            CircuitModel::Series(c) | CircuitModel::Parallel(c) => {
                c.iter().map(CircuitModel::param_count).sum()
            }
        }
    }

    /// Parameters in depth-first, left-to-right order (CPE contributes Q
    /// then alpha).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<f64>) {
        match self {
            CircuitModel::Leaf(e) => e.push_params(out),
            CircuitModel::Series(c) | CircuitModel::Parallel(c) => {
                c.iter().for_each(|m| m.collect_params(out))
            }
        }
    }

    /// Human-readable names for each parameter slot, e.g. `["R", "R.1"]`.
    pub fn param_names(&self) -> Vec<String> {
        let mut raw = Vec::new();
        self.collect_param_names("", &mut raw);
        // Disambiguate repeated names with a positional suffix.
        let mut out = Vec::with_capacity(raw.len());
        for (i, name) in raw.iter().enumerate() {
            let earlier = raw[..i].iter().filter(|n| *n == name).count();
            if earlier == 0 && !raw[i + 1..].contains(name) {
                out.push(name.clone());
            } else {
                out.push(format!("{name}.{earlier}"));
            }
        }
        out
    }

    fn collect_param_names(&self, prefix: &str, out: &mut Vec<String>) {
        match self {
            CircuitModel::Leaf(e) => e.push_param_names(prefix, out),
            CircuitModel::Series(c) | CircuitModel::Parallel(c) => {
                c.iter().for_each(|m| m.collect_param_names(prefix, out))
            }
        }
    }

    /// Rebuilds the same topology with new parameter values (depth-first
    /// order, validated).
    pub fn with_params(&self, params: &[f64]) -> Result<CircuitModel, CircuitError> {
        if params.len() != self.param_count() {
            return Err(CircuitError::ParamCountMismatch {
                got: params.len(),
                expected: self.param_count(),
            });
        }
        let mut offset = 0;
        let rebuilt = self.rebuild(params, &mut offset);
        rebuilt.validate()?;
        Ok(rebuilt)
    }

    fn rebuild(&self, params: &[f64], offset: &mut usize) -> CircuitModel {
        match self {
            CircuitModel::Leaf(e) => {
                let n = e.param_count();
                let slice = &params[*offset..*offset + n];
                *offset += n;
                CircuitModel::Leaf(e.rebuilt_with(slice))
            }
            CircuitModel::Series(c) => {
                CircuitModel::Series(c.iter().map(|m| m.rebuild(params, offset)).collect())
            }
            CircuitModel::Parallel(c) => {
                CircuitModel::Parallel(c.iter().map(|m| m.rebuild(params, offset)).collect())
            }
        }
    }
}

/// Complex impedance of a circuit at angular frequency `omega` rad/s.
/// Series children add impedances; parallel children add admittances.
pub fn circuit_impedance(c: &CircuitModel, omega: f64) -> Result<ComplexImpedance, CircuitError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(CircuitError::BadFrequency(omega));
    }
    eval(c, omega).map(ComplexImpedance::from)
}

fn eval(c: &CircuitModel, omega: f64) -> Result<Complex64, CircuitError> {
    match c {
        CircuitModel::Leaf(e) => element_impedance(e, omega).map(Complex64::from),
        CircuitModel::Series(children) => {
            let mut total = Complex64::new(0.0, 0.0);
            for child in children {
                total += eval(child, omega)?;
            }
            Ok(total)
        }
        CircuitModel::Parallel(children) => {
            let mut admittance = Complex64::new(0.0, 0.0);
            for child in children {
                let z = eval(child, omega)?;
                admittance += z.finv();
            }
            if admittance.norm() == 0.0 || !admittance.is_finite() {
                return Err(CircuitError::DegenerateParallel);
            }
            Ok(admittance.finv())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn resistor_is_flat() {
        let z = element_impedance(&Element::Resistor { value: 100.0 }, 10_000.0).unwrap();
        assert_eq!((z.real, z.imag), (100.0, 0.0));
    }

    #[test]
    fn capacitor_at_10k_rad() {
        // 1/(jωC) with ω=1e4, C=1e-6 → -j·100
        let z = element_impedance(&Element::Capacitor { value: 1e-6 }, 10_000.0).unwrap();
        assert!(z.real.abs() < 1e-12);
        assert!((z.imag + 100.0).abs() < 1e-9);
    }

    #[test]
    fn cpe_alpha_one_reduces_to_capacitor() {
        let cpe = element_impedance(&Element::ConstantPhase { q: 1e-6, alpha: 1.0 }, 10_000.0)
            .unwrap();
        let cap = element_impedance(&Element::Capacitor { value: 1e-6 }, 10_000.0).unwrap();
        assert!((cpe.real - cap.real).abs() < 1e-9);
        assert!((cpe.imag - cap.imag).abs() < 1e-9);
    }

    #[test]
    fn cpe_alpha_zero_reduces_to_resistor() {
        let z = element_impedance(&Element::ConstantPhase { q: 0.01, alpha: 0.0 }, 123.0).unwrap();
        assert!((z.real - 100.0).abs() < 1e-9);
        assert!(z.imag.abs() < 1e-12);
    }

    #[test]
    fn element_phase_ranges() {
        // resistor 0, capacitor −π/2, CPE −απ/2 within 1e−12
        for &omega in &[1.0, 628.0, 1e5] {
            let r = element_impedance(&Element::Resistor { value: 42.0 }, omega).unwrap();
            assert_eq!(r.phase(), 0.0);
            let c = element_impedance(&Element::Capacitor { value: 3e-7 }, omega).unwrap();
            assert!((c.phase() + FRAC_PI_2).abs() < 1e-12);
            for &alpha in &[0.0, 0.3, 0.5, 0.85, 1.0] {
                let z =
                    element_impedance(&Element::ConstantPhase { q: 2e-6, alpha }, omega).unwrap();
                assert!((z.phase() + alpha * FRAC_PI_2).abs() < 1e-12);
                assert!((-FRAC_PI_2..=0.0).contains(&z.phase()));
            }
        }
    }

    #[test]
    fn parallel_resistors_halve() {
        let c = CircuitModel::parallel(vec![
            CircuitModel::resistor(100.0),
            CircuitModel::resistor(100.0),
        ]);
        for &omega in &[1.0, 1e3, 1e6] {
            let z = circuit_impedance(&c, omega).unwrap();
            assert!((z.real - 50.0).abs() < 1e-12);
            assert!(z.imag.abs() < 1e-12);
        }
    }

    #[test]
    fn series_rc_at_10k_rad() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(100.0),
            CircuitModel::capacitor(1e-6),
        ]);
        let z = circuit_impedance(&c, 10_000.0).unwrap();
        assert!((z.real - 100.0).abs() < 1e-9);
        assert!((z.imag + 100.0).abs() < 1e-9);
        let (amp, phase) = (z.amplitude(), z.phase());
        assert!((amp - 141.4214).abs() < 1e-3);
        assert!((phase + FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn randles_dc_limit() {
        // Series(Rs=50, Parallel(Rct=100, C=1e−6)) at ω→0⁺ approaches Rs+Rct.
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(50.0),
            CircuitModel::parallel(vec![
                CircuitModel::resistor(100.0),
                CircuitModel::capacitor(1e-6),
            ]),
        ]);
        let z = circuit_impedance(&c, 1e-3).unwrap();
        assert!((z.real - 150.0).abs() < 1e-3);
        assert!(z.imag.abs() < 1e-3);
    }

    #[test]
    fn series_is_additive() {
        let a = CircuitModel::parallel(vec![
            CircuitModel::resistor(220.0),
            CircuitModel::cpe(3e-6, 0.8),
        ]);
        let b = CircuitModel::series(vec![
            CircuitModel::resistor(10.0),
            CircuitModel::capacitor(5e-7),
        ]);
        for &omega in &[10.0, 1e3, 1e5] {
            let za = circuit_impedance(&a, omega).unwrap();
            let zb = circuit_impedance(&b, omega).unwrap();
            let zs = circuit_impedance(
                &CircuitModel::series(vec![a.clone(), b.clone()]),
                omega,
            )
            .unwrap();
            let scale = zs.amplitude();
            assert!((zs.real - (za.real + zb.real)).abs() / scale < 1e-12);
            assert!((zs.imag - (za.imag + zb.imag)).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn series_rc_amplitude_monotone_on_standard_grid() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(100.0),
            CircuitModel::capacitor(1e-6),
        ]);
        let grid = crate::spectrum::FrequencyGrid::standard();
        let mut last = f64::INFINITY;
        for &f in grid.points() {
            let amp = circuit_impedance(&c, 2.0 * PI * f).unwrap().amplitude();
            assert!(amp <= last + 1e-12);
            last = amp;
        }
    }

    #[test]
    fn degenerate_parallel_reports_error() {
        // Fields are public, so an unvalidated infinite resistor can reach
        // evaluation; it must surface as an error, not NaN.
        let c = CircuitModel::parallel(vec![
            CircuitModel::resistor(f64::INFINITY),
            CircuitModel::resistor(f64::INFINITY),
        ]);
        assert_eq!(
            circuit_impedance(&c, 100.0).unwrap_err(),
            CircuitError::DegenerateParallel
        );
    }

    #[test]
    fn omega_must_be_positive() {
        let r = CircuitModel::resistor(1.0);
        assert!(circuit_impedance(&r, 0.0).is_err());
        assert!(circuit_impedance(&r, -5.0).is_err());
    }

    #[test]
    fn params_round_trip_depth_first() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(50.0),
            CircuitModel::parallel(vec![
                CircuitModel::resistor(1000.0),
                CircuitModel::cpe(1e-6, 0.9),
            ]),
        ]);
        assert_eq!(c.param_count(), 4);
        assert_eq!(c.params(), vec![50.0, 1000.0, 1e-6, 0.9]);
        let rebuilt = c.with_params(&[60.0, 900.0, 2e-6, 0.8]).unwrap();
        assert_eq!(rebuilt.params(), vec![60.0, 900.0, 2e-6, 0.8]);
        assert!(c.with_params(&[1.0]).is_err());
        assert!(c.with_params(&[60.0, 900.0, 2e-6, 1.8]).is_err());
    }

    #[test]
    fn param_names_disambiguate() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(1.0),
            CircuitModel::resistor(2.0),
            CircuitModel::cpe(1e-6, 0.9),
        ]);
        assert_eq!(c.param_names(), vec!["R.0", "R.1", "Q", "alpha"]);
    }

    #[test]
    fn json_schema_round_trip() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(50.0),
            CircuitModel::parallel(vec![
                CircuitModel::resistor(1000.0),
                CircuitModel::cpe(1e-6, 0.9),
            ]),
        ]);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"type\":\"series\""));
        assert!(json.contains("\"type\":\"CPE\""));
        let back: CircuitModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn json_rejects_invalid_parameters() {
        let err = serde_json::from_str::<CircuitModel>(r#"{"type":"R","value":-5.0}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<CircuitModel>(
            r#"{"type":"series","children":[{"type":"R","value":1.0}]}"#,
        );
        assert!(err.is_err());
    }
}
