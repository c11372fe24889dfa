//! Frequency grids, complex impedance samples and the feature views
//! (amplitude, phase, real, imaginary) every other module consumes.
//!
//! Angles are radians everywhere inside the library; degrees appear only at
//! I/O boundaries. NaN and infinite impedance values are rejected when a
//! [`Spectrum`] is constructed, so downstream numerics never see them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default sweep: 101 logarithmic points from 100 Hz to 100 kHz.
pub const DEFAULT_F_MIN_HZ: f64 = 100.0;
pub const DEFAULT_F_MAX_HZ: f64 = 100_000.0;
pub const DEFAULT_N_POINTS: usize = 101;
/// Default stimulus amplitude in millivolts.
pub const DEFAULT_STIMULUS_MV: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("frequency bounds must satisfy 0 < f_min < f_max, got {f_min} and {f_max}")]
    BadBounds { f_min: f64, f_max: f64 },
    #[error("a grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("grid points must be finite, positive and strictly increasing")]
    BadGridPoints,
    #[error("spectrum has {values} values for a {grid} point grid")]
    LengthMismatch { values: usize, grid: usize },
    #[error("non-finite impedance at point {index}")]
    NonFiniteValue { index: usize },
    #[error("amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
}

/// How a grid's points were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Logarithmic,
    Explicit,
}

/// An ordered sweep of stimulus frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl FrequencyGrid {
    /// Builds a grid from explicit points, which must be finite, positive
    /// and strictly increasing. Unlike [`make_log_grid`], a single-point
    /// grid is allowed.
    pub fn explicit(points: Vec<f64>) -> Result<Self, SpectrumError> {
        if points.is_empty() {
            return Err(SpectrumError::TooFewPoints(0));
        }
        validate_points(&points)?;
        Ok(Self {
            points,
            spacing: Spacing::Explicit,
        })
    }

    /// The default 101-point logarithmic sweep from 100 Hz to 100 kHz.
    pub fn standard() -> Self {
        make_log_grid(DEFAULT_F_MIN_HZ, DEFAULT_F_MAX_HZ, DEFAULT_N_POINTS)
            .expect("standard grid parameters are valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the grid point closest to `f_hz` (ties go to the lower
    /// frequency).
    pub fn nearest_index(&self, f_hz: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            let d = (p - f_hz).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }
}

fn validate_points(points: &[f64]) -> Result<(), SpectrumError> {
    let increasing = points.windows(2).all(|w| w[0] < w[1]);
    let positive = points.iter().all(|p| p.is_finite() && *p > 0.0);
    if increasing && positive {
        Ok(())
    } else {
        Err(SpectrumError::BadGridPoints)
    }
}

/// `n` log-spaced points from `f_min` to `f_max` (endpoints exact):
/// `point[i] = f_min · (f_max/f_min)^(i/(n−1))`.
pub fn make_log_grid(f_min: f64, f_max: f64, n: usize) -> Result<FrequencyGrid, SpectrumError> {
    if !(f_min.is_finite() && f_max.is_finite()) || f_min <= 0.0 || f_min >= f_max {
        return Err(SpectrumError::BadBounds { f_min, f_max });
    }
    if n < 2 {
        return Err(SpectrumError::TooFewPoints(n));
    }
    let ratio = f_max / f_min;
    let denom = (n - 1) as f64;
    let mut points: Vec<f64> = (0..n)
        .map(|i| f_min * ratio.powf(i as f64 / denom))
        .collect();
    points[0] = f_min;
    points[n - 1] = f_max;
    validate_points(&points)?;
    Ok(FrequencyGrid {
        points,
        spacing: Spacing::Logarithmic,
    })
}

/// One complex impedance sample in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexImpedance {
    pub real: f64,
    pub imag: f64,
}

impl ComplexImpedance {
    pub fn new(real: f64, imag: f64) -> Self {
        Self { real, imag }
    }

    pub fn is_finite(&self) -> bool {
        self.real.is_finite() && self.imag.is_finite()
    }

    /// |Z| in ohms.
    pub fn amplitude(&self) -> f64 {
        self.real.hypot(self.imag)
    }

    /// Phase in radians, in (−π, π].
    pub fn phase(&self) -> f64 {
        self.imag.atan2(self.real)
    }
}

impl From<Complex64> for ComplexImpedance {
    fn from(z: Complex64) -> Self {
        Self {
            real: z.re,
            imag: z.im,
        }
    }
}

impl From<ComplexImpedance> for Complex64 {
    fn from(z: ComplexImpedance) -> Self {
        Complex64::new(z.real, z.imag)
    }
}

/// (amplitude, phase) of a sample; phase in radians.
pub fn to_polar(z: ComplexImpedance) -> (f64, f64) {
    (z.amplitude(), z.phase())
}

/// Inverse of [`to_polar`]. Zero amplitude maps to the origin regardless of
/// phase.
pub fn from_polar(amplitude: f64, phase: f64) -> Result<ComplexImpedance, SpectrumError> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(SpectrumError::NegativeAmplitude(amplitude));
    }
    Ok(ComplexImpedance {
        real: amplitude * phase.cos(),
        imag: amplitude * phase.sin(),
    })
}

/// Which scalar of each complex sample a feature column carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Amplitude,
    Phase,
    Real,
    Imaginary,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [
        FeatureKind::Amplitude,
        FeatureKind::Phase,
        FeatureKind::Real,
        FeatureKind::Imaginary,
    ];

    pub fn of(self, z: ComplexImpedance) -> f64 {
        match self {
            FeatureKind::Amplitude => z.amplitude(),
            FeatureKind::Phase => z.phase(),
            FeatureKind::Real => z.real,
            FeatureKind::Imaginary => z.imag,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Amplitude => "amplitude",
            FeatureKind::Phase => "phase",
            FeatureKind::Real => "real",
            FeatureKind::Imaginary => "imaginary",
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" => Ok(FeatureKind::Amplitude),
            "phase" => Ok(FeatureKind::Phase),
            "real" => Ok(FeatureKind::Real),
            "imaginary" => Ok(FeatureKind::Imaginary),
            other => Err(format!("unknown feature kind `{other}`")),
        }
    }
}

/// Acquisition metadata carried alongside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub stimulus_amplitude_mv: f64,
    pub temperature_c: Option<f64>,
    pub label: Option<String>,
}

impl Default for SweepMeta {
    fn default() -> Self {
        Self {
            stimulus_amplitude_mv: DEFAULT_STIMULUS_MV,
            temperature_c: None,
            label: None,
        }
    }
}

/// A full frequency sweep: grid, per-point impedance and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<ComplexImpedance>,
    pub meta: SweepMeta,
}

impl Spectrum {
    pub fn new(
        grid: FrequencyGrid,
        values: Vec<ComplexImpedance>,
        meta: SweepMeta,
    ) -> Result<Self, SpectrumError> {
        if values.len() != grid.len() {
            return Err(SpectrumError::LengthMismatch {
                values: values.len(),
                grid: grid.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectrumError::NonFiniteValue { index });
        }
        Ok(Self { grid, values, meta })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ComplexImpedance] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The requested scalar of every sample, in grid order. Phase is radians.
pub fn extract_series(s: &Spectrum, kind: FeatureKind) -> Vec<f64> {
    s.values().iter().map(|&z| kind.of(z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_grid_endpoints_exact() {
        let g = make_log_grid(100.0, 100_000.0, 101).unwrap();
        assert_eq!(g.points()[0], 100.0);
        assert_eq!(g.points()[100], 100_000.0);
        assert_eq!(g.len(), 101);
        assert_eq!(g.spacing(), Spacing::Logarithmic);
    }

    #[test]
    fn log_grid_midpoint_closed_form() {
        // point[50] = 10^(2 + 3·50/100) = 10^3.5
        let g = make_log_grid(100.0, 100_000.0, 101).unwrap();
        let expected = 10f64.powf(3.5);
        assert!((g.points()[50] - expected).abs() / expected < 1e-12);
        assert!((g.points()[50] - 3162.2776602).abs() < 1e-6);
    }

    #[test]
    fn log_grid_rejects_bad_input() {
        assert_eq!(
            make_log_grid(10.0, 10.0, 5),
            Err(SpectrumError::BadBounds {
                f_min: 10.0,
                f_max: 10.0
            })
        );
        assert!(make_log_grid(-1.0, 10.0, 5).is_err());
        assert!(make_log_grid(100.0, 10.0, 5).is_err());
        assert_eq!(
            make_log_grid(1.0, 10.0, 1),
            Err(SpectrumError::TooFewPoints(1))
        );
    }

    #[test]
    fn explicit_grid_must_increase() {
        assert!(FrequencyGrid::explicit(vec![1.0, 2.0, 2.0]).is_err());
        assert!(FrequencyGrid::explicit(vec![0.0, 1.0]).is_err());
        assert!(FrequencyGrid::explicit(vec![]).is_err());
        assert!(FrequencyGrid::explicit(vec![1.0, 2.0, 4.0]).is_ok());
        assert!(FrequencyGrid::explicit(vec![1000.0]).is_ok());
    }

    #[test]
    fn polar_known_values() {
        assert_eq!(to_polar(ComplexImpedance::new(1.0, 0.0)), (1.0, 0.0));
        let (amp, ph) = to_polar(ComplexImpedance::new(0.0, -1.0));
        assert_eq!(amp, 1.0);
        assert!((ph + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (amp, ph) = to_polar(ComplexImpedance::new(3.0, 4.0));
        assert_eq!(amp, 5.0);
        assert!((ph - 4f64.atan2(3.0)).abs() < 1e-15);
        assert!((ph - 0.9272952180016122).abs() < 1e-12);
    }

    #[test]
    fn from_polar_known_values() {
        let z = from_polar(1.0, 0.0).unwrap();
        assert_eq!((z.real, z.imag), (1.0, 0.0));
        let z = from_polar(5.0, 0.9272952180016122).unwrap();
        assert!((z.real - 3.0).abs() < 1e-9);
        assert!((z.imag - 4.0).abs() < 1e-9);
        let z = from_polar(0.0, 1.234).unwrap();
        assert_eq!((z.real, z.imag), (0.0, 0.0));
        assert!(from_polar(-1.0, 0.0).is_err());
    }

    #[test]
    fn extract_series_projects_fields() {
        let grid = FrequencyGrid::explicit(vec![10.0, 20.0]).unwrap();
        let s = Spectrum::new(
            grid,
            vec![ComplexImpedance::new(3.0, 4.0), ComplexImpedance::new(0.0, -1.0)],
            SweepMeta::default(),
        )
        .unwrap();
        assert_eq!(extract_series(&s, FeatureKind::Imaginary), vec![4.0, -1.0]);
        assert_eq!(extract_series(&s, FeatureKind::Real), vec![3.0, 0.0]);
        assert_eq!(extract_series(&s, FeatureKind::Amplitude), vec![5.0, 1.0]);
    }

    #[test]
    fn constant_spectrum_series() {
        let grid = make_log_grid(100.0, 1000.0, 4).unwrap();
        let values = vec![ComplexImpedance::new(100.0, 0.0); 4];
        let s = Spectrum::new(grid, values, SweepMeta::default()).unwrap();
        assert_eq!(extract_series(&s, FeatureKind::Amplitude), vec![100.0; 4]);
        assert_eq!(extract_series(&s, FeatureKind::Phase), vec![0.0; 4]);
    }

    #[test]
    fn spectrum_rejects_nan_and_length_mismatch() {
        let grid = FrequencyGrid::explicit(vec![10.0, 20.0]).unwrap();
        let err = Spectrum::new(
            grid.clone(),
            vec![
                ComplexImpedance::new(1.0, 0.0),
                ComplexImpedance::new(f64::NAN, 0.0),
            ],
            SweepMeta::default(),
        )
        .unwrap_err();
        assert_eq!(err, SpectrumError::NonFiniteValue { index: 1 });
        let err = Spectrum::new(
            grid,
            vec![ComplexImpedance::new(1.0, 0.0)],
            SweepMeta::default(),
        )
        .unwrap_err();
        assert_eq!(err, SpectrumError::LengthMismatch { values: 1, grid: 2 });
    }

    #[test]
    fn default_meta_is_50_mv() {
        assert_eq!(SweepMeta::default().stimulus_amplitude_mv, 50.0);
    }

    #[test]
    fn standard_grid_ratio_constant() {
        let g = FrequencyGrid::standard();
        let r0 = g.points()[1] / g.points()[0];
        for w in g.points().windows(2) {
            let r = w[1] / w[0];
            assert!((r - r0).abs() / r0 < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn polar_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            prop_assume!(re.hypot(im) > 1e-9);
            let z = ComplexImpedance::new(re, im);
            let (amp, ph) = to_polar(z);
            let back = from_polar(amp, ph).unwrap();
            let scale = amp.max(1e-300);
            prop_assert!((back.real - re).abs() / scale < 1e-9);
            prop_assert!((back.imag - im).abs() / scale < 1e-9);
        }

        #[test]
        fn amplitude_squared_is_re2_plus_im2(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let z = ComplexImpedance::new(re, im);
            let lhs = z.amplitude() * z.amplitude();
            let rhs = re * re + im * im;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-30));
        }

        #[test]
        fn log_grid_strictly_increasing(
            f_min in 1e-2f64..1e3,
            decades in 0.5f64..6.0,
            n in 2usize..300,
        ) {
            let f_max = f_min * 10f64.powf(decades);
            let g = make_log_grid(f_min, f_max, n).unwrap();
            prop_assert!(g.points().windows(2).all(|w| w[0] < w[1]));
            if n > 2 {
                let r0 = g.points()[1] / g.points()[0];
                for w in g.points().windows(2) {
                    prop_assert!(((w[1] / w[0]) - r0).abs() / r0 < 1e-12);
                }
            }
        }
    }
}
