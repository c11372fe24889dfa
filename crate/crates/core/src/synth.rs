//! Synthetic dataset generation. Each beverage class is a circuit template
//! plus per-sample parameter jitter and multiplicative measurement noise;
//! freshness datasets additionally drift the template parameters linearly
//! with hours since unpacking.
//!
//! Every observation derives its own RNG stream from the master seed, so
//! generation is a pure function of its inputs at any parallelism level.

use crate::circuit::{circuit_impedance, CircuitError, CircuitModel};
use crate::dataset::{Dataset, DatasetError, Observation};
use crate::exec;
use crate::spectrum::{ComplexImpedance, FrequencyGrid, Spectrum, SweepMeta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("noise and jitter must be non-negative and finite")]
    BadNoise,
    #[error("need at least 2 class specs, got {0}")]
    TooFewSpecs(usize),
    #[error("samples per class must be at least 1")]
    NoSamples,
    #[error("duplicate class label `{0}`")]
    DuplicateLabel(String),
    #[error("drift model has {got} rates, template has {expected} parameters")]
    DriftArityMismatch { got: usize, expected: usize },
    #[error("hours must be non-empty, non-negative and distinct")]
    BadHours,
    #[error("drift drives parameter {param} out of range at {hours} h")]
    DriftOutOfRange { param: usize, hours: u32 },
    #[error("jitter failed to produce valid parameters after {0} attempts")]
    JitterExhausted(usize),
}

/// A beverage class: a circuit template with sampling variability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: String,
    pub template: CircuitModel,
    /// Relative standard deviation applied to every template parameter per
    /// sample (resampled until the circuit validates).
    pub param_jitter: f64,
    /// Relative standard deviation of the multiplicative measurement noise
    /// applied independently to the real and imaginary part of each point.
    pub noise_relative: f64,
}

impl ClassSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.template.validate()?;
        if self.param_jitter < 0.0
            || self.noise_relative < 0.0
            || !self.param_jitter.is_finite()
            || !self.noise_relative.is_finite()
        {
            return Err(SynthError::BadNoise);
        }
        Ok(())
    }
}

/// Signed relative parameter change per hour, aligned with the template's
/// depth-first parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    pub rates_per_hour: Vec<f64>,
}

/// Spec document for freshness generation: base class, drift and the hour
/// classes to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreshnessSpec {
    pub base: ClassSpec,
    pub drift: DriftModel,
    pub hours: Vec<u32>,
}

/// Simulates one sweep of `c` over `grid` with relative noise `noise_relative`
/// under the given seed. Noise 0 returns exact model values.
pub fn simulate_sweep(
    c: &CircuitModel,
    grid: &FrequencyGrid,
    noise_relative: f64,
    rng_seed: u64,
) -> Result<Spectrum, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let values = sweep_values(c, grid, noise_relative, &mut rng)?;
    Ok(Spectrum::new(grid.clone(), values, SweepMeta::default())
        .map_err(DatasetError::Spectrum)?)
}

fn sweep_values(
    c: &CircuitModel,
    grid: &FrequencyGrid,
    noise_relative: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ComplexImpedance>, SynthError> {
    if !(noise_relative >= 0.0 && noise_relative.is_finite()) {
        return Err(SynthError::BadNoise);
    }
    let noise = if noise_relative > 0.0 {
        Some(Normal::new(0.0, noise_relative).expect("validated stddev"))
    } else {
        None
    };
    let mut values = Vec::with_capacity(grid.len());
    for &f_hz in grid.points() {
        let z = circuit_impedance(c, TAU * f_hz)?;
        let value = match &noise {
            Some(dist) => {
                let eps_re: f64 = dist.sample(rng);
                let eps_im: f64 = dist.sample(rng);
                ComplexImpedance::new(z.real * (1.0 + eps_re), z.imag * (1.0 + eps_im))
            }
            None => z,
        };
        values.push(value);
    }
    Ok(values)
}

/// Multiplies each template parameter by `1 + η`, `η ~ N(0, jitter)`,
/// resampling whole parameter sets until the circuit validates.
fn jitter_template(
    template: &CircuitModel,
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CircuitModel, SynthError> {
    if jitter == 0.0 {
        return Ok(template.clone());
    }
    let dist = Normal::new(0.0, jitter).map_err(|_| SynthError::BadNoise)?;
    let base = template.params();
    const MAX_ATTEMPTS: usize = 64;
    for _ in 0..MAX_ATTEMPTS {
        let candidate: Vec<f64> = base.iter().map(|p| p * (1.0 + dist.sample(rng))).collect();
        if let Ok(model) = template.with_params(&candidate) {
            return Ok(model);
        }
    }
    Err(SynthError::JitterExhausted(MAX_ATTEMPTS))
}

/// Generates `samples_per_class` sweeps for every spec. Class ids follow
/// spec order; sample ids number rows globally in row order. Deterministic
/// per seed, independent of parallelism.
pub fn generate_kind_dataset(
    specs: &[ClassSpec],
    samples_per_class: usize,
    grid: &FrequencyGrid,
    seed: u64,
) -> Result<Dataset, SynthError> {
    if specs.len() < 2 {
        return Err(SynthError::TooFewSpecs(specs.len()));
    }
    if samples_per_class == 0 {
        return Err(SynthError::NoSamples);
    }
    for (i, spec) in specs.iter().enumerate() {
        spec.validate()?;
        if specs[..i].iter().any(|s| s.label == spec.label) {
            return Err(SynthError::DuplicateLabel(spec.label.clone()));
        }
    }

    let total = specs.len() * samples_per_class;
    let results = exec::map_indexed(total, |row| {
        let class = row / samples_per_class;
        let sample = row % samples_per_class;
        let spec = &specs[class];
        let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(seed, class as u64, sample as u64));
        let model = jitter_template(&spec.template, spec.param_jitter, &mut rng)?;
        let values = sweep_values(&model, grid, spec.noise_relative, &mut rng)?;
        Ok(Observation {
            label: class as u32,
            sample_id: row as u32,
            values,
        })
    });
    let observations = results.into_iter().collect::<Result<Vec<_>, SynthError>>()?;
    Ok(Dataset::new(grid.clone(), observations)?)
}

/// Applies `hours` of drift to the template before jitter and noise; class
/// label is the hour value.
pub fn generate_freshness_dataset(
    base: &ClassSpec,
    drift: &DriftModel,
    hours: &[u32],
    samples_per_hour: usize,
    grid: &FrequencyGrid,
    seed: u64,
) -> Result<Dataset, SynthError> {
    base.validate()?;
    if samples_per_hour == 0 {
        return Err(SynthError::NoSamples);
    }
    if hours.is_empty() {
        return Err(SynthError::BadHours);
    }
    for (i, h) in hours.iter().enumerate() {
        if hours[..i].contains(h) {
            return Err(SynthError::BadHours);
        }
    }
    let base_params = base.template.params();
    if drift.rates_per_hour.len() != base_params.len() {
        return Err(SynthError::DriftArityMismatch {
            got: drift.rates_per_hour.len(),
            expected: base_params.len(),
        });
    }

    // Drifted templates are validated up front so an out-of-range rate is a
    // single clear error instead of a jitter failure mid-generation.
    let mut drifted = Vec::with_capacity(hours.len());
    for &h in hours {
        let params: Vec<f64> = base_params
            .iter()
            .zip(&drift.rates_per_hour)
            .map(|(p, rate)| p * (1.0 + rate * h as f64))
            .collect();
        match base.template.with_params(&params) {
            Ok(model) => drifted.push(model),
            Err(_) => {
                let param = params
                    .iter()
                    .position(|v| !v.is_finite() || *v <= 0.0)
                    .or_else(|| drift.rates_per_hour.iter().position(|r| *r != 0.0))
                    .unwrap_or(0);
                return Err(SynthError::DriftOutOfRange { param, hours: h });
            }
        }
    }

    let total = hours.len() * samples_per_hour;
    let results = exec::map_indexed(total, |row| {
        let class = row / samples_per_hour;
        let sample = row % samples_per_hour;
        let mut rng =
            ChaCha8Rng::seed_from_u64(exec::derive_seed(seed, class as u64, sample as u64));
        let model = jitter_template(&drifted[class], base.param_jitter, &mut rng)?;
        let values = sweep_values(&model, grid, base.noise_relative, &mut rng)?;
        Ok(Observation {
            label: hours[class],
            sample_id: row as u32,
            values,
        })
    });
    let observations = results.into_iter().collect::<Result<Vec<_>, SynthError>>()?;
    Ok(Dataset::new(grid.clone(), observations)?)
}

/// One slot of the built-in class table: solution resistance in series with
/// the electrode-polarization CPE. `f_cross_hz` is the frequency where the
/// CPE magnitude equals the resistance, which fixes Q.
fn kind_template(rs: f64, alpha: f64, f_cross_hz: f64) -> CircuitModel {
    // |Z_cpe(ω_x)| = Rs → Q = 1/(Rs·ω_x^α).
    let q = 1.0 / (rs * (TAU * f_cross_hz).powf(alpha));
    CircuitModel::series(vec![CircuitModel::resistor(rs), CircuitModel::cpe(q, alpha)])
}

/// The 20 built-in beverage classes, aligned with the built-in label
/// registry. Electrode polarization dominates below the per-class crossover
/// (150–700 Hz), so the informative spread sits in the low-frequency band.
/// Parameters are synthetic stand-ins, not measurements.
pub fn default_kind_bundle() -> Vec<ClassSpec> {
    let alphas = [0.82, 0.86, 0.90, 0.94];
    let names = crate::registry::LabelRegistry::builtin();
    (0..20u32)
        .map(|i| {
            let rs = 100.0 + 150.0 * i as f64;
            let alpha = alphas[i as usize % alphas.len()];
            let f_cross = 150.0 + 25.0 * i as f64;
            ClassSpec {
                label: names.name(i).expect("builtin registry has 20 ids").to_string(),
                template: kind_template(rs, alpha, f_cross),
                param_jitter: 0.003,
                noise_relative: 0.01,
            }
        })
        .collect()
}

/// Built-in freshness experiment: a milk-like base class whose electrode
/// polarization weakens and stiffens as the drink goes stale.
pub fn default_freshness_spec() -> FreshnessSpec {
    FreshnessSpec {
        base: ClassSpec {
            label: "milk".to_string(),
            template: kind_template(800.0, 0.9, 300.0),
            param_jitter: 0.003,
            noise_relative: 0.01,
        },
        // Depth-first parameter order: Rs, Q, alpha.
        drift: DriftModel {
            rates_per_hour: vec![0.002, -0.008, -0.0008],
        },
        hours: vec![0, 24, 48],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::make_log_grid;

    fn small_grid() -> FrequencyGrid {
        make_log_grid(100.0, 100_000.0, 11).unwrap()
    }

    fn two_specs() -> Vec<ClassSpec> {
        vec![
            ClassSpec {
                label: "a".into(),
                template: kind_template(50.0, 0.9, 400.0),
                param_jitter: 0.0,
                noise_relative: 0.0,
            },
            ClassSpec {
                label: "b".into(),
                template: kind_template(60.0, 0.85, 600.0),
                param_jitter: 0.0,
                noise_relative: 0.0,
            },
        ]
    }

    #[test]
    fn noiseless_sweep_matches_model_exactly() {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(100.0),
            CircuitModel::capacitor(1e-6),
        ]);
        let grid = FrequencyGrid::standard();
        let s = simulate_sweep(&c, &grid, 0.0, 7).unwrap();
        for (f, z) in grid.points().iter().zip(s.values()) {
            let expect = circuit_impedance(&c, TAU * f).unwrap();
            assert_eq!(z.real, expect.real);
            assert_eq!(z.imag, expect.imag);
        }
        // Grid point nearest 1591.55 Hz carries ≈ (100, −100) within 2%.
        let idx = grid.nearest_index(1591.55);
        let z = s.values()[idx];
        assert!((z.real - 100.0).abs() / 100.0 < 0.02);
        assert!((z.imag + 100.0).abs() / 100.0 < 0.02);
    }

    #[test]
    fn sweep_seeding_contract() {
        let c = kind_template(50.0, 0.9, 400.0);
        let grid = small_grid();
        let a = simulate_sweep(&c, &grid, 0.01, 42).unwrap();
        let b = simulate_sweep(&c, &grid, 0.01, 42).unwrap();
        assert_eq!(a, b);
        let c2 = simulate_sweep(&c, &grid, 0.01, 43).unwrap();
        assert_ne!(a, c2);
        let n0a = simulate_sweep(&c, &grid, 0.0, 1).unwrap();
        let n0b = simulate_sweep(&c, &grid, 0.0, 2).unwrap();
        assert_eq!(n0a, n0b);
    }

    #[test]
    fn kind_dataset_shape_and_determinism() {
        let specs = default_kind_bundle();
        let grid = small_grid();
        let d = generate_kind_dataset(&specs, 10, &grid, 0).unwrap();
        assert_eq!(d.len(), 200);
        assert_eq!(d.labels().len(), 20);
        let d2 = generate_kind_dataset(&specs, 10, &grid, 0).unwrap();
        assert_eq!(d, d2);
        let d3 = generate_kind_dataset(&specs, 10, &grid, 1).unwrap();
        assert_ne!(d, d3);
    }

    #[test]
    fn zero_jitter_zero_noise_equals_template_sweep() {
        let specs = two_specs();
        let grid = small_grid();
        let d = generate_kind_dataset(&specs, 1, &grid, 9).unwrap();
        for (class, spec) in specs.iter().enumerate() {
            let expect = simulate_sweep(&spec.template, &grid, 0.0, 0).unwrap();
            assert_eq!(d.observations[class].values, expect.values());
        }
    }

    #[test]
    fn duplicate_labels_rejected() {
        let mut specs = two_specs();
        specs[1].label = specs[0].label.clone();
        let err = generate_kind_dataset(&specs, 1, &small_grid(), 0).unwrap_err();
        assert_eq!(err, SynthError::DuplicateLabel("a".into()));
    }

    #[test]
    fn kind_preconditions() {
        let specs = two_specs();
        assert_eq!(
            generate_kind_dataset(&specs[..1], 1, &small_grid(), 0).unwrap_err(),
            SynthError::TooFewSpecs(1)
        );
        assert_eq!(
            generate_kind_dataset(&specs, 0, &small_grid(), 0).unwrap_err(),
            SynthError::NoSamples
        );
    }

    #[test]
    fn freshness_shape_and_labels() {
        let spec = default_freshness_spec();
        let d = generate_freshness_dataset(&spec.base, &spec.drift, &spec.hours, 10, &small_grid(), 3)
            .unwrap();
        assert_eq!(d.len(), 30);
        assert_eq!(d.labels(), vec![0, 24, 48]);
    }

    #[test]
    fn drift_scales_template_linearly() {
        // rate −0.005/h on the leading R over 48 h scales it by 1 − 0.24.
        let base = ClassSpec {
            label: "x".into(),
            template: CircuitModel::series(vec![
                CircuitModel::resistor(1000.0),
                CircuitModel::capacitor(1e-6),
            ]),
            param_jitter: 0.0,
            noise_relative: 0.0,
        };
        let drift = DriftModel {
            rates_per_hour: vec![-0.005, 0.0],
        };
        let grid = small_grid();
        let d = generate_freshness_dataset(&base, &drift, &[0, 48], 1, &grid, 0).unwrap();
        let expected_scale = 1.0 + (-0.005 * 48.0);
        let drifted = base
            .template
            .with_params(&[1000.0 * expected_scale, 1e-6])
            .unwrap();
        let expect = simulate_sweep(&drifted, &grid, 0.0, 0).unwrap();
        assert_eq!(d.observations[1].values, expect.values());
    }

    #[test]
    fn zero_drift_classes_share_one_distribution() {
        // With zero drift, jitter and noise, every class reduces to the same
        // template sweep exactly.
        let base = two_specs().remove(0);
        let drift = DriftModel {
            rates_per_hour: vec![0.0; base.template.param_count()],
        };
        let d = generate_freshness_dataset(&base, &drift, &[0, 24], 2, &small_grid(), 5).unwrap();
        assert_eq!(d.len(), 4);
        let reference = &d.observations[0].values;
        for obs in &d.observations {
            assert_eq!(&obs.values, reference);
        }
    }

    #[test]
    fn drift_out_of_range_rejected() {
        let base = two_specs().remove(0);
        let mut rates = vec![0.0; base.template.param_count()];
        rates[0] = -0.03; // 1 − 0.03·48 < 0
        let err = generate_freshness_dataset(
            &base,
            &DriftModel {
                rates_per_hour: rates,
            },
            &[0, 48],
            1,
            &small_grid(),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, SynthError::DriftOutOfRange { hours: 48, .. }));
    }

    #[test]
    fn bad_hours_rejected() {
        let spec = default_freshness_spec();
        assert_eq!(
            generate_freshness_dataset(&spec.base, &spec.drift, &[], 1, &small_grid(), 0)
                .unwrap_err(),
            SynthError::BadHours
        );
        assert_eq!(
            generate_freshness_dataset(&spec.base, &spec.drift, &[0, 0], 1, &small_grid(), 0)
                .unwrap_err(),
            SynthError::BadHours
        );
    }

    #[test]
    fn default_bundle_is_valid_and_aligned() {
        let bundle = default_kind_bundle();
        assert_eq!(bundle.len(), 20);
        for spec in &bundle {
            spec.validate().unwrap();
        }
        assert_eq!(bundle[0].label, "Mineral water");
        assert_eq!(bundle[19].label, "Mixed vegetable juice");
    }
}
