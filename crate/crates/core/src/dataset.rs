//! Labeled collections of sweeps sharing one frequency grid.

use crate::spectrum::{
    ComplexImpedance, FrequencyGrid, Spectrum, SpectrumError, SweepMeta, DEFAULT_STIMULUS_MV,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("observation {index} has {values} values for a {grid} point grid")]
    GridMismatch {
        index: usize,
        values: usize,
        grid: usize,
    },
    #[error("observation {index} contains a non-finite value")]
    NonFinite { index: usize },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// One labeled sweep. `label` is a class id (kind datasets index the label
/// registry; freshness datasets use the hour value), `sample_id` is unique
/// within a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub label: u32,
    pub sample_id: u32,
    pub values: Vec<ComplexImpedance>,
}

/// A set of observations measured on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub grid: FrequencyGrid,
    pub stimulus_amplitude_mv: f64,
    pub observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(grid: FrequencyGrid, observations: Vec<Observation>) -> Result<Self, DatasetError> {
        let d = Self {
            grid,
            stimulus_amplitude_mv: DEFAULT_STIMULUS_MV,
            observations,
        };
        d.check_consistent()?;
        Ok(d)
    }

    /// Verifies every observation matches the grid and is finite.
    pub fn check_consistent(&self) -> Result<(), DatasetError> {
        for (index, obs) in self.observations.iter().enumerate() {
            if obs.values.len() != self.grid.len() {
                return Err(DatasetError::GridMismatch {
                    index,
                    values: obs.values.len(),
                    grid: self.grid.len(),
                });
            }
            if obs.values.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { index });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Distinct labels in first-appearance order.
    pub fn labels(&self) -> Vec<u32> {
        let mut seen = Vec::new();
        for obs in &self.observations {
            if !seen.contains(&obs.label) {
                seen.push(obs.label);
            }
        }
        seen
    }

    /// Materializes one observation as a standalone [`Spectrum`].
    pub fn spectrum(&self, index: usize) -> Result<Spectrum, DatasetError> {
        let obs = &self.observations[index];
        let meta = SweepMeta {
            stimulus_amplitude_mv: self.stimulus_amplitude_mv,
            temperature_c: None,
            label: Some(obs.label.to_string()),
        };
        Ok(Spectrum::new(self.grid.clone(), obs.values.clone(), meta)?)
    }
}
