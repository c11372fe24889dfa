//! bevid-core: identify beverages from electrochemical impedance spectra.
//!
//! The crate covers the full pipeline in memory:
//!
//! * [`spectrum`] — frequency grids, complex impedance samples, polar and
//!   Cartesian feature views.
//! * [`circuit`] — equivalent-circuit models (R, C, constant-phase elements
//!   in series/parallel trees) and their impedance.
//! * [`synth`] — synthetic dataset generation: per-class circuit templates
//!   with parameter jitter, measurement noise and staleness drift.
//! * [`fit`] — complex nonlinear least squares (Levenberg–Marquardt) to
//!   recover circuit parameters from a spectrum.
//! * [`features`] / [`svd`] — observation×feature matrices, SVD frequency
//!   importance, low-frequency band reduction, standardization.
//! * [`classify`] — random forest and dense-net classifiers built from
//!   scratch, with stratified splitting and evaluation reports.
//! * [`io`] / [`registry`] — CSV + JSON manifest persistence, validation,
//!   and the bundled beverage label registry.
//! * [`frames`] — the binary point-frame wire codec and sweep assembler that
//!   stands in for the acquisition front end.
//! * [`experiment`] — the full classifier × feature-set evaluation grid.
//!
//! With the default `parallel` feature, dataset generation, forest training
//! and experiment cells fan out over rayon; results are identical at any
//! thread count because every unit of work derives its own RNG stream from
//! the master seed. Disabling the feature falls back to sequential loops.

pub mod circuit;
pub mod classify;
pub mod dataset;
mod exec;
pub mod experiment;
pub mod features;
pub mod fit;
pub mod frames;
pub mod io;
pub mod registry;
pub mod spectrum;
pub mod svd;
pub mod synth;

pub use dataset::{Dataset, Observation};
pub use spectrum::{ComplexImpedance, FeatureKind, FrequencyGrid, Spectrum};
