//! From-scratch classifiers: a random forest and a dense net, plus the
//! stratified split and evaluation reports shared between them.

mod forest;
mod mlp;

pub use forest::{train_forest, ForestHyper, TreeNode};
pub use mlp::{mlp_loss, mlp_loss_gradients, train_mlp, Layer, LayerGradients, MlpHyper};

use crate::exec;
use crate::features::{standardize_value, FeatureMatrix, StandardizationStats};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("class {label} has {count} rows; stratified splitting needs at least 2")]
    ClassTooSmall { label: u32, count: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("features per split must lie in 1..={d}, got {got}")]
    BadFeaturesPerSplit { got: usize, d: usize },
    #[error("hyperparameter out of range: {0}")]
    BadHyper(&'static str),
    #[error("feature row has {got} entries, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("label {0} was not seen during training")]
    UnknownLabel(u32),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("model schema version {0} is not supported")]
    UnknownSchemaVersion(u32),
}

/// A trained classifier with its preprocessing baked in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    /// Prediction targets in ascending label order.
    pub classes: Vec<u32>,
    /// Column layout the model was trained on.
    pub col_meta: Vec<crate::features::ColumnMeta>,
    /// Standardization statistics applied before prediction (always present
    /// for the dense net, absent for forests).
    pub stats: Option<StandardizationStats>,
    #[serde(flatten)]
    pub variant: ModelVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelVariant {
    Forest {
        hyper: ForestHyper,
        trees: Vec<TreeNode>,
    },
    Mlp {
        hyper: MlpHyper,
        layers: Vec<Layer>,
    },
}

impl TrainedModel {
    pub fn kind_name(&self) -> &'static str {
        match self.variant {
            ModelVariant::Forest { .. } => "forest",
            ModelVariant::Mlp { .. } => "mlp",
        }
    }

    pub fn n_features(&self) -> usize {
        self.col_meta.len()
    }

    pub fn check_schema(&self) -> Result<(), ClassifyError> {
        if self.schema_version == MODEL_SCHEMA_VERSION {
            Ok(())
        } else {
            Err(ClassifyError::UnknownSchemaVersion(self.schema_version))
        }
    }

    /// Hyperparameters as a JSON value, echoed into evaluation reports.
    pub fn hyper_echo(&self) -> serde_json::Value {
        match &self.variant {
            ModelVariant::Forest { hyper, .. } => serde_json::json!({
                "model": "forest",
                "hyper": hyper,
            }),
            ModelVariant::Mlp { hyper, .. } => serde_json::json!({
                "model": "mlp",
                "hyper": hyper,
            }),
        }
    }
}

/// Deterministic per-class proportional split. Every class contributes
/// `round(count·test_fraction)` test rows clamped to leave at least one row
/// on each side. Returns (train_indices, test_indices), both ascending.
pub fn stratified_split_indices(
    labels: &[u32],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ClassifyError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ClassifyError::BadFraction(test_fraction));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut test = Vec::new();
    for &class in &classes {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.len() < 2 {
            return Err(ClassifyError::ClassTooSmall {
                label: class,
                count: rows.len(),
            });
        }
        let mut shuffled = rows.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(seed, class as u64, 17));
        shuffled.shuffle(&mut rng);
        let n_test = ((rows.len() as f64 * test_fraction).round() as usize)
            .clamp(1, rows.len() - 1);
        test.extend_from_slice(&shuffled[..n_test]);
    }
    test.sort_unstable();
    let train: Vec<usize> = (0..labels.len()).filter(|i| !test.contains(i)).collect();
    Ok((train, test))
}

/// [`stratified_split_indices`] materialized into two matrices.
pub fn stratified_split(
    fm: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix), ClassifyError> {
    let (train, test) = stratified_split_indices(fm.labels(), test_fraction, seed)?;
    Ok((fm.select_rows(&train), fm.select_rows(&test)))
}

/// Predicted label and class-probability vector (aligned with
/// `model.classes`) for one feature row.
pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<(u32, Vec<f64>), ClassifyError> {
    if x.len() != model.n_features() {
        return Err(ClassifyError::DimensionMismatch {
            got: x.len(),
            expected: model.n_features(),
        });
    }
    let standardized;
    let row: &[f64] = match &model.stats {
        Some(stats) => {
            standardized = x
                .iter()
                .enumerate()
                .map(|(c, &v)| standardize_value(stats, c, v))
                .collect::<Vec<f64>>();
            &standardized
        }
        None => x,
    };

    let probabilities = match &model.variant {
        ModelVariant::Forest { trees, .. } => forest::vote_probabilities(trees, row, model.classes.len()),
        ModelVariant::Mlp { layers, .. } => mlp::forward_probabilities(layers, row),
    };
    let mut best = 0;
    for (i, p) in probabilities.iter().enumerate() {
        if *p > probabilities[best] {
            best = i;
        }
    }
    Ok((model.classes[best], probabilities))
}

/// Per-class precision and recall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u32,
    pub precision: f64,
    pub recall: f64,
}

/// Accuracy, confusion matrix (rows = true class, columns = predicted, in
/// `classes` order) and per-class metrics, with the model's hyperparameters
/// echoed for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<u32>,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub n_test: usize,
    pub meta: serde_json::Value,
}

pub fn evaluate(model: &TrainedModel, test: &FeatureMatrix) -> Result<EvalReport, ClassifyError> {
    if test.rows() == 0 {
        return Err(ClassifyError::EmptyTestSet);
    }
    let classes = &model.classes;
    let class_index = |label: u32| -> Result<usize, ClassifyError> {
        classes
            .binary_search(&label)
            .map_err(|_| ClassifyError::UnknownLabel(label))
    };

    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for r in 0..test.rows() {
        let truth = class_index(test.labels()[r])?;
        let (predicted, _) = predict(model, test.row(r))?;
        let predicted = class_index(predicted)?;
        confusion[truth][predicted] += 1;
    }

    let total: usize = test.rows();
    let trace: usize = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / total as f64;

    let per_class = (0..k)
        .map(|i| {
            let row_sum: usize = confusion[i].iter().sum();
            let col_sum: usize = confusion.iter().map(|r| r[i]).sum();
            ClassMetrics {
                label: classes[i],
                precision: if col_sum == 0 {
                    0.0
                } else {
                    confusion[i][i] as f64 / col_sum as f64
                },
                recall: if row_sum == 0 {
                    0.0
                } else {
                    confusion[i][i] as f64 / row_sum as f64
                },
            }
        })
        .collect();

    Ok(EvalReport {
        classes: classes.clone(),
        accuracy,
        confusion,
        per_class,
        n_test: total,
        meta: model.hyper_echo(),
    })
}

/// Sorted distinct labels plus per-row class indices; shared by both
/// trainers.
pub(crate) fn class_layout(fm: &FeatureMatrix) -> Result<(Vec<u32>, Vec<usize>), ClassifyError> {
    if fm.rows() == 0 {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let classes = fm.distinct_labels();
    if classes.len() < 2 {
        return Err(ClassifyError::TooFewClasses(classes.len()));
    }
    let y = fm
        .labels()
        .iter()
        .map(|l| classes.binary_search(l).expect("label in distinct set"))
        .collect();
    Ok((classes, y))
}
