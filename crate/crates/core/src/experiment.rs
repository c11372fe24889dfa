//! The classifier × feature-set evaluation grid: random forest on variants
//! A–D and the dense net on C and D, each with full and band-reduced
//! features. Cells run independently (in parallel with the `parallel`
//! feature) with per-cell seeds derived from the master seed.

use crate::classify::{
    evaluate, stratified_split_indices, train_forest, train_mlp, ClassifyError, EvalReport,
    ForestHyper, MlpHyper, TrainedModel,
};
use crate::dataset::Dataset;
use crate::exec;
use crate::features::{build_variant_matrix, reduce_to_band, DatasetVariant, FeatureError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        source: ClassifyError,
    },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Rf,
    Dnn,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Rf => f.write_str("RF"),
            ModelKind::Dnn => f.write_str("DNN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScope {
    Full,
    Reduced,
}

impl std::fmt::Display for FeatureScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureScope::Full => f.write_str("full"),
            FeatureScope::Reduced => f.write_str("reduced"),
        }
    }
}

/// Identity of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSpec {
    pub model: ModelKind,
    pub variant: DatasetVariant,
    pub scope: FeatureScope,
}

impl std::fmt::Display for CellSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}-{}", self.model, self.variant, self.scope)
    }
}

/// The twelve cells in report order: RF over A–D, then DNN over C and D,
/// full before reduced within each model/variant pair.
pub fn experiment_cells() -> Vec<CellSpec> {
    let mut cells = Vec::with_capacity(12);
    for variant in DatasetVariant::ALL {
        for scope in [FeatureScope::Full, FeatureScope::Reduced] {
            cells.push(CellSpec {
                model: ModelKind::Rf,
                variant,
                scope,
            });
        }
    }
    for variant in [DatasetVariant::C, DatasetVariant::D] {
        for scope in [FeatureScope::Full, FeatureScope::Reduced] {
            cells.push(CellSpec {
                model: ModelKind::Dnn,
                variant,
                scope,
            });
        }
    }
    cells
}

/// Everything that determines an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub band_points: usize,
    pub forest: ForestHyper,
    pub mlp: MlpHyper,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            test_fraction: 0.3,
            band_lo_hz: 100.0,
            band_hi_hz: 1000.0,
            band_points: 20,
            forest: ForestHyper::default(),
            mlp: MlpHyper::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: CellSpec,
    pub accuracy: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn cell(&self, model: ModelKind, variant: DatasetVariant, scope: FeatureScope) -> Option<&CellReport> {
        self.cells.iter().find(|c| {
            c.cell.model == model && c.cell.variant == variant && c.cell.scope == scope
        })
    }

    /// Accuracy grid shaped like the classification summary table: columns
    /// RF-A..RF-D, DNN-C, DNN-D; row 0 full features, row 1 reduced.
    pub fn accuracy_grid(&self) -> [[f64; 6]; 2] {
        let order = [
            (ModelKind::Rf, DatasetVariant::A),
            (ModelKind::Rf, DatasetVariant::B),
            (ModelKind::Rf, DatasetVariant::C),
            (ModelKind::Rf, DatasetVariant::D),
            (ModelKind::Dnn, DatasetVariant::C),
            (ModelKind::Dnn, DatasetVariant::D),
        ];
        let mut grid = [[f64::NAN; 6]; 2];
        for (col, &(model, variant)) in order.iter().enumerate() {
            for (row, scope) in [FeatureScope::Full, FeatureScope::Reduced]
                .into_iter()
                .enumerate()
            {
                if let Some(cell) = self.cell(model, variant, scope) {
                    grid[row][col] = cell.accuracy;
                }
            }
        }
        grid
    }
}

/// Trains one cell's model on the train rows and evaluates on the test rows.
fn run_cell(
    d: &Dataset,
    cell: CellSpec,
    config: &ExperimentConfig,
    train_idx: &[usize],
    test_idx: &[usize],
    cell_seed: u64,
) -> Result<CellReport, ExperimentError> {
    let full = build_variant_matrix(d, cell.variant)?;
    let fm = match cell.scope {
        FeatureScope::Full => full,
        FeatureScope::Reduced => reduce_to_band(
            &full,
            config.band_lo_hz,
            config.band_hi_hz,
            config.band_points,
        )?,
    };
    let train = fm.select_rows(train_idx);
    let test = fm.select_rows(test_idx);

    let wrap = |source: ClassifyError| ExperimentError::Cell {
        cell: cell.to_string(),
        source,
    };
    let model: TrainedModel = match cell.model {
        ModelKind::Rf => {
            let hyper = ForestHyper {
                seed: cell_seed,
                ..config.forest.clone()
            };
            train_forest(&train, &hyper).map_err(wrap)?
        }
        ModelKind::Dnn => {
            let hyper = MlpHyper {
                seed: cell_seed,
                ..config.mlp.clone()
            };
            train_mlp(&train, &hyper).map_err(wrap)?
        }
    };
    let report = evaluate(&model, &test).map_err(wrap)?;
    Ok(CellReport {
        cell,
        accuracy: report.accuracy,
        report,
    })
}

/// Runs the full 12-cell grid with one shared stratified split.
pub fn run_experiment(
    d: &Dataset,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let labels: Vec<u32> = d.observations.iter().map(|o| o.label).collect();
    let (train_idx, test_idx) =
        stratified_split_indices(&labels, config.test_fraction, config.seed).map_err(|source| {
            ExperimentError::Cell {
                cell: "split".into(),
                source,
            }
        })?;

    let cells = experiment_cells();
    let results = exec::map_indexed(cells.len(), |i| {
        let cell_seed = exec::derive_seed(config.seed, i as u64, 53);
        run_cell(d, cells[i], config, &train_idx, &test_idx, cell_seed)
    });
    let cells = results
        .into_iter()
        .collect::<Result<Vec<CellReport>, _>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        cells,
    })
}
