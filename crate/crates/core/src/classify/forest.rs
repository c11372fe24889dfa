//! Random forest of axis-aligned Gini trees.
//!
//! Determinism contract: tree `t` draws every random decision from its own
//! ChaCha stream derived from `(seed, t)`, with bootstrap indices drawn
//! before any feature access, so training yields the same forest at any
//! parallelism level and under any monotone feature transformation.

use super::{class_layout, ClassifyError, ModelVariant, TrainedModel, MODEL_SCHEMA_VERSION};
use crate::exec;
use crate::features::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Forest hyperparameters. `features_per_split = None` means ⌈√d⌉.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestHyper {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// One decision-tree node; splits send `x[feature] <= threshold` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
pub enum TreeNode {
    #[serde(rename = "leaf")]
    Leaf { class_index: usize },
    #[serde(rename = "split")]
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            TreeNode::Leaf { class_index } => *class_index,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

/// Vote fractions over all trees, aligned with the model's class order.
pub(super) fn vote_probabilities(trees: &[TreeNode], x: &[f64], n_classes: usize) -> Vec<f64> {
    let mut votes = vec![0usize; n_classes];
    for tree in trees {
        votes[tree.predict(x)] += 1;
    }
    let total = trees.len().max(1) as f64;
    votes.iter().map(|&v| v as f64 / total).collect()
}

pub fn train_forest(
    train: &FeatureMatrix,
    hyper: &ForestHyper,
) -> Result<TrainedModel, ClassifyError> {
    let (classes, y) = class_layout(train)?;
    let d = train.cols();
    if hyper.n_trees == 0 {
        return Err(ClassifyError::BadHyper("n_trees must be at least 1"));
    }
    if hyper.min_samples_split < 2 {
        return Err(ClassifyError::BadHyper("min_samples_split must be at least 2"));
    }
    let features_per_split = match hyper.features_per_split {
        Some(m) if (1..=d).contains(&m) => m,
        Some(m) => return Err(ClassifyError::BadFeaturesPerSplit { got: m, d }),
        None => (d as f64).sqrt().ceil() as usize,
    };

    let ctx = TreeContext {
        matrix: train,
        y: &y,
        n_classes: classes.len(),
        max_depth: hyper.max_depth,
        min_samples_split: hyper.min_samples_split,
        features_per_split,
    };

    let trees = exec::map_indexed(hyper.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(hyper.seed, t as u64, 29));
        let n = train.rows();
        let rows: Vec<usize> = if hyper.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        build_node(&ctx, rows, 0, &mut rng)
    });

    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        classes,
        col_meta: train.col_meta().to_vec(),
        stats: None,
        variant: ModelVariant::Forest {
            hyper: hyper.clone(),
            trees,
        },
    })
}

struct TreeContext<'a> {
    matrix: &'a FeatureMatrix,
    y: &'a [usize],
    n_classes: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
    features_per_split: usize,
}

#[derive(Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
}

fn gini_from_counts(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn build_node(ctx: &TreeContext, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
    let mut counts = vec![0usize; ctx.n_classes];
    for &r in &rows {
        counts[ctx.y[r]] += 1;
    }
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = ctx.max_depth.is_some_and(|limit| depth >= limit);
    if pure || depth_capped || rows.len() < ctx.min_samples_split {
        return TreeNode::Leaf {
            class_index: majority(&counts),
        };
    }

    // Candidate features: sampled without replacement per node, evaluated in
    // ascending index order so impurity ties resolve to the lowest feature.
    let d = ctx.matrix.cols();
    let mut pool: Vec<usize> = (0..d).collect();
    for k in 0..ctx.features_per_split.min(d) {
        let pick = rng.random_range(k..d);
        pool.swap(k, pick);
    }
    let mut candidates = pool[..ctx.features_per_split.min(d)].to_vec();
    candidates.sort_unstable();

    let mut best: Option<SplitChoice> = None;
    for feature in candidates {
        if let Some(choice) = best_split_on_feature(ctx, &rows, feature) {
            best = match best {
                None => Some(choice),
                Some(b) if choice.weighted_gini < b.weighted_gini => Some(choice),
                Some(b) => Some(b),
            };
        }
    }

    let Some(choice) = best else {
        return TreeNode::Leaf {
            class_index: majority(&counts),
        };
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| ctx.matrix.get(r, choice.feature) <= choice.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    TreeNode::Split {
        feature: choice.feature,
        threshold: choice.threshold,
        left: Box::new(build_node(ctx, left_rows, depth + 1, rng)),
        right: Box::new(build_node(ctx, right_rows, depth + 1, rng)),
    }
}

/// Best midpoint split on one feature: sort the rows once, then scan
/// boundaries between adjacent distinct values with incremental class
/// counts. Ties on impurity keep the lowest threshold.
fn best_split_on_feature(ctx: &TreeContext, rows: &[usize], feature: usize) -> Option<SplitChoice> {
    let mut ordered: Vec<(f64, usize)> = rows
        .iter()
        .map(|&r| (ctx.matrix.get(r, feature), ctx.y[r]))
        .collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

    let n = ordered.len();
    let total: Vec<usize> = {
        let mut c = vec![0usize; ctx.n_classes];
        for &(_, y) in &ordered {
            c[y] += 1;
        }
        c
    };

    let mut left = vec![0usize; ctx.n_classes];
    let mut best: Option<SplitChoice> = None;
    for i in 0..n - 1 {
        left[ordered[i].1] += 1;
        if ordered[i].0 == ordered[i + 1].0 {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let weighted = (n_left as f64 / n as f64) * gini_from_counts(&left, n_left)
            + (n_right as f64 / n as f64) * gini_from_counts(&right, n_right);
        // Midpoint between adjacent distinct values; if the two values are
        // adjacent floats the midpoint can round up to the upper value, so
        // clamp back to keep both partitions non-empty.
        let mut threshold = (ordered[i].0 + ordered[i + 1].0) / 2.0;
        if threshold >= ordered[i + 1].0 {
            threshold = ordered[i].0;
        }
        let better = match best {
            None => true,
            Some(b) => weighted < b.weighted_gini,
        };
        if better {
            best = Some(SplitChoice {
                feature,
                threshold,
                weighted_gini: weighted,
            });
        }
    }
    best
}
