//! Dense net: ReLU hidden layers, softmax output, mean cross-entropy loss,
//! mini-batch backprop with the adaptive-moment (Adam) update. Inputs are
//! standardized internally; the statistics ride along in the trained model.

use super::{class_layout, ClassifyError, ModelVariant, TrainedModel, MODEL_SCHEMA_VERSION};
use crate::exec;
use crate::features::{standardize_apply, standardize_fit, FeatureMatrix};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Dense-net hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpHyper {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpHyper {
    fn default() -> Self {
        Self {
            hidden_layers: vec![64, 32],
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }
}

/// One dense layer; `weights[o·inputs + i]` connects input `i` to output `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.biases.clone();
        for (o, out_o) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *out_o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        out
    }
}

/// Per-layer gradients, same shapes as [`Layer`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

fn relu(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Forward pass returning class probabilities (softmax over the last
/// layer's logits).
pub(super) fn forward_probabilities(layers: &[Layer], x: &[f64]) -> Vec<f64> {
    let mut activation = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        activation = layer.affine(&activation);
        if i + 1 < layers.len() {
            relu(&mut activation);
        }
    }
    softmax(&activation)
}

/// Mean cross-entropy of the net over a batch.
pub fn mlp_loss(layers: &[Layer], xs: &[&[f64]], ys: &[usize]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let p = forward_probabilities(layers, x);
        total -= p[y].max(1e-300).ln();
    }
    total / xs.len() as f64
}

/// Analytic backprop gradients of the mean cross-entropy over a batch.
pub fn mlp_loss_gradients(layers: &[Layer], xs: &[&[f64]], ys: &[usize]) -> Vec<LayerGradients> {
    assert_eq!(xs.len(), ys.len());
    let batch = xs.len() as f64;
    let mut grads: Vec<LayerGradients> = layers
        .iter()
        .map(|l| LayerGradients {
            weights: vec![0.0; l.weights.len()],
            biases: vec![0.0; l.biases.len()],
        })
        .collect();

    for (x, &y) in xs.iter().zip(ys) {
        // Forward, keeping post-activation values per layer.
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(layers.len() + 1);
        activations.push(x.to_vec());
        for (i, layer) in layers.iter().enumerate() {
            let mut a = layer.affine(activations.last().unwrap());
            if i + 1 < layers.len() {
                relu(&mut a);
            }
            activations.push(a);
        }
        let probs = softmax(activations.last().unwrap());

        // δ for the output layer: (softmax − onehot)/batch.
        let mut delta: Vec<f64> = probs.iter().map(|p| p / batch).collect();
        delta[y] -= 1.0 / batch;

        for (i, layer) in layers.iter().enumerate().rev() {
            let input = &activations[i];
            let grad = &mut grads[i];
            for (o, &d) in delta.iter().enumerate() {
                grad.biases[o] += d;
                let row = &mut grad.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, &v) in row.iter_mut().zip(input) {
                    *w += d * v;
                }
            }
            if i == 0 {
                break;
            }
            // δ_prev = (Wᵀ δ) ⊙ relu'(a_prev); a_prev is post-ReLU, so the
            // derivative is 1 exactly where the activation is positive.
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p += w * d;
                }
            }
            for (p, &a) in prev.iter_mut().zip(&activations[i]) {
                if a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    grads
}

struct AdamState {
    m: Vec<LayerGradients>,
    v: Vec<LayerGradients>,
    t: u64,
}

impl AdamState {
    fn new(layers: &[Layer]) -> Self {
        let zeros = |l: &Layer| LayerGradients {
            weights: vec![0.0; l.weights.len()],
            biases: vec![0.0; l.biases.len()],
        };
        Self {
            m: layers.iter().map(zeros).collect(),
            v: layers.iter().map(zeros).collect(),
            t: 0,
        }
    }

    fn step(&mut self, layers: &mut [Layer], grads: &[LayerGradients], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t as i32);
        let bc2 = 1.0 - BETA2.powi(self.t as i32);
        for (i, layer) in layers.iter_mut().enumerate() {
            let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *param -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            };
            for (j, w) in layer.weights.iter_mut().enumerate() {
                update(
                    w,
                    grads[i].weights[j],
                    &mut self.m[i].weights[j],
                    &mut self.v[i].weights[j],
                );
            }
            for (j, b) in layer.biases.iter_mut().enumerate() {
                update(
                    b,
                    grads[i].biases[j],
                    &mut self.m[i].biases[j],
                    &mut self.v[i].biases[j],
                );
            }
        }
    }
}

pub fn train_mlp(train: &FeatureMatrix, hyper: &MlpHyper) -> Result<TrainedModel, ClassifyError> {
    let (classes, y) = class_layout(train)?;
    if hyper.hidden_layers.contains(&0) {
        return Err(ClassifyError::BadHyper("hidden layer sizes must be at least 1"));
    }
    if hyper.epochs == 0 {
        return Err(ClassifyError::BadHyper("epochs must be at least 1"));
    }
    if hyper.batch_size == 0 {
        return Err(ClassifyError::BadHyper("batch size must be at least 1"));
    }
    if !(hyper.learning_rate > 0.0 && hyper.learning_rate.is_finite()) {
        return Err(ClassifyError::BadHyper("learning rate must be positive"));
    }

    let stats = standardize_fit(train);
    let x = standardize_apply(&stats, train).expect("stats from same matrix");

    // He-style initialization: N(0, √(2/fan_in)) weights, zero biases.
    let mut dims = vec![train.cols()];
    dims.extend_from_slice(&hyper.hidden_layers);
    dims.push(classes.len());
    let mut init_rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(hyper.seed, 0, 41));
    let mut layers: Vec<Layer> = Vec::with_capacity(dims.len() - 1);
    for pair in dims.windows(2) {
        let (inputs, outputs) = (pair[0], pair[1]);
        let normal = Normal::new(0.0, (2.0 / inputs as f64).sqrt()).expect("valid stddev");
        let mut layer = Layer::zeros(inputs, outputs);
        for w in layer.weights.iter_mut() {
            *w = normal.sample(&mut init_rng);
        }
        layers.push(layer);
    }

    let mut adam = AdamState::new(&layers);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(hyper.seed, 1, 41));
    let mut order: Vec<usize> = (0..x.rows()).collect();

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        for (batch_idx, chunk) in order.chunks(hyper.batch_size).enumerate() {
            let xs: Vec<&[f64]> = chunk.iter().map(|&r| x.row(r)).collect();
            let ys: Vec<usize> = chunk.iter().map(|&r| y[r]).collect();
            let grads = mlp_loss_gradients(&layers, &xs, &ys);
            let loss = mlp_loss(&layers, &xs, &ys);
            if !loss.is_finite() {
                return Err(ClassifyError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            adam.step(&mut layers, &grads, hyper.learning_rate);
        }
    }

    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        classes,
        col_meta: train.col_meta().to_vec(),
        stats: Some(stats),
        variant: ModelVariant::Mlp {
            hyper: hyper.clone(),
            layers,
        },
    })
}
