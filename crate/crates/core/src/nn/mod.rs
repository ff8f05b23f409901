//! Small from-scratch networks over the seven photon-number features: a
//! two-layer perceptron with sigmoid hidden units and a 1D convolutional
//! network. Both end in a two-way softmax and train full-batch on mean
//! cross-entropy.

mod cnn;
pub mod layers;
mod mnn;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

pub use cnn::{CnnArchitecture, CnnModel};
pub use mnn::{MnnModel, DEFAULT_HIDDEN};

use crate::dataset::{Subset, SubsetCollection};
use crate::error::{Error, Result};
use crate::photon_stats::{SourceKind, FEATURE_LEN};
use crate::seed;

/// A raw feature vector and its label.
pub type Example = ([f64; FEATURE_LEN], SourceKind);

pub fn examples(collection: &SubsetCollection) -> Vec<Example> {
    collection
        .iter()
        .map(|s| (s.features.probs, s.label))
        .collect()
}

/// Smallest per-feature scale used by [`Standardizer`]; rare photon numbers
/// can have near-zero spread in the training set.
pub const MIN_FEATURE_SCALE: f64 = 0.01;

/// Per-feature affine input normalization fitted on the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: [f64; FEATURE_LEN],
    pub scale: [f64; FEATURE_LEN],
}

impl Standardizer {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; FEATURE_LEN],
            scale: [1.0; FEATURE_LEN],
        }
    }

    pub fn fit(examples: &[Example]) -> Self {
        let n = examples.len().max(1) as f64;
        let mut mean = [0.0; FEATURE_LEN];
        for (x, _) in examples {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v / n;
            }
        }
        let mut var = [0.0; FEATURE_LEN];
        for (x, _) in examples {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        Self {
            mean,
            scale: var.map(|v| libm::sqrt(v).max(MIN_FEATURE_SCALE)),
        }
    }

    pub fn apply(&self, x: &[f64; FEATURE_LEN]) -> [f64; FEATURE_LEN] {
        let mut z = *x;
        for ((zi, m), s) in z.iter_mut().zip(&self.mean).zip(&self.scale) {
            *zi = (*zi - m) / s;
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetTrainConfig {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl NetTrainConfig {
    pub fn mnn(seed: u64) -> Self {
        Self {
            max_epochs: 200,
            learning_rate: 0.05,
            momentum: 0.9,
            seed,
        }
    }

    pub fn cnn(seed: u64) -> Self {
        Self::mnn(seed)
    }
}

/// Parameter update rule.
pub trait Optimizer {
    fn step(&mut self, params: &mut [f64], grad: &[f64]);
}

/// Gradient descent with classical momentum: v = μv - ηg, θ += v.
#[derive(Debug, Clone)]
pub struct MomentumGd {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Vec<f64>,
}

impl MomentumGd {
    pub fn new(learning_rate: f64, momentum: f64, n_params: usize) -> Self {
        Self {
            learning_rate,
            momentum,
            velocity: vec![0.0; n_params],
        }
    }
}

impl Optimizer for MomentumGd {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for ((p, v), g) in params.iter_mut().zip(&mut self.velocity).zip(grad) {
            *v = self.momentum * *v - self.learning_rate * g;
            *p += *v;
        }
    }
}

/// Two-way softmax network over standardized features.
pub(crate) trait Network {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut Vec<f64>;
    fn standardizer(&self) -> &Standardizer;
    fn logits(&self, z: &[f64; FEATURE_LEN]) -> [f64; 2];
    /// Adds d(loss)/d(params) for one standardized example to `grad` and
    /// returns that example's cross-entropy.
    fn accumulate_grad(&self, z: &[f64; FEATURE_LEN], target: usize, grad: &mut [f64]) -> f64;

    fn predict_raw(&self, x: &[f64; FEATURE_LEN]) -> (SourceKind, [f64; 2]) {
        let probs = layers::softmax2(self.logits(&self.standardizer().apply(x)));
        let label = if probs[0] >= probs[1] {
            SourceKind::Coherent
        } else {
            SourceKind::Thermal
        };
        (label, probs)
    }

    fn mean_loss(&self, batch: &[Example]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|(x, y)| {
                layers::cross_entropy2(self.logits(&self.standardizer().apply(x)), y.index())
            })
            .sum();
        total / batch.len() as f64
    }

    fn mean_loss_and_grad(&self, batch: &[Example]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params().len()];
        let mut total = 0.0;
        for (x, y) in batch {
            let z = self.standardizer().apply(x);
            total += self.accumulate_grad(&z, y.index(), &mut grad);
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (total / n, grad)
    }
}

pub(crate) fn check_trainable(
    collection: &SubsetCollection,
    config: &NetTrainConfig,
) -> Result<()> {
    if collection.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !collection.is_balanced() {
        return Err(Error::config("training collection is not class-balanced"));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(Error::config("learning rate must be finite and > 0"));
    }
    Ok(())
}

/// Runs exactly `max_epochs` full-batch optimizer steps.
pub(crate) fn fit<N: Network>(
    net: &mut N,
    batch: &[Example],
    optimizer: &mut dyn Optimizer,
    config: &NetTrainConfig,
) -> Result<()> {
    for epoch in 1..=config.max_epochs {
        let (loss, grad) = net.mean_loss_and_grad(batch);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                learning_rate: config.learning_rate,
            });
        }
        optimizer.step(net.params_mut(), &grad);
    }
    if net.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged {
            epoch: config.max_epochs,
            learning_rate: config.learning_rate,
        });
    }
    Ok(())
}

/// Fills `out` with U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
pub(crate) fn glorot_uniform(rng: &mut seed::Rng, out: &mut [f64], fan_in: usize, fan_out: usize) {
    let a = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    for w in out.iter_mut() {
        *w = rng.random_range(-a..=a);
    }
}

pub(crate) fn subset_example(subset: &Subset) -> [f64; FEATURE_LEN] {
    subset.features.probs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizer_floors_scale() {
        let ex = [
            ([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], SourceKind::Coherent),
            ([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0], SourceKind::Thermal),
        ];
        let s = Standardizer::fit(&ex);
        assert_eq!(s.mean[0], 0.75);
        assert!((s.scale[0] - 0.25).abs() < 1e-15);
        assert_eq!(s.scale[6], MIN_FEATURE_SCALE);
    }

    #[test]
    fn momentum_step() {
        let mut opt = MomentumGd::new(0.1, 0.9, 1);
        let mut p = [1.0];
        opt.step(&mut p, &[1.0]);
        assert!((p[0] - 0.9).abs() < 1e-15);
        opt.step(&mut p, &[1.0]);
        // v = 0.9 * -0.1 - 0.1 = -0.19
        assert!((p[0] - 0.71).abs() < 1e-15);
    }
}
