use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::Classifier;
use crate::dataset::{FeatureVector, Subset, SubsetCollection};
use crate::error::{Error, Result};
use crate::photon_stats::{MeanPhotonNumber, SourceKind, FEATURE_LEN};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WeightInit {
    #[default]
    Zeros,
    /// Uniform in ±the given half-width, drawn from the training seed.
    Uniform(f64),
}

/// Input conditioning applied during training.
///
/// The seven photon-number probabilities always sum to one and vary by only
/// ~1/sqrt(m) around their mean, so the raw inputs are nearly collinear with
/// the bias and the delta rule crawls along the discriminating directions.
/// `CenterScale` subtracts the training centroid and divides by the RMS
/// distance to it before updating; the learned hyperplane is mapped back so
/// the stored weights act on raw features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputScaling {
    None,
    #[default]
    CenterScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdalineConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub init: WeightInit,
    pub scaling: InputScaling,
    pub seed: u64,
}

impl Default for AdalineConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            max_epochs: 50,
            init: WeightInit::Zeros,
            scaling: InputScaling::CenterScale,
            seed: 0,
        }
    }
}

/// Single linear neuron thresholded at zero: Coherent when w·x + b >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AdalineModel {
    pub weights: [f64; FEATURE_LEN],
    pub bias: f64,
    pub learning_rate: f64,
    pub epochs_trained: usize,
    pub nbar: Option<MeanPhotonNumber>,
    pub m: usize,
    pub seed: u64,
}

impl AdalineModel {
    pub fn from_parts(weights: [f64; FEATURE_LEN], bias: f64) -> Self {
        Self {
            weights,
            bias,
            learning_rate: 0.0,
            epochs_trained: 0,
            nbar: None,
            m: 0,
            seed: 0,
        }
    }

    #[inline]
    pub fn activation(&self, x: &[f64; FEATURE_LEN]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &FeatureVector) -> SourceKind {
        adaline_predict(self, x)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    /// Trains on a balanced collection with the delta rule.
    pub fn train(train: &SubsetCollection, config: &AdalineConfig) -> Result<Self> {
        adaline_train(train, config)
    }
}

#[inline]
fn dot(a: &[f64; FEATURE_LEN], b: &[f64; FEATURE_LEN]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One delta-rule step: w += η(d - y)x, b += η(d - y) with y = w·x + b.
/// Returns the pre-update error d - y.
pub fn delta_update(
    weights: &mut [f64; FEATURE_LEN],
    bias: &mut f64,
    x: &[f64; FEATURE_LEN],
    target: f64,
    learning_rate: f64,
) -> f64 {
    let err = target - (dot(weights, x) + *bias);
    let step = learning_rate * err;
    for (w, xi) in weights.iter_mut().zip(x) {
        *w += step * xi;
    }
    *bias += step;
    err
}

pub fn adaline_predict(model: &AdalineModel, x: &FeatureVector) -> SourceKind {
    if model.activation(&x.probs) >= 0.0 {
        SourceKind::Coherent
    } else {
        SourceKind::Thermal
    }
}

fn adaline_train(train: &SubsetCollection, config: &AdalineConfig) -> Result<AdalineModel> {
    if train.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !train.is_balanced() {
        return Err(Error::config("training collection is not class-balanced"));
    }
    let eta = config.learning_rate;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::config("learning rate must be finite and > 0"));
    }

    let (center, scale) = match config.scaling {
        InputScaling::None => ([0.0; FEATURE_LEN], 1.0),
        InputScaling::CenterScale => center_and_scale(&train.subsets),
    };
    let inputs: Vec<([f64; FEATURE_LEN], f64)> = train
        .iter()
        .map(|s| {
            let mut z = s.features.probs;
            for (zi, c) in z.iter_mut().zip(&center) {
                *zi = (*zi - c) / scale;
            }
            (z, s.label.target())
        })
        .collect();

    let mut rng = seed::rng(config.seed);
    let mut weights = [0.0; FEATURE_LEN];
    let mut bias = 0.0;
    if let WeightInit::Uniform(half) = config.init {
        for w in weights.iter_mut() {
            *w = rng.random_range(-half..=half);
        }
        bias = rng.random_range(-half..=half);
    }

    let mut order: Vec<usize> = (0..inputs.len()).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (z, d) = &inputs[i];
            delta_update(&mut weights, &mut bias, z, *d, eta);
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                learning_rate: eta,
            });
        }
    }

    // Map z = (x - c)/s back to raw features.
    let raw_weights = weights.map(|w| w / scale);
    let raw_bias = bias - dot(&raw_weights, &center);
    Ok(AdalineModel {
        weights: raw_weights,
        bias: raw_bias,
        learning_rate: eta,
        epochs_trained: config.max_epochs,
        nbar: Some(train.nbar),
        m: train.m,
        seed: config.seed,
    })
}

fn center_and_scale(subsets: &[Subset]) -> ([f64; FEATURE_LEN], f64) {
    let n = subsets.len() as f64;
    let mut center = [0.0; FEATURE_LEN];
    for s in subsets {
        for (c, x) in center.iter_mut().zip(&s.features.probs) {
            *c += x;
        }
    }
    center.iter_mut().for_each(|c| *c /= n);
    let msd = subsets
        .iter()
        .map(|s| {
            s.features
                .probs
                .iter()
                .zip(&center)
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum::<f64>()
        / n;
    let scale = libm::sqrt(msd);
    (center, if scale > 0.0 { scale } else { 1.0 })
}

impl Classifier for AdalineModel {
    fn classify(&self, subset: &Subset) -> Result<SourceKind> {
        Ok(self.predict(&subset.features))
    }
}
