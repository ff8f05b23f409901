use alloc::vec;
use alloc::vec::Vec;

use super::layers::{dense_backward, dense_forward, sigmoid};
use super::{Example, MomentumGd, NetTrainConfig, Network, Standardizer};
use crate::classifiers::Classifier;
use crate::dataset::{FeatureVector, Subset, SubsetCollection};
use crate::error::{Error, Result};
use crate::photon_stats::{SourceKind, FEATURE_LEN};
use crate::seed;

pub const DEFAULT_HIDDEN: usize = 10;

/// Feed-forward network: 7 inputs → `hidden` sigmoid units → 2-way softmax.
///
/// Parameters are one flat vector laid out as
/// `[W1 (hidden × 7), b1 (hidden), W2 (2 × hidden), b2 (2)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MnnModel {
    pub hidden: usize,
    params: Vec<f64>,
    pub input: Standardizer,
    pub epochs_trained: usize,
    pub seed: u64,
}

impl MnnModel {
    pub fn param_count(hidden: usize) -> usize {
        hidden * FEATURE_LEN + hidden + 2 * hidden + 2
    }

    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            params: vec![0.0; Self::param_count(hidden)],
            input: Standardizer::identity(),
            epochs_trained: 0,
            seed: 0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn initialized(hidden: usize, seed: u64) -> Self {
        let mut model = Self::zeros(hidden);
        model.seed = seed;
        let mut rng = seed::rng(seed);
        let h = hidden;
        super::glorot_uniform(
            &mut rng,
            &mut model.params[..h * FEATURE_LEN],
            FEATURE_LEN,
            h,
        );
        let w2 = h * FEATURE_LEN + h;
        super::glorot_uniform(&mut rng, &mut model.params[w2..w2 + 2 * h], h, 2);
        model
    }

    pub fn from_params(hidden: usize, params: Vec<f64>, input: Standardizer) -> Result<Self> {
        if hidden == 0 || params.len() != Self::param_count(hidden) {
            return Err(Error::config(
                "parameter vector does not match the MNN layout",
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("MNN parameters"));
        }
        Ok(Self {
            hidden,
            params,
            input,
            epochs_trained: 0,
            seed: 0,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        let n = self.params.len();
        &mut self.params[n - 2..]
    }

    pub fn train(train: &SubsetCollection, hidden: usize, config: &NetTrainConfig) -> Result<Self> {
        super::check_trainable(train, config)?;
        if hidden == 0 {
            return Err(Error::config("hidden layer needs at least one unit"));
        }
        let batch = super::examples(train);
        let mut model = Self::initialized(hidden, config.seed);
        model.input = Standardizer::fit(&batch);
        let mut opt = MomentumGd::new(config.learning_rate, config.momentum, model.params.len());
        super::fit(&mut model, &batch, &mut opt, config)?;
        model.epochs_trained = config.max_epochs;
        Ok(model)
    }

    pub fn predict(&self, x: &FeatureVector) -> (SourceKind, [f64; 2]) {
        self.predict_raw(&x.probs)
    }

    pub fn predict_features(&self, x: &[f64; FEATURE_LEN]) -> (SourceKind, [f64; 2]) {
        self.predict_raw(x)
    }

    /// Mean cross-entropy over raw-feature examples.
    pub fn loss(&self, batch: &[Example]) -> f64 {
        self.mean_loss(batch)
    }

    pub fn loss_and_grad(&self, batch: &[Example]) -> (f64, Vec<f64>) {
        self.mean_loss_and_grad(batch)
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let h = self.hidden;
        let (w1, rest) = self.params.split_at(h * FEATURE_LEN);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(2 * h);
        (w1, b1, w2, b2)
    }

    fn hidden_activations(&self, z: &[f64; FEATURE_LEN]) -> Vec<f64> {
        let (w1, b1, _, _) = self.split();
        let mut h = vec![0.0; self.hidden];
        dense_forward(z, w1, b1, &mut h);
        h.iter_mut().for_each(|v| *v = sigmoid(*v));
        h
    }
}

impl Network for MnnModel {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Vec<f64> {
        &mut self.params
    }

    fn standardizer(&self) -> &Standardizer {
        &self.input
    }

    fn logits(&self, z: &[f64; FEATURE_LEN]) -> [f64; 2] {
        let h = self.hidden_activations(z);
        let (_, _, w2, b2) = self.split();
        let mut out = [0.0; 2];
        dense_forward(&h, w2, b2, &mut out);
        out
    }

    fn accumulate_grad(&self, z: &[f64; FEATURE_LEN], target: usize, grad: &mut [f64]) -> f64 {
        let hid = self.hidden;
        let h = self.hidden_activations(z);
        let (w1, _, w2, b2) = self.split();
        let mut logits = [0.0; 2];
        dense_forward(&h, w2, b2, &mut logits);
        let loss = super::layers::cross_entropy2(logits, target);
        let probs = super::layers::softmax2(logits);
        let mut dlogits = probs;
        dlogits[target] -= 1.0;

        let (gw1, rest) = grad.split_at_mut(hid * FEATURE_LEN);
        let (gb1, rest) = rest.split_at_mut(hid);
        let (gw2, gb2) = rest.split_at_mut(2 * hid);
        let mut dh = vec![0.0; hid];
        dense_backward(&h, w2, &dlogits, gw2, gb2, Some(&mut dh));
        for (d, a) in dh.iter_mut().zip(&h) {
            *d *= a * (1.0 - a);
        }
        dense_backward(z, w1, &dh, gw1, gb1, None);
        loss
    }
}

impl Classifier for MnnModel {
    fn classify(&self, subset: &Subset) -> Result<SourceKind> {
        Ok(self.predict_raw(&super::subset_example(subset)).0)
    }
}
