use alloc::vec;
use alloc::vec::Vec;

use super::layers::{
    cross_entropy2, dense_backward, dense_forward, max_pool_backward, max_pool_forward,
    relu_backward, relu_in_place, softmax2, Conv1d,
};
use super::{Example, MomentumGd, NetTrainConfig, Network, Standardizer};
use crate::classifiers::Classifier;
use crate::dataset::{FeatureVector, Subset, SubsetCollection};
use crate::error::{Error, Result};
use crate::photon_stats::{SourceKind, FEATURE_LEN};
use crate::seed;

/// conv → conv → max-pool → conv → max-pool → flatten → dense → softmax,
/// ReLU after every convolution and the dense layer. Convolutions are
/// stride 1 with "same" zero padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnnArchitecture {
    pub input_len: usize,
    pub kernel: usize,
    pub channels: [usize; 3],
    pub pool: usize,
    pub dense: usize,
}

impl Default for CnnArchitecture {
    fn default() -> Self {
        Self {
            input_len: FEATURE_LEN,
            kernel: 3,
            channels: [8, 16, 16],
            pool: 2,
            dense: 16,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Offsets {
    w: [usize; 5],
    b: [usize; 5],
    total: usize,
}

impl CnnArchitecture {
    fn convs(&self) -> [Conv1d; 3] {
        let pad = self.kernel / 2;
        let [c1, c2, c3] = self.channels;
        [(1, c1), (c1, c2), (c2, c3)].map(|(in_ch, out_ch)| Conv1d {
            in_ch,
            out_ch,
            kernel: self.kernel,
            pad,
        })
    }

    /// Signal lengths: [after conv1, after conv2, after pool1, after conv3, after pool2].
    pub fn lengths(&self) -> [usize; 5] {
        let [conv1, conv2, conv3] = self.convs();
        let l1 = conv1.out_len(self.input_len);
        let l2 = conv2.out_len(l1);
        let p1 = l2 / self.pool;
        let l3 = conv3.out_len(p1);
        let p2 = l3 / self.pool;
        [l1, l2, p1, l3, p2]
    }

    /// Length of the flattened vector fed to the dense layer.
    pub fn flattened_len(&self) -> usize {
        self.channels[2] * self.lengths()[4]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.input_len > 0
            && self.kernel % 2 == 1
            && self.channels.iter().all(|&c| c > 0)
            && self.pool > 0
            && self.dense > 0;
        if !positive || self.flattened_len() == 0 {
            return Err(Error::config(
                "CNN layers do not compose over the input length",
            ));
        }
        Ok(())
    }

    fn offsets(&self) -> Offsets {
        let convs = self.convs();
        let flat = self.flattened_len();
        let sizes = [
            (convs[0].weight_len(), convs[0].out_ch),
            (convs[1].weight_len(), convs[1].out_ch),
            (convs[2].weight_len(), convs[2].out_ch),
            (self.dense * flat, self.dense),
            (2 * self.dense, 2),
        ];
        let mut w = [0; 5];
        let mut b = [0; 5];
        let mut at = 0;
        for (i, (wl, bl)) in sizes.into_iter().enumerate() {
            w[i] = at;
            b[i] = at + wl;
            at += wl + bl;
        }
        Offsets { w, b, total: at }
    }

    pub fn param_count(&self) -> usize {
        self.offsets().total
    }
}

/// Intermediate activations of one forward pass.
struct Activations {
    a1: Vec<f64>,
    a2: Vec<f64>,
    p1: Vec<f64>,
    i1: Vec<usize>,
    a3: Vec<f64>,
    p2: Vec<f64>,
    i2: Vec<usize>,
    h: Vec<f64>,
    logits: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub arch: CnnArchitecture,
    params: Vec<f64>,
    pub input: Standardizer,
    pub epochs_trained: usize,
    pub seed: u64,
}

impl CnnModel {
    pub fn zeros(arch: CnnArchitecture) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            arch,
            params: vec![0.0; arch.param_count()],
            input: Standardizer::identity(),
            epochs_trained: 0,
            seed: 0,
        })
    }

    pub fn initialized(arch: CnnArchitecture, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        model.seed = seed;
        let mut rng = seed::rng(seed);
        let off = arch.offsets();
        let k = arch.kernel;
        let flat = arch.flattened_len();
        let fans = [
            (k, arch.channels[0] * k),
            (arch.channels[0] * k, arch.channels[1] * k),
            (arch.channels[1] * k, arch.channels[2] * k),
            (flat, arch.dense),
            (arch.dense, 2),
        ];
        for (i, (fan_in, fan_out)) in fans.into_iter().enumerate() {
            let w = &mut model.params[off.w[i]..off.b[i]];
            super::glorot_uniform(&mut rng, w, fan_in, fan_out);
        }
        Ok(model)
    }

    pub fn from_params(
        arch: CnnArchitecture,
        params: Vec<f64>,
        input: Standardizer,
    ) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::config(
                "parameter vector does not match the CNN layout",
            ));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("CNN parameters"));
        }
        Ok(Self {
            arch,
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

    pub fn train(
        train: &SubsetCollection,
        arch: CnnArchitecture,
        config: &NetTrainConfig,
    ) -> Result<Self> {
        super::check_trainable(train, config)?;
        let batch = super::examples(train);
        let mut model = Self::initialized(arch, config.seed)?;
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

    pub fn loss(&self, batch: &[Example]) -> f64 {
        self.mean_loss(batch)
    }

    pub fn loss_and_grad(&self, batch: &[Example]) -> (f64, Vec<f64>) {
        self.mean_loss_and_grad(batch)
    }

    /// Flattened dense-layer input for a raw feature vector.
    pub fn flattened(&self, x: &[f64; FEATURE_LEN]) -> Vec<f64> {
        self.forward(&self.input.apply(x)).p2
    }

    fn forward(&self, z: &[f64; FEATURE_LEN]) -> Activations {
        let arch = &self.arch;
        let off = arch.offsets();
        let p = &self.params;
        let [conv1, conv2, conv3] = arch.convs();
        let [l1, l2, lp1, l3, lp2] = arch.lengths();
        let [c1, c2, c3] = arch.channels;
        let slice = |i: usize| {
            (
                &p[off.w[i]..off.b[i]],
                &p[off.b[i]..off.b[i] + bias_len(arch, i)],
            )
        };

        let mut a1 = vec![0.0; c1 * l1];
        let (w, b) = slice(0);
        conv1.forward(z, arch.input_len, w, b, &mut a1);
        relu_in_place(&mut a1);

        let mut a2 = vec![0.0; c2 * l2];
        let (w, b) = slice(1);
        conv2.forward(&a1, l1, w, b, &mut a2);
        relu_in_place(&mut a2);

        let mut p1 = vec![0.0; c2 * lp1];
        let mut i1 = vec![0; c2 * lp1];
        max_pool_forward(&a2, c2, l2, arch.pool, &mut p1, &mut i1);

        let mut a3 = vec![0.0; c3 * l3];
        let (w, b) = slice(2);
        conv3.forward(&p1, lp1, w, b, &mut a3);
        relu_in_place(&mut a3);

        let mut p2 = vec![0.0; c3 * lp2];
        let mut i2 = vec![0; c3 * lp2];
        max_pool_forward(&a3, c3, l3, arch.pool, &mut p2, &mut i2);

        let mut h = vec![0.0; arch.dense];
        let (w, b) = slice(3);
        dense_forward(&p2, w, b, &mut h);
        relu_in_place(&mut h);

        let mut logits = [0.0; 2];
        let (w, b) = slice(4);
        dense_forward(&h, w, b, &mut logits);

        Activations {
            a1,
            a2,
            p1,
            i1,
            a3,
            p2,
            i2,
            h,
            logits,
        }
    }
}

fn bias_len(arch: &CnnArchitecture, layer: usize) -> usize {
    match layer {
        0..=2 => arch.channels[layer],
        3 => arch.dense,
        _ => 2,
    }
}

impl Network for CnnModel {
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
        self.forward(z).logits
    }

    fn accumulate_grad(&self, z: &[f64; FEATURE_LEN], target: usize, grad: &mut [f64]) -> f64 {
        let arch = &self.arch;
        let act = self.forward(z);
        let off = arch.offsets();
        let p = &self.params;
        let [conv1, conv2, conv3] = arch.convs();
        let [l1, l2, lp1, l3, _] = arch.lengths();
        let [c1, c2, c3] = arch.channels;

        let loss = cross_entropy2(act.logits, target);
        let mut dlogits = softmax2(act.logits);
        dlogits[target] -= 1.0;

        // Gradient buffers for layer i are disjoint slices of `grad`.
        macro_rules! layer_grads {
            ($i:expr) => {{
                let (head, tail) = grad.split_at_mut(off.b[$i]);
                (&mut head[off.w[$i]..], &mut tail[..bias_len(arch, $i)])
            }};
        }

        let mut dh = vec![0.0; arch.dense];
        {
            let (gw, gb) = layer_grads!(4);
            dense_backward(
                &act.h,
                &p[off.w[4]..off.b[4]],
                &dlogits,
                gw,
                gb,
                Some(&mut dh),
            );
        }
        relu_backward(&act.h, &mut dh);

        let mut dp2 = vec![0.0; act.p2.len()];
        {
            let (gw, gb) = layer_grads!(3);
            dense_backward(&act.p2, &p[off.w[3]..off.b[3]], &dh, gw, gb, Some(&mut dp2));
        }

        let mut da3 = vec![0.0; c3 * l3];
        max_pool_backward(&dp2, &act.i2, &mut da3);
        relu_backward(&act.a3, &mut da3);

        let mut dp1 = vec![0.0; c2 * lp1];
        {
            let (gw, gb) = layer_grads!(2);
            conv3.backward(
                &act.p1,
                lp1,
                &p[off.w[2]..off.b[2]],
                &da3,
                gw,
                gb,
                Some(&mut dp1),
            );
        }

        let mut da2 = vec![0.0; c2 * l2];
        max_pool_backward(&dp1, &act.i1, &mut da2);
        relu_backward(&act.a2, &mut da2);

        let mut da1 = vec![0.0; c1 * l1];
        {
            let (gw, gb) = layer_grads!(1);
            conv2.backward(
                &act.a1,
                l1,
                &p[off.w[1]..off.b[1]],
                &da2,
                gw,
                gb,
                Some(&mut da1),
            );
        }
        relu_backward(&act.a1, &mut da1);

        {
            let (gw, gb) = layer_grads!(0);
            conv1.backward(
                z,
                arch.input_len,
                &p[off.w[0]..off.b[0]],
                &da1,
                gw,
                gb,
                None,
            );
        }
        loss
    }
}

impl Classifier for CnnModel {
    fn classify(&self, subset: &Subset) -> Result<SourceKind> {
        Ok(self.predict_raw(&super::subset_example(subset)).0)
    }
}
