//! Slice-based layer kernels with hand-written backward passes.
//!
//! Activations are stored channel-major: element `(c, t)` of a `ch × len`
//! tensor lives at `c * len + t`. Backward functions accumulate parameter
//! gradients into the provided buffers.

use alloc::vec;
use alloc::vec::Vec;

/// y = W x + b with W stored row-major as `out × inp`.
pub fn dense_forward(x: &[f64], w: &[f64], b: &[f64], y: &mut [f64]) {
    let inp = x.len();
    for (o, yo) in y.iter_mut().enumerate() {
        let row = &w[o * inp..(o + 1) * inp];
        *yo = b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

pub fn dense_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    dx: Option<&mut [f64]>,
) {
    let inp = x.len();
    for (o, &g) in dy.iter().enumerate() {
        db[o] += g;
        for (dwi, xi) in dw[o * inp..(o + 1) * inp].iter_mut().zip(x) {
            *dwi += g * xi;
        }
    }
    if let Some(dx) = dx {
        for (i, dxi) in dx.iter_mut().enumerate() {
            *dxi = dy.iter().enumerate().map(|(o, g)| g * w[o * inp + i]).sum();
        }
    }
}

/// Shape of a 1D convolution with zero padding and stride 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv1d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub pad: usize,
}

impl Conv1d {
    pub fn out_len(&self, len: usize) -> usize {
        len + 2 * self.pad + 1 - self.kernel
    }

    pub fn weight_len(&self) -> usize {
        self.out_ch * self.in_ch * self.kernel
    }

    /// Patch width: one row of the im2col matrix.
    #[inline]
    pub fn patch_len(&self) -> usize {
        self.in_ch * self.kernel
    }

    /// im2col: row `t` holds the (channel, tap) inputs seen by output `t`,
    /// zero where the kernel hangs over the padded edge.
    fn patches(&self, x: &[f64], len: usize) -> Vec<f64> {
        let out_len = self.out_len(len);
        let k = self.kernel;
        let width = self.patch_len();
        let mut rows = vec![0.0; out_len * width];
        for t in 0..out_len {
            let row = &mut rows[t * width..(t + 1) * width];
            for c in 0..self.in_ch {
                for j in 0..k {
                    if let Some(i) = (t + j).checked_sub(self.pad).filter(|&i| i < len) {
                        row[c * k + j] = x[c * len + i];
                    }
                }
            }
        }
        rows
    }

    pub fn forward(&self, x: &[f64], len: usize, w: &[f64], b: &[f64], y: &mut [f64]) {
        let out_len = self.out_len(len);
        let width = self.patch_len();
        let rows = self.patches(x, len);
        for o in 0..self.out_ch {
            let wo = &w[o * width..(o + 1) * width];
            for t in 0..out_len {
                let row = &rows[t * width..(t + 1) * width];
                y[o * out_len + t] = b[o] + dot(wo, row);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        x: &[f64],
        len: usize,
        w: &[f64],
        dy: &[f64],
        dw: &mut [f64],
        db: &mut [f64],
        dx: Option<&mut [f64]>,
    ) {
        let out_len = self.out_len(len);
        let k = self.kernel;
        let width = self.patch_len();
        let rows = self.patches(x, len);
        let mut drows = dx.as_ref().map(|_| vec![0.0; out_len * width]);
        for o in 0..self.out_ch {
            let wo = &w[o * width..(o + 1) * width];
            let dwo = &mut dw[o * width..(o + 1) * width];
            for t in 0..out_len {
                let g = dy[o * out_len + t];
                if g == 0.0 {
                    continue;
                }
                db[o] += g;
                axpy(g, &rows[t * width..(t + 1) * width], dwo);
                if let Some(drows) = drows.as_mut() {
                    axpy(g, wo, &mut drows[t * width..(t + 1) * width]);
                }
            }
        }
        if let (Some(dx), Some(drows)) = (dx, drows) {
            dx.iter_mut().for_each(|v| *v = 0.0);
            for t in 0..out_len {
                let row = &drows[t * width..(t + 1) * width];
                for c in 0..self.in_ch {
                    for j in 0..k {
                        if let Some(i) = (t + j).checked_sub(self.pad).filter(|&i| i < len) {
                            dx[c * len + i] += row[c * k + j];
                        }
                    }
                }
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y += a x
#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Non-overlapping max pooling; a trailing partial window is dropped.
pub fn max_pool_forward(
    x: &[f64],
    channels: usize,
    len: usize,
    width: usize,
    y: &mut [f64],
    argmax: &mut [usize],
) {
    let out_len = len / width;
    for c in 0..channels {
        for t in 0..out_len {
            let start = c * len + t * width;
            let mut best = start;
            for i in start + 1..start + width {
                if x[i] > x[best] {
                    best = i;
                }
            }
            y[c * out_len + t] = x[best];
            argmax[c * out_len + t] = best;
        }
    }
}

pub fn max_pool_backward(dy: &[f64], argmax: &[usize], dx: &mut [f64]) {
    dx.iter_mut().for_each(|v| *v = 0.0);
    for (g, &i) in dy.iter().zip(argmax) {
        dx[i] += g;
    }
}

pub fn relu_in_place(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Zeroes gradient entries whose activation was clipped.
pub fn relu_backward(activated: &[f64], grad: &mut [f64]) {
    for (g, a) in grad.iter_mut().zip(activated) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let top = logits[0].max(logits[1]);
    let e0 = libm::exp(logits[0] - top);
    let e1 = libm::exp(logits[1] - top);
    let z = e0 + e1;
    [e0 / z, e1 / z]
}

/// Cross-entropy of the two-way softmax against class `target`, computed
/// from logits as logsumexp - logit[target].
pub fn cross_entropy2(logits: [f64; 2], target: usize) -> f64 {
    let top = logits[0].max(logits[1]);
    let lse = top + libm::log(libm::exp(logits[0] - top) + libm::exp(logits[1] - top));
    lse - logits[target]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_pool_example() {
        let x = [0.2, 0.9, 0.4, 0.4];
        let mut y = [0.0; 2];
        let mut idx = [0; 2];
        max_pool_forward(&x, 1, 4, 2, &mut y, &mut idx);
        assert_eq!(y, [0.9, 0.4]);
        assert_eq!(idx, [1, 2]);
    }

    #[test]
    fn max_pool_drops_trailing_sample() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 99.0];
        let mut y = [0.0; 3];
        let mut idx = [0; 3];
        max_pool_forward(&x, 1, 7, 2, &mut y, &mut idx);
        assert_eq!(y, [2.0, 4.0, 6.0]);
    }

    #[test]
    fn same_padded_conv_keeps_length() {
        let conv = Conv1d {
            in_ch: 1,
            out_ch: 1,
            kernel: 3,
            pad: 1,
        };
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        conv.forward(&x, 3, &[1.0, 1.0, 1.0], &[0.5], &mut y);
        assert_eq!(y, [3.5, 6.5, 5.5]);
    }

    #[test]
    fn softmax_and_cross_entropy() {
        let p = softmax2([0.0, 0.0]);
        assert_eq!(p, [0.5, 0.5]);
        assert!((cross_entropy2([0.0, 0.0], 1) - libm::log(2.0)).abs() < 1e-15);
        let p = softmax2([800.0, -800.0]);
        assert_eq!(p[0], 1.0);
        assert!(cross_entropy2([800.0, -800.0], 0) >= 0.0);
    }
}
