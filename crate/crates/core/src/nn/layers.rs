//! Layer kernels. Activations are `(N, C, H, W)` row-major; every backward
//! pass takes the upstream gradient and returns (or accumulates) the
//! gradients of its inputs and parameters.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::real::{gemm, Real};
use crate::rng::Rng;

/// How taps outside the input are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaddingMode {
    #[default]
    Zeros,
    /// Nearest edge pixel; avoids a synthetic edge along the border.
    Replicate,
}

/// 2-D convolution with "same"-style padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Conv2d<T: Real> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    #[serde(default)]
    pub padding_mode: PaddingMode,
    /// `out_channels × (in_channels·kernel·kernel)`.
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Conv2d<T> {
    /// Kaiming-uniform weights (ReLU gain), zero bias, "same" padding.
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, rng: &mut Rng) -> Self {
        let fan_in = in_channels * kernel * kernel;
        let bound = (6.0 / fan_in as f64).sqrt();
        let weight = (0..out_channels * fan_in).map(|_| T::of(rng.random_range(-bound..bound))).collect();
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding: kernel / 2,
            padding_mode: PaddingMode::Zeros,
            weight,
            bias: vec![T::zero(); out_channels],
        }
    }

    pub fn with_padding_mode(mut self, mode: PaddingMode) -> Self {
        self.padding_mode = mode;
        self
    }

    pub fn patch_len(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }

    pub fn output_size(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let (ph, pw) = (h + 2 * self.padding, w + 2 * self.padding);
        if ph < self.kernel || pw < self.kernel || self.stride == 0 {
            return None;
        }
        Some(((ph - self.kernel) / self.stride + 1, (pw - self.kernel) / self.stride + 1))
    }

    /// Calls `f(col_row, col, input_index)` for every tap that reads the
    /// input. Zero-padded taps are skipped; replicated taps read the
    /// nearest edge pixel.
    fn for_each_tap(&self, h: usize, w: usize, mut f: impl FnMut(usize, usize, usize)) {
        let (oh, ow) = self.output_size(h, w).expect("validated by caller");
        let k = self.kernel;
        let resolve = |i: isize, n: usize| -> Option<usize> {
            match self.padding_mode {
                PaddingMode::Zeros => (0..n as isize).contains(&i).then_some(i as usize),
                PaddingMode::Replicate => Some(i.clamp(0, n as isize - 1) as usize),
            }
        };
        for c in 0..self.in_channels {
            for ky in 0..k {
                for kx in 0..k {
                    let row = (c * k + ky) * k + kx;
                    for oy in 0..oh {
                        let Some(iy) = resolve((oy * self.stride + ky) as isize - self.padding as isize, h) else {
                            continue;
                        };
                        for ox in 0..ow {
                            let Some(ix) = resolve((ox * self.stride + kx) as isize - self.padding as isize, w) else {
                                continue;
                            };
                            f(row, oy * ow + ox, (c * h + iy) * w + ix);
                        }
                    }
                }
            }
        }
    }

    /// Returns `(output, patches)`; the patch matrix is kept for backward.
    pub fn forward(&self, input: &[T], n: usize, h: usize, w: usize) -> (Vec<T>, Vec<T>) {
        let (oh, ow) = self.output_size(h, w).expect("validated by caller");
        let (kk, p) = (self.patch_len(), oh * ow);
        let plane = self.in_channels * h * w;
        let mut cols = vec![T::zero(); n * kk * p];
        let mut out = vec![T::zero(); n * self.out_channels * p];
        for s in 0..n {
            let src = &input[s * plane..(s + 1) * plane];
            let col = &mut cols[s * kk * p..(s + 1) * kk * p];
            self.for_each_tap(h, w, |r, c, i| col[r * p + c] = src[i]);
            let dst = &mut out[s * self.out_channels * p..(s + 1) * self.out_channels * p];
            for (o, b) in self.bias.iter().enumerate() {
                dst[o * p..(o + 1) * p].iter_mut().for_each(|v| *v = *b);
            }
            gemm(self.out_channels, kk, p, &self.weight, false, col, false, T::one(), dst);
        }
        (out, cols)
    }

    /// Accumulates parameter gradients; returns the input gradient when asked.
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        cols: &[T],
        grad_out: &[T],
        n: usize,
        h: usize,
        w: usize,
        weight_grad: &mut [T],
        bias_grad: &mut [T],
        want_input: bool,
    ) -> Option<Vec<T>> {
        let (oh, ow) = self.output_size(h, w).expect("validated by caller");
        let (kk, p, oc) = (self.patch_len(), oh * ow, self.out_channels);
        let plane = self.in_channels * h * w;
        let mut input_grad = want_input.then(|| vec![T::zero(); n * plane]);
        let mut dcols = if want_input { vec![T::zero(); kk * p] } else { Vec::new() };
        for s in 0..n {
            let g = &grad_out[s * oc * p..(s + 1) * oc * p];
            let col = &cols[s * kk * p..(s + 1) * kk * p];
            gemm(oc, p, kk, g, false, col, true, T::one(), weight_grad);
            for (o, b) in bias_grad.iter_mut().enumerate() {
                *b += g[o * p..(o + 1) * p].iter().fold(T::zero(), |a, &v| a + v);
            }
            if let Some(ig) = input_grad.as_mut() {
                gemm(kk, oc, p, &self.weight, true, g, false, T::zero(), &mut dcols);
                let dst = &mut ig[s * plane..(s + 1) * plane];
                self.for_each_tap(h, w, |r, c, i| dst[i] += dcols[r * p + c]);
            }
        }
        input_grad
    }
}

/// Fully-connected layer, `y = x·Wᵀ + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Linear<T: Real> {
    pub in_features: usize,
    pub out_features: usize,
    /// `out_features × in_features`.
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Linear<T> {
    /// Uniform `±1/√fan_in` weights, zero bias.
    pub fn new(in_features: usize, out_features: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (in_features as f64).sqrt();
        let weight = (0..in_features * out_features).map(|_| T::of(rng.random_range(-bound..bound))).collect();
        Self { in_features, out_features, weight, bias: vec![T::zero(); out_features] }
    }

    pub fn forward(&self, input: &[T], n: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n * self.out_features);
        for _ in 0..n {
            out.extend_from_slice(&self.bias);
        }
        gemm(n, self.in_features, self.out_features, input, false, &self.weight, true, T::one(), &mut out);
        out
    }

    pub fn backward(&self, input: &[T], grad_out: &[T], n: usize, weight_grad: &mut [T], bias_grad: &mut [T]) -> Vec<T> {
        gemm(self.out_features, n, self.in_features, grad_out, true, input, false, T::one(), weight_grad);
        for row in grad_out.chunks_exact(self.out_features) {
            for (b, &g) in bias_grad.iter_mut().zip(row) {
                *b += g;
            }
        }
        let mut input_grad = vec![T::zero(); n * self.in_features];
        gemm(n, self.out_features, self.in_features, grad_out, false, &self.weight, false, T::zero(), &mut input_grad);
        input_grad
    }
}

pub fn relu_in_place<T: Real>(x: &mut [T]) {
    for v in x {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zeroes gradient entries whose forward output was clipped.
pub fn relu_backward<T: Real>(output: &[T], grad: &mut [T]) {
    for (g, &o) in grad.iter_mut().zip(output) {
        if o <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Non-overlapping `size×size` max pooling over `planes` maps of `h×w`
/// (`h`, `w` divisible by `size`). Returns the pooled maps and the flat
/// input index of each maximum (first in scan order on ties).
pub fn max_pool<T: Real>(input: &[T], planes: usize, h: usize, w: usize, size: usize) -> (Vec<T>, Vec<u32>) {
    let (oh, ow) = (h / size, w / size);
    let mut out = Vec::with_capacity(planes * oh * ow);
    let mut index = Vec::with_capacity(planes * oh * ow);
    for pl in 0..planes {
        let base = pl * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = base + oy * size * w + ox * size;
                for dy in 0..size {
                    for dx in 0..size {
                        let i = base + (oy * size + dy) * w + ox * size + dx;
                        if input[i] > input[best] {
                            best = i;
                        }
                    }
                }
                out.push(input[best]);
                index.push(best as u32);
            }
        }
    }
    (out, index)
}

pub fn max_pool_backward<T: Real>(grad_out: &[T], index: &[u32], input_len: usize) -> Vec<T> {
    let mut grad = vec![T::zero(); input_len];
    for (&g, &i) in grad_out.iter().zip(index) {
        grad[i as usize] += g;
    }
    grad
}

/// Mean over each `area`-sized plane.
pub fn global_avg_pool<T: Real>(input: &[T], area: usize) -> Vec<T> {
    let scale = T::one() / T::of(area as f64);
    input.chunks_exact(area).map(|c| c.iter().fold(T::zero(), |a, &v| a + v) * scale).collect()
}

pub fn global_avg_pool_backward<T: Real>(grad_out: &[T], area: usize) -> Vec<T> {
    let scale = T::one() / T::of(area as f64);
    grad_out.iter().flat_map(|&g| core::iter::repeat_n(g * scale, area)).collect()
}

/// Mean cross-entropy of `n` rows of `classes` logits. Returns the loss
/// and its gradient with respect to the logits. Labels must be in range.
pub fn softmax_cross_entropy<T: Real>(logits: &[T], labels: &[usize], classes: usize) -> (T, Vec<T>) {
    let n = labels.len();
    let inv_n = T::one() / T::of(n as f64);
    let mut grad = vec![T::zero(); logits.len()];
    let mut loss = T::zero();
    for (s, &label) in labels.iter().enumerate() {
        let row = &logits[s * classes..(s + 1) * classes];
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let sum = row.iter().fold(T::zero(), |a, &v| a + (v - max).exp());
        let log_z = max + sum.ln();
        loss += log_z - row[label];
        for (c, &v) in row.iter().enumerate() {
            let p = (v - log_z).exp();
            grad[s * classes + c] = (p - if c == label { T::one() } else { T::zero() }) * inv_n;
        }
    }
    (loss * inv_n, grad)
}

/// Softmax of one logit row, computed in `f64`.
pub fn softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
