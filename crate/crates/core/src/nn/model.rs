use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::layers::{self, Conv2d, Linear, PaddingMode};
use super::real::Real;
use super::tensor::Tensor;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Shape of the classifier: conv → ReLU → max-pool blocks, global average
/// pooling, one fully-connected layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_size: usize,
    pub in_channels: usize,
    pub channels: Vec<usize>,
    pub kernel: usize,
    pub stride: usize,
    pub pool: usize,
    pub num_classes: usize,
    #[serde(default)]
    pub padding: PaddingMode,
}

impl Architecture {
    /// Three blocks of 16/32/64 channels, 3×3 kernels, stride 1, 2×2 pooling,
    /// edge-replicating padding.
    pub fn desk(num_classes: usize) -> Self {
        Self {
            input_size: 64,
            in_channels: 3,
            channels: vec![16, 32, 64],
            kernel: 3,
            stride: 1,
            pool: 2,
            num_classes,
            padding: PaddingMode::Replicate,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.channels.is_empty() || self.channels.contains(&0) {
            return Err(Error::InvalidArgument("at least one conv block with non-zero channels required".into()));
        }
        if self.kernel == 0 || self.stride == 0 || self.pool == 0 || self.in_channels == 0 {
            return Err(Error::InvalidArgument("kernel, stride, pool and input channels must be positive".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {}", self.num_classes)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CnnModel<T: Real = f32> {
    pub arch: Architecture,
    pub convs: Vec<Conv2d<T>>,
    pub fc: Linear<T>,
    /// Epochs of training behind these parameters; 0 means untrained.
    #[serde(default)]
    pub trained_epochs: usize,
}

/// Intermediate values of a forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace<T: Real> {
    pub batch: usize,
    /// Spatial size entering each block.
    pub block_inputs: Vec<(usize, usize)>,
    /// Spatial size of each block's conv output.
    pub block_outputs: Vec<(usize, usize)>,
    cols: Vec<Vec<T>>,
    /// Post-ReLU, pre-pool maps of each block.
    pub activations: Vec<Vec<T>>,
    pool_index: Vec<Vec<u32>>,
    pub features: Vec<T>,
    pub logits: Vec<T>,
}

/// Parameter gradients in the order of [`CnnModel::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T: Real> {
    pub conv_weight: Vec<Vec<T>>,
    pub conv_bias: Vec<Vec<T>>,
    pub fc_weight: Vec<T>,
    pub fc_bias: Vec<T>,
}

impl<T: Real> Gradients<T> {
    pub fn slices(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for (w, b) in self.conv_weight.iter().zip(&self.conv_bias) {
            out.push(w.as_slice());
            out.push(b.as_slice());
        }
        out.push(&self.fc_weight);
        out.push(&self.fc_bias);
        out
    }
}

pub struct Backward<T: Real> {
    pub grads: Gradients<T>,
    /// Gradient of the loss with respect to each block's post-ReLU, pre-pool maps.
    pub activation_grads: Vec<Vec<T>>,
}

impl<T: Real> CnnModel<T> {
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = rng_from_seed(seed);
        let mut convs = Vec::with_capacity(arch.channels.len());
        let mut in_c = arch.in_channels;
        for &c in &arch.channels {
            convs.push(Conv2d::new(in_c, c, arch.kernel, arch.stride, &mut rng).with_padding_mode(arch.padding));
            in_c = c;
        }
        let fc = Linear::new(in_c, arch.num_classes, &mut rng);
        Ok(Self { arch, convs, fc, trained_epochs: 0 })
    }

    pub fn num_classes(&self) -> usize {
        self.fc.out_features
    }

    pub fn zero_fc(&mut self) {
        self.fc.weight.iter_mut().for_each(|v| *v = T::zero());
        self.fc.bias.iter_mut().for_each(|v| *v = T::zero());
    }

    /// Same parameters in another precision.
    pub fn convert<U: Real>(&self) -> CnnModel<U> {
        let cast = |v: &[T]| v.iter().map(|x| U::of(x.as_f64())).collect::<Vec<U>>();
        CnnModel {
            arch: self.arch.clone(),
            convs: self
                .convs
                .iter()
                .map(|c| Conv2d {
                    in_channels: c.in_channels,
                    out_channels: c.out_channels,
                    kernel: c.kernel,
                    stride: c.stride,
                    padding: c.padding,
                    padding_mode: c.padding_mode,
                    weight: cast(&c.weight),
                    bias: cast(&c.bias),
                })
                .collect(),
            fc: Linear { in_features: self.fc.in_features, out_features: self.fc.out_features, weight: cast(&self.fc.weight), bias: cast(&self.fc.bias) },
            trained_epochs: self.trained_epochs,
        }
    }

    pub fn parameters(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        for c in &self.convs {
            out.push(&c.weight);
            out.push(&c.bias);
        }
        out.push(&self.fc.weight);
        out.push(&self.fc.bias);
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.weight);
            out.push(&mut c.bias);
        }
        out.push(&mut self.fc.weight);
        out.push(&mut self.fc.bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    /// Checks an `(N, C, H, W)` batch against the pooling stack and returns
    /// the per-block spatial sizes.
    fn plan(&self, shape: &[usize]) -> Result<(usize, Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        let mismatch = |why: &str| Error::ShapeMismatch {
            expected: format!("(N, {}, H, W) with {why}", self.arch.in_channels),
            actual: format!("{shape:?}"),
        };
        if shape.len() != 4 || shape[1] != self.arch.in_channels || shape[0] == 0 {
            return Err(mismatch("N ≥ 1"));
        }
        let (mut h, mut w) = (shape[2], shape[3]);
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for conv in &self.convs {
            ins.push((h, w));
            let (oh, ow) = conv.output_size(h, w).ok_or_else(|| mismatch("room for every kernel"))?;
            if oh % self.arch.pool != 0 || ow % self.arch.pool != 0 || oh == 0 || ow == 0 {
                return Err(mismatch("H, W divisible by every pooling stage"));
            }
            outs.push((oh, ow));
            h = oh / self.arch.pool;
            w = ow / self.arch.pool;
        }
        Ok((shape[0], ins, outs))
    }

    pub fn forward_trace(&self, batch: &Tensor<T>) -> Result<Trace<T>> {
        let (n, ins, outs) = self.plan(batch.shape())?;
        let mut x: Vec<T> = batch.data().to_vec();
        let mut cols = Vec::with_capacity(self.convs.len());
        let mut activations = Vec::with_capacity(self.convs.len());
        let mut pool_index = Vec::with_capacity(self.convs.len());
        for (i, conv) in self.convs.iter().enumerate() {
            let (h, w) = ins[i];
            let (oh, ow) = outs[i];
            let (mut a, c) = conv.forward(&x, n, h, w);
            layers::relu_in_place(&mut a);
            let (pooled, idx) = layers::max_pool(&a, n * conv.out_channels, oh, ow, self.arch.pool);
            cols.push(c);
            activations.push(a);
            pool_index.push(idx);
            x = pooled;
        }
        let (lh, lw) = *outs.last().expect("at least one block");
        let area = (lh / self.arch.pool) * (lw / self.arch.pool);
        let features = layers::global_avg_pool(&x, area);
        let logits = self.fc.forward(&features, n);
        Ok(Trace { batch: n, block_inputs: ins, block_outputs: outs, cols, activations, pool_index, features, logits })
    }

    /// Logits `(N, classes)`.
    pub fn forward(&self, batch: &Tensor<T>) -> Result<Tensor<T>> {
        let trace = self.forward_trace(batch)?;
        Tensor::from_vec(vec![trace.batch, self.num_classes()], trace.logits)
    }

    /// Backpropagates `grad_logits` through the trace.
    pub fn backward(&self, trace: &Trace<T>, grad_logits: &[T]) -> Backward<T> {
        let n = trace.batch;
        let mut fc_weight = vec![T::zero(); self.fc.weight.len()];
        let mut fc_bias = vec![T::zero(); self.fc.bias.len()];
        let grad_features = self.fc.backward(&trace.features, grad_logits, n, &mut fc_weight, &mut fc_bias);
        let (lh, lw) = *trace.block_outputs.last().expect("at least one block");
        let area = (lh / self.arch.pool) * (lw / self.arch.pool);
        let mut grad = layers::global_avg_pool_backward(&grad_features, area);
        let blocks = self.convs.len();
        let mut conv_weight: Vec<Vec<T>> = self.convs.iter().map(|c| vec![T::zero(); c.weight.len()]).collect();
        let mut conv_bias: Vec<Vec<T>> = self.convs.iter().map(|c| vec![T::zero(); c.bias.len()]).collect();
        let mut activation_grads = vec![Vec::new(); blocks];
        for i in (0..blocks).rev() {
            let conv = &self.convs[i];
            let mut g = layers::max_pool_backward(&grad, &trace.pool_index[i], trace.activations[i].len());
            activation_grads[i] = g.clone();
            layers::relu_backward(&trace.activations[i], &mut g);
            let (h, w) = trace.block_inputs[i];
            let input_grad = conv.backward(&trace.cols[i], &g, n, h, w, &mut conv_weight[i], &mut conv_bias[i], i > 0);
            if let Some(ig) = input_grad {
                grad = ig;
            }
        }
        Backward { grads: Gradients { conv_weight, conv_bias, fc_weight, fc_bias }, activation_grads }
    }

    /// Mean cross-entropy over the batch and its parameter gradients.
    pub fn loss_and_grads(&self, batch: &Tensor<T>, labels: &[usize]) -> Result<(T, Gradients<T>)> {
        let classes = self.num_classes();
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidLabel { label: bad, classes });
        }
        let trace = self.forward_trace(batch)?;
        if labels.len() != trace.batch {
            return Err(Error::LengthMismatch { left: labels.len(), right: trace.batch });
        }
        let (loss, grad_logits) = layers::softmax_cross_entropy(&trace.logits, labels, classes);
        Ok((loss, self.backward(&trace, &grad_logits).grads))
    }

    /// Plain SGD: `θ ← θ − lr·∇θ`.
    pub fn sgd_step(&mut self, grads: &Gradients<T>, lr: T) {
        let g = grads.slices();
        for (p, g) in self.parameters_mut().into_iter().zip(g) {
            for (v, &d) in p.iter_mut().zip(g) {
                *v -= lr * d;
            }
        }
    }
}
