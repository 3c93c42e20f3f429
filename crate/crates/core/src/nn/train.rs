use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::layers;
use super::model::CnnModel;
use super::tensor::Tensor;
use crate::augment::{apply_plan, normalize_into, PlanSampler};
use crate::dataset::split_indices;
use crate::raster::RasterImage;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

const SHUFFLE_STREAM: u64 = 0x5bd1_e995;
const AUGMENT_STREAM: u64 = 0xa076_1d64;
const SPLIT_STREAM: u64 = 0xe703_7ed1;
const EVAL_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr0: f64,
    pub decay_gamma: f64,
    /// Epochs between learning-rate decays.
    pub decay_period: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub val_fraction: f64,
    pub num_classes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr0: 0.0256, decay_gamma: 0.97, decay_period: 2.4, epochs: 15, batch: 16, seed: 0, val_fraction: 0.1, num_classes: 9 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("train config: {m}")));
        if !(self.lr0 > 0.0) {
            return bad("lr0 must be positive");
        }
        if !(self.decay_gamma > 0.0 && self.decay_gamma <= 1.0) {
            return bad("decay_gamma must be in (0, 1]");
        }
        if !(self.decay_period > 0.0) {
            return bad("decay_period must be positive");
        }
        if self.epochs == 0 || self.batch == 0 {
            return bad("epochs and batch must be at least 1");
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad("val_fraction must be in [0, 1)");
        }
        if self.num_classes < 2 {
            return bad("need at least 2 classes");
        }
        Ok(())
    }
}

/// Step-decayed learning rate, `lr0·γ^⌊epoch/period⌋`.
pub fn lr_at(config: &TrainConfig, epoch: f64) -> f64 {
    config.lr0 * config.decay_gamma.powi((epoch / config.decay_period).floor() as i32)
}

/// A labeled training image.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: RasterImage,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Learning rate at the start of the epoch.
    pub lr: f64,
    pub train_loss: f64,
    pub train_top1: f64,
    pub val_top1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub config: TrainConfig,
    pub train_count: usize,
    pub val_count: usize,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (best validation top-1, earliest on
    /// ties; the last epoch without a validation set).
    pub best_epoch: usize,
    pub best_val_top1: Option<f64>,
}

fn stack(samples: &[&RasterImage]) -> Result<Tensor<f32>> {
    let first = samples.first().ok_or_else(|| Error::InvalidArgument("empty batch".into()))?;
    let (w, h) = (first.width, first.height);
    let plane = 3 * w * h;
    let mut data = vec![0.0f32; samples.len() * plane];
    for (i, img) in samples.iter().enumerate() {
        if img.width != w || img.height != h {
            return Err(Error::ShapeMismatch { expected: format!("{w}x{h} image"), actual: format!("{}x{}", img.width, img.height) });
        }
        normalize_into(img, &mut data[i * plane..(i + 1) * plane]);
    }
    Tensor::from_vec(vec![samples.len(), 3, h, w], data)
}

/// Class probabilities for every image, in input order.
pub fn predict_probabilities(model: &CnnModel<f32>, images: &[&RasterImage]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(images.len());
    for chunk in images.chunks(EVAL_BATCH) {
        let logits = model.forward(&stack(chunk)?)?;
        for i in 0..chunk.len() {
            let row: Vec<f64> = logits.row(i).iter().map(|&v| v as f64).collect();
            out.push(layers::softmax(&row));
        }
    }
    Ok(out)
}

/// The `k` most probable classes, descending, ties broken by class index.
pub fn top_k(probabilities: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = probabilities.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

pub fn predict_topk(model: &CnnModel<f32>, image: &RasterImage, k: usize) -> Result<Vec<(usize, f64)>> {
    if k == 0 || k > model.num_classes() {
        return Err(Error::InvalidArgument(format!("k must be in 1..={}, got {k}", model.num_classes())));
    }
    let p = predict_probabilities(model, &[image])?;
    Ok(top_k(&p[0], k))
}

fn top1(model: &CnnModel<f32>, samples: &[Sample], idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let images: Vec<&RasterImage> = idx.iter().map(|&i| &samples[i].image).collect();
    let probs = predict_probabilities(model, &images)?;
    let hits = probs.iter().zip(idx).filter(|(p, &i)| top_k(p, 1)[0].0 == samples[i].label).count();
    Ok(hits as f64 / idx.len() as f64)
}

/// Mini-batch SGD with a stratified validation hold-out. The model ends up
/// holding the parameters of the best validation epoch.
///
/// Deterministic in `config.seed`: the split, the per-epoch shuffle and
/// every augmentation plan derive from it.
pub fn train(model: &mut CnnModel<f32>, samples: &[Sample], config: &TrainConfig, sampler: Option<&PlanSampler>) -> Result<TrainingReport> {
    config.validate()?;
    if model.num_classes() != config.num_classes {
        return Err(Error::InvalidArgument(format!("model has {} outputs, config {} classes", model.num_classes(), config.num_classes)));
    }
    if samples.is_empty() {
        return Err(Error::EmptyManifest);
    }
    if let Some(s) = samples.iter().find(|s| s.label >= config.num_classes) {
        return Err(Error::InvalidLabel { label: s.label, classes: config.num_classes });
    }
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let (train_idx, val_idx) = if config.val_fraction > 0.0 {
        split_indices(&labels, 1.0 - config.val_fraction, derive_seed(config.seed, SPLIT_STREAM))?
    } else {
        ((0..samples.len()).collect(), Vec::new())
    };

    // Without augmentation the normalized inputs never change.
    let plane = {
        let img = &samples[0].image;
        3 * img.width * img.height
    };
    let cached: Option<Vec<f32>> = match sampler {
        Some(_) => None,
        None => {
            let mut all = vec![0.0f32; samples.len() * plane];
            for (i, s) in samples.iter().enumerate() {
                if s.image.pixels.len() != samples[0].image.pixels.len() || s.image.width != samples[0].image.width {
                    return Err(Error::ShapeMismatch { expected: "equally sized images".into(), actual: format!("sample {i}") });
                }
                normalize_into(&s.image, &mut all[i * plane..(i + 1) * plane]);
            }
            Some(all)
        }
    };

    let steps_per_epoch = train_idx.len().div_ceil(config.batch);
    let mut records = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, CnnModel<f32>)> = None;
    let mut order = train_idx.clone();
    for epoch in 0..config.epochs {
        order.copy_from_slice(&train_idx);
        order.shuffle(&mut rng_from_seed(derive_seed(derive_seed(config.seed, SHUFFLE_STREAM), epoch as u64)));
        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for (step, chunk) in order.chunks(config.batch).enumerate() {
            let mut data = vec![0.0f32; chunk.len() * plane];
            for (j, &i) in chunk.iter().enumerate() {
                let dst = &mut data[j * plane..(j + 1) * plane];
                match (&cached, sampler) {
                    (Some(all), _) => dst.copy_from_slice(&all[i * plane..(i + 1) * plane]),
                    (None, Some(s)) => {
                        let seed = derive_seed(derive_seed(config.seed, AUGMENT_STREAM), (epoch * samples.len() + i) as u64);
                        let img = apply_plan(&samples[i].image, &s.sample(seed));
                        if img.pixels.len() != plane {
                            return Err(Error::ShapeMismatch { expected: "equally sized square images".into(), actual: format!("sample {i}") });
                        }
                        normalize_into(&img, dst);
                    }
                    (None, None) => unreachable!(),
                }
            }
            let (h, w) = (samples[0].image.height, samples[0].image.width);
            let batch = Tensor::from_vec(vec![chunk.len(), 3, h, w], data)?;
            let batch_labels: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let trace = model.forward_trace(&batch)?;
            let classes = config.num_classes;
            for (j, &l) in batch_labels.iter().enumerate() {
                let row = &trace.logits[j * classes..(j + 1) * classes];
                let arg = (0..classes).fold(0, |b, c| if row[c] > row[b] { c } else { b });
                hits += (arg == l) as usize;
            }
            let (loss, grad_logits) = layers::softmax_cross_entropy(&trace.logits, &batch_labels, classes);
            if !loss.is_finite() {
                return Err(Error::InvalidArgument(format!("loss diverged at epoch {epoch}, step {step}")));
            }
            loss_sum += loss as f64 * chunk.len() as f64;
            let grads = model.backward(&trace, &grad_logits).grads;
            let lr = lr_at(config, epoch as f64 + step as f64 / steps_per_epoch as f64);
            model.sgd_step(&grads, lr as f32);
        }
        model.trained_epochs += 1;
        let val_top1 = if val_idx.is_empty() { None } else { Some(top1(model, samples, &val_idx)?) };
        records.push(EpochRecord {
            epoch,
            lr: lr_at(config, epoch as f64),
            train_loss: loss_sum / train_idx.len() as f64,
            train_top1: hits as f64 / train_idx.len() as f64,
            val_top1,
        });
        let score = val_top1.unwrap_or(f64::INFINITY);
        if best.as_ref().is_none_or(|(b, _, _)| score > *b || val_top1.is_none()) {
            best = Some((score, epoch, model.clone()));
        }
    }
    let (_, best_epoch, best_model) = best.expect("at least one epoch");
    *model = best_model;
    Ok(TrainingReport {
        config: config.clone(),
        train_count: train_idx.len(),
        val_count: val_idx.len(),
        best_val_top1: records[best_epoch].val_top1,
        epochs: records,
        best_epoch,
    })
}
