//! Gradient-weighted class activation maps.
//!
//! The target layer is the last conv block's post-ReLU output, before
//! pooling. Channel weights are the spatial mean of the target logit's
//! gradient; the weighted sum is rectified, bilinearly resized to the input
//! and scaled so that its maximum is 1 (an all-zero map stays zero).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;
use crate::nn::{CnnModel, Tensor};
use crate::raster::RasterImage;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    /// Row-major, each in `[0, 1]`.
    pub values: Vec<f32>,
}

impl Heatmap {
    pub fn value(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f32 {
        self.values.iter().cloned().fold(0.0, f32::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    /// Mirror left ↔ right.
    pub fn flipped_x(&self) -> Heatmap {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks_exact(self.width) {
            values.extend(row.iter().rev());
        }
        Heatmap { width: self.width, height: self.height, values }
    }

    /// Shannon entropy (nats) of the map read as a distribution; `None` for
    /// an all-zero map.
    pub fn entropy(&self) -> Option<f64> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        Some(-self.values.iter().filter(|&&v| v > 0.0).map(|&v| v as f64 / total).map(|p| p * p.ln()).sum::<f64>())
    }

    /// Mean value of pixels whose centres fall inside `bbox` (unit-square
    /// coordinates) and mean value of the rest.
    pub fn density_inside_outside(&self, bbox: &BBox) -> (f64, f64) {
        let (mut si, mut ni, mut so, mut no) = (0.0, 0usize, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = crate::geometry::Point::new((x as f64 + 0.5) / self.width as f64, (y as f64 + 0.5) / self.height as f64);
                let v = self.value(x, y) as f64;
                if bbox.contains(p) {
                    si += v;
                    ni += 1;
                } else {
                    so += v;
                    no += 1;
                }
            }
        }
        let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
        (mean(si, ni), mean(so, no))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCam {
    pub heatmap: Heatmap,
    pub target_class: usize,
    pub logits: Vec<f32>,
    /// Set when the model has never been trained; the map is then noise.
    pub untrained: bool,
}

/// Bilinear resize with pixel-centre alignment and edge clamping.
fn upsample(src: &[f32], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f32> {
    let coord = |d: usize, dn: usize, sn: usize| {
        let s = ((d as f64 + 0.5) * sn as f64 / dn as f64 - 0.5).clamp(0.0, (sn - 1) as f64);
        let i = (s.floor() as usize).min(sn - 1);
        let j = (i + 1).min(sn - 1);
        (i, j, (s - i as f64) as f32)
    };
    let mut out = Vec::with_capacity(dw * dh);
    for y in 0..dh {
        let (y0, y1, fy) = coord(y, dh, sh);
        for x in 0..dw {
            let (x0, x1, fx) = coord(x, dw, sw);
            let top = src[y0 * sw + x0] * (1.0 - fx) + src[y0 * sw + x1] * fx;
            let bottom = src[y1 * sw + x0] * (1.0 - fx) + src[y1 * sw + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Heatmap for `target_class` on one normalized `(3, H, W)` input.
pub fn gradcam(model: &CnnModel<f32>, input: &Tensor<f32>, target_class: usize) -> Result<GradCam> {
    gradcam_at_block(model, input, target_class, model.arch.channels.len() - 1)
}

/// As [`gradcam`], but reading activations from conv block `block` (0-based).
pub fn gradcam_at_block(model: &CnnModel<f32>, input: &Tensor<f32>, target_class: usize, block: usize) -> Result<GradCam> {
    let blocks = model.arch.channels.len();
    if block >= blocks {
        return Err(Error::InvalidArgument(format!("block {block} out of range for {blocks} blocks")));
    }
    let classes = model.num_classes();
    if target_class >= classes {
        return Err(Error::InvalidLabel { label: target_class, classes });
    }
    let shape = input.shape();
    if shape.len() != 3 {
        return Err(Error::ShapeMismatch { expected: "(3, H, W)".into(), actual: format!("{shape:?}") });
    }
    let (h, w) = (shape[1], shape[2]);
    let mut batched = vec![1];
    batched.extend_from_slice(shape);
    let batch = Tensor::from_vec(batched, input.data().to_vec())?;
    let trace = model.forward_trace(&batch)?;
    let mut grad_logits = vec![0.0f32; classes];
    grad_logits[target_class] = 1.0;
    let back = model.backward(&trace, &grad_logits);

    let (fh, fw) = trace.block_outputs[block];
    let area = fh * fw;
    let maps = &trace.activations[block];
    let grads = &back.activation_grads[block];
    let mut cam = vec![0.0f32; area];
    for (fmap, gmap) in maps.chunks_exact(area).zip(grads.chunks_exact(area)) {
        let weight = gmap.iter().sum::<f32>() / area as f32;
        if weight == 0.0 {
            continue;
        }
        for (c, &a) in cam.iter_mut().zip(fmap) {
            *c += weight * a;
        }
    }
    cam.iter_mut().for_each(|v| *v = v.max(0.0));
    let mut values = upsample(&cam, fw, fh, w, h);
    let max = values.iter().cloned().fold(0.0f32, f32::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v = (*v / max).min(1.0));
    }
    Ok(GradCam { heatmap: Heatmap { width: w, height: h, values }, target_class, logits: trace.logits, untrained: model.trained_epochs == 0 })
}

/// Anchors of the overlay colour scale, evenly spaced over `[0, 1]`: a
/// piecewise-linear rendition of the perceptually uniform "inferno" map,
/// black through purple and orange to pale yellow.
pub const COLORMAP: [[u8; 3]; 9] = [
    [0, 0, 4],
    [31, 12, 72],
    [85, 15, 109],
    [136, 34, 106],
    [186, 54, 85],
    [227, 89, 51],
    [249, 140, 10],
    [249, 201, 50],
    [252, 255, 164],
];

pub fn colormap(v: f32) -> [u8; 3] {
    let t = v.clamp(0.0, 1.0) as f64 * (COLORMAP.len() - 1) as f64;
    let i = (t.floor() as usize).min(COLORMAP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (COLORMAP[i], COLORMAP[i + 1]);
    [0, 1, 2].map(|c| (a[c] as f64 + (b[c] as f64 - a[c] as f64) * f).round() as u8)
}

/// Blends the colour-mapped heatmap over `image`: `(1−α)·image + α·map`.
pub fn overlay(image: &RasterImage, heatmap: &Heatmap, alpha: f64) -> Result<RasterImage> {
    if image.width != heatmap.width || image.height != heatmap.height {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs heatmap {}x{}",
            image.width, image.height, heatmap.width, heatmap.height
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let mut pixels = Vec::with_capacity(image.pixels.len());
    for (px, &v) in image.pixels.chunks_exact(3).zip(&heatmap.values) {
        let m = colormap(v);
        for c in 0..3 {
            pixels.push(((1.0 - alpha) * px[c] as f64 + alpha * m[c] as f64).round() as u8);
        }
    }
    RasterImage::from_pixels(image.width, image.height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsampling_a_constant_is_constant() {
        let out = upsample(&[0.5; 4], 2, 2, 7, 5);
        assert!(out.iter().all(|&v| (v - 0.5).abs() < 1e-7));
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), COLORMAP[0]);
        assert_eq!(colormap(1.0), COLORMAP[8]);
        assert_eq!(colormap(0.5), COLORMAP[4]);
    }

    #[test]
    fn entropy_of_uniform_map() {
        let h = Heatmap { width: 4, height: 2, values: vec![1.0; 8] };
        assert!((h.entropy().unwrap() - 8f64.ln()).abs() < 1e-12);
        assert_eq!(Heatmap { width: 1, height: 1, values: vec![0.0] }.entropy(), None);
    }
}
