//! Training-time augmentation: flips, quarter turns, CIELAB brightness
//! operations and ImageNet normalization.
//!
//! There is deliberately no jitter, crop or warp operation.

use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::nn::Tensor;
use crate::raster::RasterImage;
use crate::rng::rng_from_seed;

pub const IMAGENET_MEAN: [f32; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STD: [f32; 3] = [0.229, 0.224, 0.225];

/// linear sRGB → XYZ (D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

/// Reference white, taken as the image of sRGB white so that white maps to
/// a = b = 0 exactly.
fn white() -> [f64; 3] {
    [0, 1, 2].map(|r| RGB_TO_XYZ[r].iter().sum())
}

/// Per-pixel `[L, a, b]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

fn decode(c: u8) -> f64 {
    let v = c as f64 / 255.0;
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn encode(v: f64) -> u8 {
    let v = v.clamp(0.0, 1.0);
    let s = if v <= 0.003_130_8 { v * 12.92 } else { 1.055 * v.powf(1.0 / 2.4) - 0.055 };
    (s * 255.0).round().clamp(0.0, 255.0) as u8
}

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

pub fn pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let xyz = mul(&RGB_TO_XYZ, rgb.map(decode));
    let wp = white();
    let f = |t: f64| if t > EPSILON { libm::cbrt(t) } else { (KAPPA * t + 16.0) / 116.0 };
    let [fx, fy, fz] = [f(xyz[0] / wp[0]), f(xyz[1] / wp[1]), f(xyz[2] / wp[2])];
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn lab_to_pixel(lab: [f64; 3]) -> [u8; 3] {
    let [l, a, b] = lab;
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let inv = |f: f64| {
        let c = f * f * f;
        if c > EPSILON {
            c
        } else {
            (116.0 * f - 16.0) / KAPPA
        }
    };
    let y = if l > KAPPA * EPSILON { fy * fy * fy } else { l / KAPPA };
    let wp = white();
    let xyz = [inv(fx) * wp[0], y * wp[1], inv(fz) * wp[2]];
    mul(&XYZ_TO_RGB, xyz).map(encode)
}

pub fn rgb_to_lab(image: &RasterImage) -> LabImage {
    let pixels = image.pixels.chunks_exact(3).map(|p| pixel_to_lab([p[0], p[1], p[2]])).collect();
    LabImage { width: image.width, height: image.height, pixels }
}

pub fn lab_to_rgb(image: &LabImage) -> RasterImage {
    let pixels = image.pixels.iter().flat_map(|&p| lab_to_pixel(p)).collect();
    RasterImage { width: image.width, height: image.height, pixels }
}

/// `L ← clamp(L + delta, 0, 100)`; a and b untouched.
pub fn global_brightness_tweak(image: &LabImage, delta: f64) -> LabImage {
    let mut out = image.clone();
    for p in &mut out.pixels {
        p[0] = (p[0] + delta).clamp(0.0, 100.0);
    }
    out
}

/// Adds `strength·(t − 0.5)` to L, where `t ∈ [0, 1]` is the pixel centre's
/// normalized projection onto the direction `(cos θ, sin θ)` (image
/// coordinates, y down). a and b untouched.
pub fn brightness_gradient(image: &LabImage, axis_angle: f64, strength: f64) -> LabImage {
    let (sin, cos) = axis_angle.sin_cos();
    let proj = |x: f64, y: f64| x * cos + y * sin;
    let (w, h) = (image.width as f64, image.height as f64);
    let corners = [proj(0.5, 0.5), proj(w - 0.5, 0.5), proj(0.5, h - 0.5), proj(w - 0.5, h - 0.5)];
    let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = image.clone();
    for y in 0..image.height {
        for x in 0..image.width {
            let t = if span > 1e-12 { (proj(x as f64 + 0.5, y as f64 + 0.5) - lo) / span } else { 0.5 };
            let p = &mut out.pixels[y * image.width + x];
            p[0] = (p[0] + strength * (t - 0.5)).clamp(0.0, 100.0);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipAxis {
    /// Mirror left ↔ right.
    X,
    /// Mirror top ↔ bottom.
    Y,
}

/// Quarter turns, clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R270,
}

fn permute(image: &RasterImage, width: usize, height: usize, source: impl Fn(usize, usize) -> (usize, usize)) -> RasterImage {
    let mut pixels = Vec::with_capacity(image.pixels.len());
    for y in 0..height {
        for x in 0..width {
            let (sx, sy) = source(x, y);
            let i = (sy * image.width + sx) * 3;
            pixels.extend_from_slice(&image.pixels[i..i + 3]);
        }
    }
    RasterImage { width, height, pixels }
}

pub fn flip(image: &RasterImage, axis: FlipAxis) -> RasterImage {
    let (w, h) = (image.width, image.height);
    match axis {
        FlipAxis::X => permute(image, w, h, |x, y| (w - 1 - x, y)),
        FlipAxis::Y => permute(image, w, h, |x, y| (x, h - 1 - y)),
    }
}

pub fn rotate(image: &RasterImage, rotation: Rotation) -> RasterImage {
    let (w, h) = (image.width, image.height);
    match rotation {
        Rotation::R0 => image.clone(),
        Rotation::R90 => permute(image, h, w, |x, y| (y, h - 1 - x)),
        Rotation::R270 => permute(image, h, w, |x, y| (w - 1 - y, x)),
    }
}

/// Writes `(3, H, W)` ImageNet-normalized values into `out`.
pub fn normalize_into(image: &RasterImage, out: &mut [f32]) {
    let area = image.width * image.height;
    assert_eq!(out.len(), 3 * area, "normalize_into: output length");
    for (i, p) in image.pixels.chunks_exact(3).enumerate() {
        for c in 0..3 {
            out[c * area + i] = (p[c] as f32 / 255.0 - IMAGENET_MEAN[c]) / IMAGENET_STD[c];
        }
    }
}

pub fn normalize(image: &RasterImage) -> Tensor<f32> {
    let mut data = alloc::vec![0.0; 3 * image.width * image.height];
    normalize_into(image, &mut data);
    Tensor::from_vec(alloc::vec![3, image.height, image.width], data).expect("length matches shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightnessGradient {
    pub axis_angle: f64,
    pub strength: f64,
}

/// One concrete augmentation. Flips and rotation are applied first, then
/// the LAB brightness operations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub flip_x: bool,
    pub flip_y: bool,
    pub rotate: Rotation,
    pub gbt_delta: f64,
    pub bg: Option<BrightnessGradient>,
    /// Seed the plan was sampled from.
    pub seed: u64,
}

impl AugmentationPlan {
    pub fn is_photometric(&self) -> bool {
        self.gbt_delta != 0.0 || self.bg.is_some()
    }
}

pub fn apply_plan(image: &RasterImage, plan: &AugmentationPlan) -> RasterImage {
    let mut out = image.clone();
    if plan.flip_x {
        out = flip(&out, FlipAxis::X);
    }
    if plan.flip_y {
        out = flip(&out, FlipAxis::Y);
    }
    out = rotate(&out, plan.rotate);
    if !plan.is_photometric() {
        return out;
    }
    let mut lab = rgb_to_lab(&out);
    if plan.gbt_delta != 0.0 {
        lab = global_brightness_tweak(&lab, plan.gbt_delta);
    }
    if let Some(bg) = plan.bg {
        lab = brightness_gradient(&lab, bg.axis_angle, bg.strength);
    }
    lab_to_rgb(&lab)
}

/// Random plan distribution. Every operation is drawn independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSampler {
    pub flip_probability: f64,
    pub rotate_probability: f64,
    pub gbt_probability: f64,
    pub gbt_limit: f64,
    pub bg_probability: f64,
    pub bg_limit: f64,
}

impl Default for PlanSampler {
    fn default() -> Self {
        Self { flip_probability: 0.5, rotate_probability: 0.5, gbt_probability: 0.5, gbt_limit: 20.0, bg_probability: 0.5, bg_limit: 30.0 }
    }
}

impl PlanSampler {
    /// Geometric operations only.
    pub fn geometric() -> Self {
        Self { gbt_probability: 0.0, bg_probability: 0.0, ..Self::default() }
    }

    pub fn sample(&self, seed: u64) -> AugmentationPlan {
        let mut rng = rng_from_seed(seed);
        let mut coin = |p: f64| rng.random::<f64>() < p;
        let flip_x = coin(self.flip_probability);
        let flip_y = coin(self.flip_probability);
        let turn = coin(self.rotate_probability);
        let gbt = coin(self.gbt_probability);
        let bg = coin(self.bg_probability);
        let rotate = match (turn, rng.random_bool(0.5)) {
            (false, _) => Rotation::R0,
            (true, true) => Rotation::R90,
            (true, false) => Rotation::R270,
        };
        let gbt_delta = if gbt && self.gbt_limit > 0.0 { rng.random_range(-self.gbt_limit..=self.gbt_limit) } else { 0.0 };
        let bg = (bg && self.bg_limit > 0.0).then(|| BrightnessGradient {
            axis_angle: rng.random_range(0.0..core::f64::consts::TAU),
            strength: rng.random_range(-self.bg_limit..=self.bg_limit),
        });
        AugmentationPlan { flip_x, flip_y, rotate, gbt_delta, bg, seed }
    }

    /// True when the plan's magnitudes respect this sampler's limits.
    pub fn admits(&self, plan: &AugmentationPlan) -> bool {
        plan.gbt_delta.abs() <= self.gbt_limit && plan.bg.is_none_or(|b| b.strength.abs() <= self.bg_limit)
    }
}
