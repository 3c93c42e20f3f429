//! Texture registry for textured (SDV2-style) compositions.
//!
//! A texture yields a modulation value `m ∈ [0, 1]` at a texture coordinate;
//! the rasterizer multiplies the fill tint by `floor + (1 - floor) * m`, with
//! floor [`MIN_GAIN`] for elements and [`BACKGROUND_MIN_GAIN`] for the
//! ground, so the tint's hue survives texturing and colour rules stay
//! checkable.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::color::Rgb8;
use crate::geometry::Point;
use crate::raster::RasterImage;
use crate::rng::mix64;

pub const MIN_GAIN: f64 = 0.7;
/// Backgrounds are modulated more gently so they stay a ground.
pub const BACKGROUND_MIN_GAIN: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Texture {
    /// Fractal value noise.
    Noise { seed: u64, frequency: f64, octaves: u32 },
    Stripes { frequency: f64, angle: f64 },
    Checkers { frequency: f64 },
    Dots { frequency: f64, radius: f64 },
    Rings { frequency: f64 },
    /// A user supplied photograph, tiled; its luma is the modulation.
    Image { image: RasterImage },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TextureRegistry {
    textures: Vec<Texture>,
}

impl TextureRegistry {
    pub fn new(textures: Vec<Texture>) -> Self {
        Self { textures }
    }

    /// Built-in procedural set; needs no external assets.
    pub fn procedural() -> Self {
        Self::new(alloc::vec![
            Texture::Noise { seed: 11, frequency: 3.0, octaves: 3 },
            Texture::Noise { seed: 29, frequency: 7.0, octaves: 2 },
            Texture::Stripes { frequency: 4.0, angle: 0.0 },
            Texture::Stripes { frequency: 7.0, angle: 0.785 },
            Texture::Checkers { frequency: 3.0 },
            Texture::Dots { frequency: 5.0, radius: 0.3 },
            Texture::Rings { frequency: 4.0 },
            Texture::Noise { seed: 53, frequency: 12.0, octaves: 1 },
        ])
    }

    pub fn push(&mut self, texture: Texture) -> u32 {
        self.textures.push(texture);
        (self.textures.len() - 1) as u32
    }

    pub fn len(&self) -> usize {
        self.textures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.textures.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Texture> {
        self.textures.get(id as usize)
    }

    /// Tinted element colour at a texture coordinate. Unknown ids fall back
    /// to the tint.
    pub fn shade(&self, id: u32, tint: Rgb8, uv: Point) -> Rgb8 {
        self.shade_with_floor(id, tint, uv, MIN_GAIN)
    }

    pub fn shade_background(&self, id: u32, tint: Rgb8, uv: Point) -> Rgb8 {
        self.shade_with_floor(id, tint, uv, BACKGROUND_MIN_GAIN)
    }

    fn shade_with_floor(&self, id: u32, tint: Rgb8, uv: Point, floor: f64) -> Rgb8 {
        let m = self.get(id).map_or(1.0, |t| t.sample(uv));
        let gain = floor + (1.0 - floor) * m;
        let f = |c: u8| (c as f64 * gain).round().clamp(0.0, 255.0) as u8;
        Rgb8::new(f(tint.r), f(tint.g), f(tint.b))
    }
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn lattice(seed: u64, x: i64, y: i64) -> f64 {
    let h = mix64(seed ^ mix64((x as u64).wrapping_mul(0x9e37_79b9) ^ (y as u64).wrapping_mul(0x85eb_ca6b) << 1));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn value_noise(seed: u64, p: Point) -> f64 {
    let x0 = p.x.floor();
    let y0 = p.y.floor();
    let (ix, iy) = (x0 as i64, y0 as i64);
    let (tx, ty) = (smooth(p.x - x0), smooth(p.y - y0));
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

impl Texture {
    pub fn sample(&self, uv: Point) -> f64 {
        match self {
            Texture::Noise { seed, frequency, octaves } => {
                let mut total = 0.0;
                let mut norm = 0.0;
                let mut amp = 1.0;
                let mut f = *frequency;
                for o in 0..(*octaves).max(1) {
                    total += amp * value_noise(seed.wrapping_add(o as u64), uv * f);
                    norm += amp;
                    amp *= 0.5;
                    f *= 2.0;
                }
                total / norm
            }
            Texture::Stripes { frequency, angle } => {
                let t = uv.dot(Point::from_angle(*angle)) * frequency;
                0.5 + 0.5 * (TAU * t).sin()
            }
            Texture::Checkers { frequency } => {
                let cx = (uv.x * frequency).floor() as i64;
                let cy = (uv.y * frequency).floor() as i64;
                if (cx + cy).rem_euclid(2) == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Texture::Dots { frequency, radius } => {
                let fx = (uv.x * frequency).rem_euclid(1.0) - 0.5;
                let fy = (uv.y * frequency).rem_euclid(1.0) - 0.5;
                if (fx * fx + fy * fy).sqrt() < *radius {
                    0.0
                } else {
                    1.0
                }
            }
            Texture::Rings { frequency } => 0.5 + 0.5 * (TAU * uv.norm() * frequency).cos(),
            Texture::Image { image } => {
                if image.width == 0 || image.height == 0 {
                    return 1.0;
                }
                // uv in [-1, 1] spans the photo once; outside it tiles.
                let u = ((uv.x * 0.5 + 0.5).rem_euclid(1.0) * image.width as f64) as usize;
                let v = ((uv.y * 0.5 + 0.5).rem_euclid(1.0) * image.height as f64) as usize;
                let p = image.pixel(u.min(image.width - 1), v.min(image.height - 1));
                (0.299 * p.r as f64 + 0.587 * p.g as f64 + 0.114 * p.b as f64) / 255.0
            }
        }
    }
}
