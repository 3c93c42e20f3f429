//! Compositions, the rule-driven generator and the rule verifier.

mod catalog;
mod rules;
mod verify;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use catalog::{rule_spec, rules_for, ParamDomain, RuleSpec, RULES};
pub use verify::{verify, visual_weight, Violation, FIGURE_GROUND_MIN, HUE_OUTLIER_MIN};

use crate::color::Rgb8;
use crate::geometry::{Axis, BBox, FillStyle, Point, Shape, UvTransform};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::texture::TextureRegistry;
use crate::{Error, Result};

/// Rejection-sampling budget per composition.
pub const MAX_ATTEMPTS: u32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Principle {
    Emphasis,
    Balance,
    Rhythm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubVdp {
    Color,
    Isolation,
    Shape,
    Symmetric,
    Asymmetric,
    Crystallographic,
    Regular,
    Progressive,
    Flowing,
}

impl SubVdp {
    pub const ALL: [SubVdp; 9] = [
        SubVdp::Color,
        SubVdp::Isolation,
        SubVdp::Shape,
        SubVdp::Symmetric,
        SubVdp::Asymmetric,
        SubVdp::Crystallographic,
        SubVdp::Regular,
        SubVdp::Progressive,
        SubVdp::Flowing,
    ];

    pub fn principle(self) -> Principle {
        match self {
            SubVdp::Color | SubVdp::Isolation | SubVdp::Shape => Principle::Emphasis,
            SubVdp::Symmetric | SubVdp::Asymmetric | SubVdp::Crystallographic => Principle::Balance,
            SubVdp::Regular | SubVdp::Progressive | SubVdp::Flowing => Principle::Rhythm,
        }
    }

    /// Position in [`SubVdp::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SubVdp::Color => "color",
            SubVdp::Isolation => "isolation",
            SubVdp::Shape => "shape",
            SubVdp::Symmetric => "symmetric",
            SubVdp::Asymmetric => "asymmetric",
            SubVdp::Crystallographic => "crystallographic",
            SubVdp::Regular => "regular",
            SubVdp::Progressive => "progressive",
            SubVdp::Flowing => "flowing",
        }
    }
}

impl fmt::Display for SubVdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubVdp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SubVdp::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown class {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// Solid fills.
    Sdv1,
    /// Textured fills and background.
    Sdv2,
}

impl FromStr for Style {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sdv1" => Ok(Style::Sdv1),
            "sdv2" => Ok(Style::Sdv2),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown style {s:?}"))),
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Sdv1 => "sdv1",
            Style::Sdv2 => "sdv2",
        })
    }
}

/// Declared arrangement of elements, checked by the verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum Layout {
    /// Element `members[k]` sits at `origin + u*col + v*row`; when `complete`
    /// every lattice site is occupied exactly once.
    Lattice { origin: Point, u: Point, v: Point, rows: usize, cols: usize, members: Vec<usize>, complete: bool },
    /// Elements on circles of radius `k * interval` around `center`.
    Rings { center: Point, interval: f64 },
    /// Element centers follow `origin + t*dir + amplitude*sin(2πt/wavelength + phase)*normal`.
    Sinusoid { origin: Point, angle: f64, amplitude: f64, wavelength: f64, phase: f64 },
}

/// Generator-side ground truth used by the verifier and by focality checks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub element_count: usize,
    pub palette: Vec<Rgb8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emphasized: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_box: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    /// Element order along a progression or flow.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequence: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub background: FillStyle,
    pub elements: Vec<Shape>,
    pub label: SubVdp,
    pub rule_id: u8,
    pub seed: u64,
    pub style: Style,
    pub truth: GroundTruth,
}

impl Composition {
    /// A bare scene for rendering tests; verification will reject it.
    #[cfg(test)]
    pub(crate) fn unlabeled(background: FillStyle, elements: Vec<Shape>) -> Self {
        let truth = GroundTruth { element_count: elements.len(), ..GroundTruth::default() };
        Self { background, elements, label: SubVdp::Color, rule_id: 0, seed: 0, style: Style::Sdv1, truth }
    }

    pub fn summary(&self) -> String {
        alloc::format!("rule {} ({}) seed {} {}", self.rule_id, self.label, self.seed, self.style)
    }
}

/// Assigns fills. Solid style passes colours through; textured style maps
/// each distinct colour to one texture look so repeated elements match.
pub(crate) struct Painter {
    style: Style,
    texture_count: u32,
    rng: Rng,
    cache: Vec<(Rgb8, FillStyle)>,
}

impl Painter {
    fn new(style: Style, texture_count: u32, seed: u64) -> Self {
        Self { style, texture_count, rng: rng_from_seed(seed), cache: Vec::new() }
    }

    fn random_uv(&mut self, scale: core::ops::Range<f64>) -> UvTransform {
        UvTransform {
            scale: self.rng.random_range(scale),
            rotation: self.rng.random_range(0.0..core::f64::consts::TAU),
            offset: Point::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)),
            mirrored: false,
        }
    }

    pub(crate) fn fill(&mut self, color: Rgb8) -> FillStyle {
        if self.style == Style::Sdv1 {
            return FillStyle::solid(color);
        }
        if let Some((_, f)) = self.cache.iter().find(|(c, _)| *c == color) {
            return *f;
        }
        let texture_id = self.rng.random_range(0..self.texture_count);
        let fill = FillStyle::Texture { texture_id, tint: color, uv: self.random_uv(0.6..1.6) };
        self.cache.push((color, fill));
        fill
    }

    fn background(&mut self, color: Rgb8) -> FillStyle {
        match self.style {
            Style::Sdv1 => FillStyle::solid(color),
            Style::Sdv2 => {
                let texture_id = self.rng.random_range(0..self.texture_count);
                // Finer grain than element textures, so the ground reads as
                // surface rather than structure.
                FillStyle::Texture { texture_id, tint: color, uv: self.random_uv(2.0..3.5) }
            }
        }
    }
}

/// Output of a rule builder before fills are finalized.
pub(crate) struct Draft {
    pub background: Rgb8,
    pub elements: Vec<Shape>,
    pub truth: GroundTruth,
}

/// Generates with the built-in procedural textures.
pub fn generate(rule_id: u8, seed: u64, style: Style) -> Result<Composition> {
    generate_with(rule_id, seed, style, &TextureRegistry::procedural())
}

/// Deterministic in `(rule_id, seed, style, textures.len())`. The layout
/// depends only on `(rule_id, seed)`, so both styles share geometry.
pub fn generate_with(rule_id: u8, seed: u64, style: Style, textures: &TextureRegistry) -> Result<Composition> {
    let spec = rule_spec(rule_id)?;
    if style == Style::Sdv2 && textures.is_empty() {
        return Err(Error::EmptyTextureRegistry);
    }
    let stream = derive_seed(seed, rule_id as u64);
    let mut rng = rng_from_seed(stream);
    let mut painter = Painter::new(style, textures.len() as u32, derive_seed(stream, 0x7e47));
    for _ in 0..MAX_ATTEMPTS {
        if let Some(draft) = rules::build(spec, &mut rng, &mut painter) {
            let mut truth = draft.truth;
            truth.element_count = draft.elements.len();
            return Ok(Composition {
                background: painter.background(draft.background),
                elements: draft.elements,
                label: spec.sub_vdp,
                rule_id,
                seed,
                style,
                truth,
            });
        }
    }
    Err(Error::GenerationFailed { rule: rule_id, attempts: MAX_ATTEMPTS })
}
