//! Vector primitives over canvas units.
//!
//! The canvas is the unit square with the origin in the top-left corner and
//! `y` pointing down. Shapes stay analytic (center, radius, rotation) until
//! the rasterizer asks for an outline.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::color::Rgb8;
use crate::{Error, Result};

/// Segments used to polygonize an ellipse.
pub const ELLIPSE_SEGMENTS: usize = 96;
/// Samples along each edge of a wavy band outline.
pub const BAND_SAMPLES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Rotates about the origin (counter-clockwise in a y-up frame,
    /// clockwise on screen).
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn from_angle(angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c, s)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A line through `anchor` with unit `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub anchor: Point,
    pub direction: Point,
}

impl Axis {
    pub fn new(anchor: Point, direction: Point) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() || !anchor.is_finite() {
            return Err(Error::InvalidArgument("axis direction must be a finite non-zero vector".into()));
        }
        Ok(Self { anchor, direction: direction * (1.0 / n) })
    }

    pub fn from_angle(anchor: Point, angle: f64) -> Self {
        Self { anchor, direction: Point::from_angle(angle) }
    }

    pub fn vertical(x: f64) -> Self {
        Self { anchor: Point::new(x, 0.0), direction: Point::new(0.0, 1.0) }
    }

    pub fn horizontal(y: f64) -> Self {
        Self { anchor: Point::new(0.0, y), direction: Point::new(1.0, 0.0) }
    }

    pub fn angle(&self) -> f64 {
        self.direction.y.atan2(self.direction.x)
    }

    pub fn reflect(&self, p: Point) -> Point {
        let d = p - self.anchor;
        let along = self.direction * d.dot(self.direction);
        self.anchor + along * 2.0 - d
    }

    /// Signed distance (positive on the left of `direction` in screen space).
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = p - self.anchor;
        self.direction.x * d.y - self.direction.y * d.x
    }
}

/// Texture coordinates in the shape's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvTransform {
    pub scale: f64,
    pub rotation: f64,
    pub offset: Point,
    /// Set on reflected copies so textures mirror with their shape.
    pub mirrored: bool,
}

impl Default for UvTransform {
    fn default() -> Self {
        Self { scale: 1.0, rotation: 0.0, offset: Point::default(), mirrored: false }
    }
}

impl UvTransform {
    pub fn apply(&self, local: Point) -> Point {
        let q = if self.mirrored { Point::new(local.x, -local.y) } else { local };
        q.rotated(self.rotation) * self.scale + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FillStyle {
    Solid { color: Rgb8 },
    /// A registry texture modulating a tint colour.
    Texture { texture_id: u32, tint: Rgb8, uv: UvTransform },
}

impl FillStyle {
    pub const fn solid(color: Rgb8) -> Self {
        FillStyle::Solid { color }
    }

    /// The colour that carries hue and lightness for rule predicates.
    pub fn base_color(&self) -> Rgb8 {
        match *self {
            FillStyle::Solid { color } => color,
            FillStyle::Texture { tint, .. } => tint,
        }
    }

    pub fn with_base_color(self, color: Rgb8) -> Self {
        match self {
            FillStyle::Solid { .. } => FillStyle::Solid { color },
            FillStyle::Texture { texture_id, uv, .. } => FillStyle::Texture { texture_id, tint: color, uv },
        }
    }

    fn mirrored(self) -> Self {
        match self {
            FillStyle::Texture { texture_id, tint, mut uv } => {
                uv.mirrored = !uv.mirrored;
                FillStyle::Texture { texture_id, tint, uv }
            }
            solid => solid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    RegularPolygon { sides: u32 },
    /// Semi-axes `radius` (local x) and `radius * aspect` (local y).
    Ellipse { aspect: f64 },
    /// Ribbon of half-length `radius` whose centerline is
    /// `y = amplitude * sin(2π * waves * (x / 2radius) + phase)` in the local frame.
    WavyBand { amplitude: f64, waves: f64, phase: f64, thickness: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    #[serde(flatten)]
    pub kind: ShapeKind,
    pub center: Point,
    pub radius: f64,
    pub rotation: f64,
    pub fill: FillStyle,
    pub z: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn from_points(points: &[Point]) -> Option<BBox> {
        let first = *points.first()?;
        let mut b = BBox { min: first, max: first };
        for p in &points[1..] {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }

    pub fn dilate(&self, by: f64) -> BBox {
        BBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn inside_unit_square(&self) -> bool {
        self.min.x >= 0.0 && self.min.y >= 0.0 && self.max.x <= 1.0 && self.max.y <= 1.0
    }
}

/// Polygon with `sides` vertices on a circle; vertex `k` sits at angle
/// `rotation + 2πk/sides`.
pub fn regular_polygon(sides: u32, center: Point, radius: f64, rotation: f64) -> Result<Shape> {
    if sides < 3 {
        return Err(Error::InvalidArgument(alloc::format!("polygon needs at least 3 sides, got {sides}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("radius must be positive, got {radius}")));
    }
    Ok(Shape {
        kind: ShapeKind::RegularPolygon { sides },
        center,
        radius,
        rotation,
        fill: FillStyle::solid(Rgb8::BLACK),
        z: 0,
    })
}

pub fn ellipse(center: Point, radius: f64, aspect: f64, rotation: f64) -> Result<Shape> {
    if !(radius > 0.0) || !(aspect > 0.0) {
        return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
    }
    Ok(Shape {
        kind: ShapeKind::Ellipse { aspect },
        center,
        radius,
        rotation,
        fill: FillStyle::solid(Rgb8::BLACK),
        z: 0,
    })
}

/// Rotates `shape` about its own center by `rotation`, then translates it.
pub fn transform(shape: &Shape, rotation: f64, translation: Point) -> Shape {
    Shape { center: shape.center + translation, rotation: shape.rotation + rotation, ..*shape }
}

pub fn mirror(points: &[Point], axis: &Axis) -> Vec<Point> {
    points.iter().map(|&p| axis.reflect(p)).collect()
}

/// `rows × cols` lattice, row-major, rotated by `angle` about `origin`.
pub fn grid_points(rows: usize, cols: usize, origin: Point, row_gap: f64, col_gap: f64, angle: f64) -> Result<Vec<Point>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid needs at least one row and column".into()));
    }
    if !(row_gap > 0.0) || !(col_gap > 0.0) {
        return Err(Error::InvalidArgument("grid gaps must be positive".into()));
    }
    let (sin, cos) = angle.sin_cos();
    let u = Point::new(cos, sin) * col_gap;
    let v = Point::new(-sin, cos) * row_gap;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(origin + u * c as f64 + v * r as f64);
        }
    }
    Ok(out)
}

impl Shape {
    pub fn with_fill(mut self, fill: FillStyle) -> Self {
        self.fill = fill;
        self
    }

    pub fn with_z(mut self, z: i32) -> Self {
        self.z = z;
        self
    }

    pub fn to_local(&self, p: Point) -> Point {
        (p - self.center).rotated(-self.rotation)
    }

    fn to_world(&self, local: Point) -> Point {
        self.center + local.rotated(self.rotation)
    }

    /// Boundary as a closed polygon (last vertex implicitly joins the first).
    pub fn outline(&self) -> Vec<Point> {
        match self.kind {
            ShapeKind::RegularPolygon { sides } => (0..sides)
                .map(|k| {
                    let a = self.rotation + TAU * k as f64 / sides as f64;
                    self.center + Point::from_angle(a) * self.radius
                })
                .collect(),
            ShapeKind::Ellipse { aspect } => (0..ELLIPSE_SEGMENTS)
                .map(|k| {
                    let t = TAU * k as f64 / ELLIPSE_SEGMENTS as f64;
                    let (s, c) = t.sin_cos();
                    self.to_world(Point::new(self.radius * c, self.radius * aspect * s))
                })
                .collect(),
            ShapeKind::WavyBand { amplitude, waves, phase, thickness } => {
                let half = thickness / 2.0;
                let n = BAND_SAMPLES;
                let centerline = |i: usize| {
                    let x = -self.radius + 2.0 * self.radius * i as f64 / n as f64;
                    let y = amplitude * (TAU * waves * (x + self.radius) / (2.0 * self.radius) + phase).sin();
                    (x, y)
                };
                let mut pts = Vec::with_capacity(2 * (n + 1));
                for i in 0..=n {
                    let (x, y) = centerline(i);
                    pts.push(self.to_world(Point::new(x, y - half)));
                }
                for i in (0..=n).rev() {
                    let (x, y) = centerline(i);
                    pts.push(self.to_world(Point::new(x, y + half)));
                }
                pts
            }
        }
    }

    /// Analytic area in canvas units².
    pub fn area(&self) -> f64 {
        let r = self.radius;
        match self.kind {
            ShapeKind::RegularPolygon { sides } => {
                let n = sides as f64;
                0.5 * n * r * r * (TAU / n).sin()
            }
            ShapeKind::Ellipse { aspect } => PI * r * r * aspect,
            // Vertical offsets of ±thickness/2 around a graph: area is exact.
            ShapeKind::WavyBand { thickness, .. } => 2.0 * r * thickness,
        }
    }

    /// Radius of a circle about `center` containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::RegularPolygon { .. } => self.radius,
            ShapeKind::Ellipse { aspect } => self.radius * aspect.max(1.0),
            ShapeKind::WavyBand { amplitude, thickness, .. } => {
                let h = amplitude.abs() + thickness / 2.0;
                (self.radius * self.radius + h * h).sqrt()
            }
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_points(&self.outline()).unwrap_or(BBox { min: self.center, max: self.center })
    }

    pub fn inside_canvas(&self) -> bool {
        self.bbox().inside_unit_square()
    }

    /// Reflection across `axis`. Regular polygons and ellipses keep their kind
    /// with a reflected rotation; bands shift phase by π.
    pub fn mirrored(&self, axis: &Axis) -> Shape {
        let phi = axis.angle();
        let kind = match self.kind {
            ShapeKind::WavyBand { amplitude, waves, phase, thickness } => ShapeKind::WavyBand {
                amplitude,
                waves,
                phase: normalize_angle(phase + PI),
                thickness,
            },
            k => k,
        };
        Shape {
            kind,
            center: axis.reflect(self.center),
            rotation: 2.0 * phi - self.rotation,
            fill: self.fill.mirrored(),
            ..*self
        }
    }

    /// Form equality (kind and size), ignoring position, rotation and fill.
    pub fn same_form(&self, other: &Shape, tol: f64) -> bool {
        let kinds = match (self.kind, other.kind) {
            (ShapeKind::RegularPolygon { sides: a }, ShapeKind::RegularPolygon { sides: b }) => a == b,
            (ShapeKind::Ellipse { aspect: a }, ShapeKind::Ellipse { aspect: b }) => (a - b).abs() <= tol,
            (
                ShapeKind::WavyBand { amplitude: a1, waves: w1, thickness: t1, .. },
                ShapeKind::WavyBand { amplitude: a2, waves: w2, thickness: t2, .. },
            ) => (a1 - a2).abs() <= tol && (w1 - w2).abs() <= tol && (t1 - t2).abs() <= tol,
            _ => false,
        };
        kinds && (self.radius - other.radius).abs() <= tol * self.radius.max(other.radius).max(1.0)
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}
