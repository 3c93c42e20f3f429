//! One builder per rule. A builder returns `None` when a random draw cannot
//! be realized (no room, colour clash); the caller redraws.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::verify::{near_symmetric, visual_weight, HUE_OUTLIER_MIN};
use super::{Draft, GroundTruth, Layout, Painter, RuleSpec};
use crate::color::{hue_distance, Hsl, Rgb8};
use crate::geometry::{Axis, FillStyle, Point, Shape, ShapeKind};
use crate::rng::Rng;

/// Placement margin from the canvas edge.
const MARGIN: f64 = 0.03;
/// Minimum clearance between bounding circles.
const GAP: f64 = 0.01;
const CENTER: Point = Point::new(0.5, 0.5);
/// Lightness separation used when drawing colours. Larger than the verifier's
/// threshold so 8-bit rounding cannot push a pair under it.
const CONTRAST: f64 = 0.17;
const TRIES: usize = 200;

pub(crate) fn build(spec: &'static RuleSpec, rng: &mut Rng, painter: &mut Painter) -> Option<Draft> {
    let mut cx = Ctx { spec, rng, painter };
    match spec.id {
        1 => color_single(&mut cx),
        2 => color_grid(&mut cx),
        3 => isolated_off_grid(&mut cx),
        4 => isolated_in_gap(&mut cx),
        5 => isolated_from_swarm(&mut cx),
        6 => isolated_beyond_row(&mut cx),
        7 => shape_grid(&mut cx, Outlier::Form, false),
        8 => shape_scatter(&mut cx),
        9 => shape_grid(&mut cx, Outlier::Scale, true),
        10 => shape_grid(&mut cx, Outlier::Form, true),
        11 => {
            let axis = if cx.coin() { Axis::vertical(0.5) } else { Axis::horizontal(0.5) };
            symmetric(&mut cx, axis)
        }
        12 => {
            let angle = cx.real("axis_angle");
            if (angle - FRAC_PI_2).abs() < 0.25 {
                return None;
            }
            symmetric(&mut cx, Axis::from_angle(CENTER, angle))
        }
        13 => few_large_many_small(&mut cx),
        14 => big_near_small_far(&mut cx),
        15 => contrast_weight(&mut cx),
        16 => diagonal_split(&mut cx),
        17 => cluster_void(&mut cx),
        18 => interlock(&mut cx),
        19 => crystal_scatter(&mut cx),
        20 => crystal_jitter_grid(&mut cx),
        21 => crystal_mosaic(&mut cx),
        22 => crystal_patches(&mut cx),
        23 => regular_grid(&mut cx, false),
        24 => regular_grid(&mut cx, true),
        25 => regular_row(&mut cx),
        26 => regular_rings(&mut cx),
        27 => progressive_size(&mut cx),
        28 => progressive_spacing(&mut cx),
        29 => progressive_sides(&mut cx),
        30 => progressive_lightness(&mut cx),
        31 => wavy_bands(&mut cx),
        32 => sinusoid_path(&mut cx),
        _ => None,
    }
}

struct Ctx<'a> {
    spec: &'static RuleSpec,
    rng: &'a mut Rng,
    painter: &'a mut Painter,
}

impl Ctx<'_> {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    fn real(&mut self, name: &str) -> f64 {
        let d = self.spec.domain(name);
        self.uniform(d.min, d.max)
    }

    fn int(&mut self, name: &str) -> usize {
        let d = self.spec.domain(name);
        self.rng.random_range(d.min as usize..=d.max as usize)
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    fn sign(&mut self) -> f64 {
        if self.coin() {
            1.0
        } else {
            -1.0
        }
    }

    fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    fn angle(&mut self) -> f64 {
        self.uniform(0.0, TAU)
    }

    fn hue(&mut self) -> f64 {
        self.uniform(0.0, 360.0)
    }

    fn color(&mut self, hue: f64) -> Rgb8 {
        let l = self.uniform(0.3, 0.75);
        self.color_l(hue, l)
    }

    fn random_color(&mut self) -> Rgb8 {
        let h = self.hue();
        self.color(h)
    }

    fn color_l(&mut self, hue: f64, l: f64) -> Rgb8 {
        let s = self.uniform(0.45, 0.9);
        Rgb8::from_hsl(Hsl { h: hue, s, l })
    }

    /// `n` hues pairwise at least `min_gap` degrees apart.
    fn hues(&mut self, n: usize, min_gap: f64) -> Option<Vec<f64>> {
        let mut out: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..TRIES {
            if out.len() == n {
                break;
            }
            let h = self.hue();
            if out.iter().all(|&o| hue_distance(o, h) >= min_gap) {
                out.push(h);
            }
        }
        (out.len() == n).then_some(out)
    }

    fn palette(&mut self, n: usize) -> Option<Vec<Rgb8>> {
        let hues = self.hues(n, 40.0)?;
        Some(hues.into_iter().map(|h| self.color(h)).collect())
    }

    /// A ground whose lightness stays `CONTRAST` away from every colour.
    fn background(&mut self, hue: Option<f64>, colors: &[Rgb8]) -> Option<Rgb8> {
        let ls: Vec<f64> = colors.iter().map(|c| c.lightness()).collect();
        for _ in 0..40 {
            let h = match hue {
                Some(h) => h,
                None => self.hue(),
            };
            let l = self.uniform(0.05, 0.95);
            let s = self.uniform(0.4, 0.9);
            let c = Rgb8::from_hsl(Hsl { h, s, l });
            let cl = c.lightness();
            if ls.iter().all(|&x| (x - cl).abs() >= CONTRAST) {
                return Some(c);
            }
        }
        None
    }

    /// A circle or a regular polygon with 3 to 8 sides.
    fn form(&mut self) -> ShapeKind {
        match self.rng.random_range(0..7u32) {
            0 => ShapeKind::Ellipse { aspect: 1.0 },
            k => ShapeKind::RegularPolygon { sides: k + 2 },
        }
    }

    /// A form clearly unlike `kind` (side counts at least two apart,
    /// a circle counting as ten sides).
    fn other_form(&mut self, kind: ShapeKind) -> ShapeKind {
        loop {
            let k = self.form();
            if (form_rank(k) - form_rank(kind)).abs() >= 2 {
                return k;
            }
        }
    }

    fn fill(&mut self, color: Rgb8) -> FillStyle {
        self.painter.fill(color)
    }

    fn elem(&mut self, kind: ShapeKind, center: Point, radius: f64, rotation: f64, color: Rgb8) -> Shape {
        let fill = self.fill(color);
        Shape { kind, center, radius, rotation, fill, z: 0 }
    }

    /// Uniform point whose `reach`-disk stays inside the margin.
    fn place(&mut self, reach: f64) -> Option<Point> {
        let lo = MARGIN + reach;
        let hi = 1.0 - MARGIN - reach;
        if hi < lo {
            return None;
        }
        Some(Point::new(self.uniform(lo, hi), self.uniform(lo, hi)))
    }

    /// Random offset that brings every `rel` point, padded by `reach`, inside
    /// the margin.
    fn place_points(&mut self, rel: &[Point], reach: f64) -> Option<Point> {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in rel {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let lo_x = MARGIN + reach - x0;
        let hi_x = 1.0 - MARGIN - reach - x1;
        let lo_y = MARGIN + reach - y0;
        let hi_y = 1.0 - MARGIN - reach - y1;
        if hi_x < lo_x || hi_y < lo_y {
            return None;
        }
        Some(Point::new(self.uniform(lo_x, hi_x), self.uniform(lo_y, hi_y)))
    }

    fn in_disk(&mut self, center: Point, radius: f64) -> Point {
        let r = radius * self.uniform(0.0, 1.0).sqrt();
        center + Point::from_angle(self.angle()) * r
    }
}

fn form_rank(kind: ShapeKind) -> i32 {
    match kind {
        ShapeKind::RegularPolygon { sides } => sides as i32,
        _ => 10,
    }
}

fn probe(kind: ShapeKind, radius: f64) -> Shape {
    Shape { kind, center: Point::default(), radius, rotation: 0.0, fill: FillStyle::solid(Rgb8::BLACK), z: 0 }
}

fn reach(kind: ShapeKind, radius: f64) -> f64 {
    probe(kind, radius).bounding_radius()
}

fn fits(s: &Shape) -> bool {
    let r = s.bounding_radius();
    let c = s.center;
    let lo = MARGIN - 0.01 + r;
    let hi = 1.0 - MARGIN + 0.01 - r;
    c.x >= lo && c.x <= hi && c.y >= lo && c.y <= hi
}

fn clear(s: &Shape, others: &[Shape]) -> bool {
    others
        .iter()
        .all(|o| s.center.distance(o.center) >= s.bounding_radius() + o.bounding_radius() + GAP)
}

fn all_clear(shapes: &[Shape]) -> bool {
    (0..shapes.len()).all(|i| clear(&shapes[i], &shapes[i + 1..]))
}

fn max_nearest_neighbor(points: &[Point]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        let nn = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| p.distance(*q))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nn);
    }
    worst
}

fn min_distance(p: Point, points: &[Point]) -> f64 {
    points.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min)
}

struct Grid {
    rows: usize,
    cols: usize,
    origin: Point,
    u: Point,
    v: Point,
}

impl Grid {
    fn offsets(rows: usize, cols: usize, u: Point, v: Point) -> Vec<Point> {
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                out.push(u * c as f64 + v * r as f64);
            }
        }
        out
    }

    /// A `rows × cols` lattice with equal `spacing`, rotated by `angle`,
    /// randomly positioned so `reach`-disks fit.
    fn place(cx: &mut Ctx, rows: usize, cols: usize, spacing: f64, angle: f64, reach: f64) -> Option<Grid> {
        let u = Point::from_angle(angle) * spacing;
        let v = Point::from_angle(angle + FRAC_PI_2) * spacing;
        let origin = cx.place_points(&Grid::offsets(rows, cols, u, v), reach)?;
        Some(Grid { rows, cols, origin, u, v })
    }

    fn points(&self) -> Vec<Point> {
        Grid::offsets(self.rows, self.cols, self.u, self.v).into_iter().map(|p| self.origin + p).collect()
    }

    fn layout(&self, members: Vec<usize>, complete: bool) -> Layout {
        Layout::Lattice { origin: self.origin, u: self.u, v: self.v, rows: self.rows, cols: self.cols, members, complete }
    }
}

fn truth(palette: Vec<Rgb8>) -> GroundTruth {
    GroundTruth { palette, ..GroundTruth::default() }
}

// ---- emphasis: colour ----

fn color_single(cx: &mut Ctx) -> Option<Draft> {
    let radius = cx.real("radius");
    let kind = cx.form();
    let hue = cx.hue();
    let el = cx.color(hue);
    let gap = cx.real("hue_gap") * cx.sign();
    let bg = cx.background(Some(hue + gap), &[el])?;
    if hue_distance(bg.hue(), el.hue()) < HUE_OUTLIER_MIN + 5.0 {
        return None;
    }
    let center = cx.place(reach(kind, radius))?;
    let rot = cx.angle();
    let s = cx.elem(kind, center, radius, rot, el);
    let mut t = truth(vec![el]);
    t.emphasized = Some(0);
    t.focus_box = Some(s.bbox());
    Some(Draft { background: bg, elements: vec![s], truth: t })
}

fn color_grid(cx: &mut Ctx) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let spacing = cx.real("spacing");
    let radius = spacing * cx.real("fill");
    let angle = cx.real("grid_angle");
    let kind = cx.form();
    let rot = cx.angle();
    let grid = Grid::place(cx, rows, cols, spacing, angle, reach(kind, radius))?;
    let hue = cx.hue();
    let group = cx.color(hue);
    let other_hue = hue + cx.real("hue_gap") * cx.sign();
    // Same lightness as the group, so the outlier differs in hue alone.
    let accent = cx.color_l(other_hue, group.lightness());
    if hue_distance(group.hue(), accent.hue()) < HUE_OUTLIER_MIN + 5.0 {
        return None;
    }
    let bg = cx.background(None, &[group, accent])?;
    let pts = grid.points();
    let odd = cx.index(pts.len());
    let elements: Vec<Shape> = pts
        .iter()
        .enumerate()
        .map(|(i, &p)| cx.elem(kind, p, radius, rot, if i == odd { accent } else { group }))
        .collect();
    let mut t = truth(vec![group, accent]);
    t.emphasized = Some(odd);
    t.focus_box = Some(elements[odd].bbox());
    t.layout = Some(grid.layout((0..pts.len()).collect(), true));
    Some(Draft { background: bg, elements, truth: t })
}

// ---- emphasis: isolation ----

/// Appends the lone element and checks the isolation margin against the
/// actual nearest-neighbour spacing of the group.
fn finish_isolation(
    cx: &mut Ctx,
    mut group: Vec<Shape>,
    lone: Shape,
    color: Rgb8,
    layout: Option<Layout>,
) -> Option<Draft> {
    let pts: Vec<Point> = group.iter().map(|s| s.center).collect();
    if min_distance(lone.center, &pts) < 3.05 * max_nearest_neighbor(&pts) {
        return None;
    }
    if !fits(&lone) || !clear(&lone, &group) {
        return None;
    }
    let bg = cx.background(None, &[color])?;
    let e = group.len();
    group.push(lone);
    let mut t = truth(vec![color]);
    t.emphasized = Some(e);
    t.focus_box = Some(lone.bbox());
    t.layout = layout;
    Some(Draft { background: bg, elements: group, truth: t })
}

fn isolated_off_grid(cx: &mut Ctx) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let spacing = cx.real("spacing");
    let radius = spacing * cx.real("fill");
    let angle = cx.real("grid_angle");
    let kind = cx.form();
    let rot = cx.angle();
    let r = reach(kind, radius);
    let grid = Grid::place(cx, rows, cols, spacing, angle, r)?;
    let color = cx.random_color();
    let pts = grid.points();
    let iso = cx.real("isolation") * spacing;
    let mut lone_at = None;
    for _ in 0..TRIES {
        let p = cx.place(r)?;
        if min_distance(p, &pts) >= iso {
            lone_at = Some(p);
            break;
        }
    }
    let group: Vec<Shape> = pts.iter().map(|&p| cx.elem(kind, p, radius, rot, color)).collect();
    let lone = cx.elem(kind, lone_at?, radius, rot, color);
    let layout = grid.layout((0..pts.len()).collect(), true);
    finish_isolation(cx, group, lone, color, Some(layout))
}

fn isolated_in_gap(cx: &mut Ctx) -> Option<Draft> {
    let spacing = cx.real("spacing");
    let radius = spacing * cx.real("fill");
    let kind = cx.form();
    let rot = cx.angle();
    let r = reach(kind, radius);
    let n = ((1.0 - 2.0 * (MARGIN + r)) / spacing).floor() as usize + 1;
    if n < 8 {
        return None;
    }
    let extent = (n - 1) as f64 * spacing;
    let origin = Point::new((1.0 - extent) / 2.0, (1.0 - extent) / 2.0);
    let grid = Grid { rows: n, cols: n, origin, u: Point::new(spacing, 0.0), v: Point::new(0.0, spacing) };
    let hole_row = cx.rng.random_range(3..n - 3);
    let hole_col = cx.rng.random_range(3..n - 3);
    let hole = origin + grid.u * hole_col as f64 + grid.v * hole_row as f64;
    let hole_radius = cx.real("hole") * spacing;
    let color = cx.random_color();
    let group: Vec<Shape> = grid
        .points()
        .into_iter()
        .filter(|p| p.distance(hole) >= hole_radius)
        .map(|p| cx.elem(kind, p, radius, rot, color))
        .collect();
    let lone = cx.elem(kind, hole, radius, rot, color);
    let layout = grid.layout((0..group.len()).collect(), false);
    finish_isolation(cx, group, lone, color, Some(layout))
}

fn isolated_from_swarm(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let radius = cx.real("radius");
    let swarm_radius = cx.real("swarm_radius");
    let kind = cx.form();
    let rot = cx.angle();
    let r = reach(kind, radius);
    let color = cx.random_color();
    let hub = cx.place(swarm_radius + r)?;
    let mut group: Vec<Shape> = Vec::with_capacity(count + 1);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..TRIES {
            let p = cx.in_disk(hub, swarm_radius);
            let s = cx.elem(kind, p, radius, rot, color);
            if clear(&s, &group) {
                group.push(s);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    let pts: Vec<Point> = group.iter().map(|s| s.center).collect();
    let iso = cx.real("isolation") * max_nearest_neighbor(&pts);
    for _ in 0..TRIES {
        let p = cx.place(r)?;
        if min_distance(p, &pts) >= iso {
            let lone = cx.elem(kind, p, radius, rot, color);
            return finish_isolation(cx, group, lone, color, None);
        }
    }
    None
}

fn isolated_beyond_row(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let spacing = cx.real("spacing");
    let radius = spacing * cx.real("fill");
    let mut angle = cx.real("axis_angle");
    if cx.coin() {
        angle += FRAC_PI_2;
    }
    let kind = cx.form();
    let rot = cx.angle();
    let r = reach(kind, radius);
    let grid = Grid::place(cx, 1, count, spacing, angle, r)?;
    let pts = grid.points();
    let k = cx.index(count);
    let offset = cx.real("isolation") * spacing * cx.sign();
    let p = pts[k] + Point::from_angle(angle + FRAC_PI_2) * offset;
    let color = cx.random_color();
    let group: Vec<Shape> = pts.iter().map(|&q| cx.elem(kind, q, radius, rot, color)).collect();
    let lone = cx.elem(kind, p, radius, rot, color);
    let layout = grid.layout((0..count).collect(), true);
    finish_isolation(cx, group, lone, color, Some(layout))
}

// ---- emphasis: shape ----

#[derive(Clone, Copy, PartialEq)]
enum Outlier {
    Form,
    Scale,
}

fn shape_grid(cx: &mut Ctx, outlier: Outlier, lightness_cue: bool) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let spacing = cx.real("spacing");
    let radius = spacing * cx.real("fill");
    let angle = cx.real("grid_angle");
    let kind = cx.form();
    let rot = cx.angle();
    let (odd_kind, odd_radius) = match outlier {
        Outlier::Form => (cx.other_form(kind), radius),
        Outlier::Scale => (kind, radius * cx.real("outlier_scale")),
    };
    let r = reach(kind, radius).max(reach(odd_kind, odd_radius));
    let grid = Grid::place(cx, rows, cols, spacing, angle, r)?;
    let hue = cx.hue();
    let (group, accent) = if lightness_cue {
        let l = cx.uniform(0.3, 0.75);
        let shift = cx.real("lightness_shift");
        let l2 = if l + shift <= 0.78 && (l - shift < 0.27 || cx.coin()) { l + shift } else { l - shift };
        if !(0.27..=0.78).contains(&l2) {
            return None;
        }
        let s = cx.uniform(0.45, 0.9);
        (Rgb8::from_hsl(Hsl { h: hue, s, l }), Rgb8::from_hsl(Hsl { h: hue, s, l: l2 }))
    } else {
        let c = cx.color(hue);
        (c, c)
    };
    let bg = cx.background(None, &[group, accent])?;
    let pts = grid.points();
    let odd = cx.index(pts.len());
    let elements: Vec<Shape> = pts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i == odd {
                cx.elem(odd_kind, p, odd_radius, rot, accent)
            } else {
                cx.elem(kind, p, radius, rot, group)
            }
        })
        .collect();
    if !all_clear(&elements) {
        return None;
    }
    let mut palette = vec![group];
    if accent != group {
        palette.push(accent);
    }
    let mut t = truth(palette);
    t.emphasized = Some(odd);
    t.focus_box = Some(elements[odd].bbox());
    t.layout = Some(grid.layout((0..pts.len()).collect(), true));
    Some(Draft { background: bg, elements, truth: t })
}

fn shape_scatter(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let radius = cx.real("radius");
    let big = radius * cx.real("outlier_scale");
    let kind = cx.form();
    let rot = cx.angle();
    let color = cx.random_color();
    let bg = cx.background(None, &[color])?;
    let mut elements: Vec<Shape> = Vec::with_capacity(count + 1);
    let big_at = cx.place(reach(kind, big))?;
    elements.push(cx.elem(kind, big_at, big, rot, color));
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..TRIES {
            let p = cx.place(reach(kind, radius))?;
            let s = cx.elem(kind, p, radius, rot, color);
            if clear(&s, &elements) {
                elements.push(s);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    // Move the outlier to a random slot so its index carries no signal.
    let odd = cx.index(elements.len());
    elements.swap(0, odd);
    let mut t = truth(vec![color]);
    t.emphasized = Some(odd);
    t.focus_box = Some(elements[odd].bbox());
    Some(Draft { background: bg, elements, truth: t })
}

// ---- balance: symmetric ----

/// Rotation making a shape centered on `axis` coincide with its reflection.
fn self_symmetric_rotation(cx: &mut Ctx, kind: ShapeKind, axis: &Axis) -> f64 {
    let phi = axis.angle();
    match kind {
        ShapeKind::RegularPolygon { sides } => {
            let k = cx.rng.random_range(0..2 * sides);
            phi + k as f64 * PI / sides as f64
        }
        _ => phi + cx.rng.random_range(0..4u32) as f64 * FRAC_PI_2,
    }
}

fn symmetric(cx: &mut Ctx, axis: Axis) -> Option<Draft> {
    let pairs = cx.int("pairs");
    let on_axis = cx.int("on_axis");
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let bg = cx.background(None, &palette)?;
    let mut elements: Vec<Shape> = Vec::new();
    for _ in 0..pairs {
        let mut placed = false;
        for _ in 0..TRIES {
            let kind = cx.form();
            let radius = cx.real("radius");
            let rot = cx.angle();
            let color = palette[cx.index(palette.len())];
            let r = reach(kind, radius);
            let p = cx.place(r)?;
            if axis.signed_distance(p) < r + GAP {
                continue;
            }
            let s = cx.elem(kind, p, radius, rot, color);
            let m = s.mirrored(&axis);
            if fits(&m) && clear(&s, &elements) && clear(&m, &elements) {
                elements.push(s);
                elements.push(m);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    for _ in 0..on_axis {
        for _ in 0..TRIES {
            let kind = cx.form();
            let radius = cx.real("radius");
            let color = palette[cx.index(palette.len())];
            let p = cx.place(reach(kind, radius))?;
            let c = (p + axis.reflect(p)) * 0.5;
            let rot = self_symmetric_rotation(cx, kind, &axis);
            let s = cx.elem(kind, c, radius, rot, color);
            if fits(&s) && clear(&s, &elements) {
                elements.push(s);
                break;
            }
        }
    }
    let mut t = truth(palette);
    t.axis = Some(axis);
    Some(Draft { background: bg, elements, truth: t })
}

// ---- balance: asymmetric ----

/// Shifts group `b` (centers relative to its anchor) so the weighted moment
/// about the canvas center vanishes. Returns the anchor too.
fn balance(a: &[Shape], b_rel: &[Shape], bg: Rgb8, allow_overlap: bool) -> Option<(Vec<Shape>, Point)> {
    let bgl = bg.lightness();
    let mut moment = Point::default();
    for s in a {
        moment = moment + (s.center - CENTER) * visual_weight(s, bgl);
    }
    let mut w_b = 0.0;
    let mut s_b = Point::default();
    for s in b_rel {
        let w = visual_weight(s, bgl);
        w_b += w;
        s_b = s_b + s.center * w;
    }
    if w_b <= 0.0 {
        return None;
    }
    let anchor = CENTER - (moment + s_b) * (1.0 / w_b);
    let mut all: Vec<Shape> = a.to_vec();
    all.extend(b_rel.iter().map(|s| Shape { center: s.center + anchor, ..*s }));
    if !all.iter().all(fits) {
        return None;
    }
    if !allow_overlap && !all_clear(&all) {
        return None;
    }
    if near_symmetric(&all) {
        return None;
    }
    Some((all, anchor))
}

/// Scatters shapes with radii from `radius` around `hub` within `spread`.
fn cluster(
    cx: &mut Ctx,
    count: usize,
    hub: Point,
    spread: f64,
    mut radius: impl FnMut(&mut Ctx) -> f64,
    colors: &[Rgb8],
) -> Option<Vec<Shape>> {
    let mut out: Vec<Shape> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..TRIES {
            let kind = cx.form();
            let r = radius(cx);
            let rot = cx.angle();
            let color = colors[cx.index(colors.len())];
            let p = cx.in_disk(hub, spread);
            let s = cx.elem(kind, p, r, rot, color);
            if clear(&s, &out) {
                out.push(s);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(out)
}

fn asymmetric_draft(bg: Rgb8, elements: Vec<Shape>, palette: Vec<Rgb8>) -> Draft {
    Draft { background: bg, elements, truth: truth(palette) }
}

fn two_colors(cx: &mut Ctx) -> Option<(Vec<Rgb8>, Rgb8)> {
    let palette = cx.palette(2)?;
    let bg = cx.background(None, &palette)?;
    Some((palette, bg))
}

fn few_large_many_small(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(cx.angle());
    let perp = dir.rotated(FRAC_PI_2);
    let (palette, bg) = two_colors(cx)?;
    let n_large = cx.int("large_count");
    let offset = cx.real("large_offset");
    let hub = CENTER - dir * offset;
    let mut a: Vec<Shape> = Vec::new();
    for _ in 0..n_large {
        let r = cx.real("large_radius");
        let kind = cx.form();
        let rot = cx.angle();
        let p = hub + perp * cx.uniform(-0.12, 0.12);
        a.push(cx.elem(kind, p, r, rot, palette[0]));
    }
    let n_small = cx.int("small_count");
    let b = cluster(cx, n_small, Point::default(), 0.12, |cx| cx.real("small_radius"), &palette[1..])?;
    let (all, _) = balance(&a, &b, bg, false)?;
    Some(asymmetric_draft(bg, all, palette))
}

fn big_near_small_far(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(cx.angle());
    let (palette, bg) = two_colors(cx)?;
    let r = cx.real("big_radius");
    let kind = cx.form();
    let rot = cx.angle();
    let offset = cx.real("big_offset");
    let a = vec![cx.elem(kind, CENTER - dir * offset, r, rot, palette[0])];
    let n = cx.int("small_count");
    let b = cluster(cx, n, Point::default(), 0.08, |cx| cx.real("small_radius"), &palette[1..])?;
    let (all, _) = balance(&a, &b, bg, false)?;
    Some(asymmetric_draft(bg, all, palette))
}

fn contrast_weight(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(cx.angle());
    let light_ground = cx.coin();
    let bg_l = if light_ground { cx.uniform(0.86, 0.93) } else { cx.uniform(0.07, 0.14) };
    let bg_hue = cx.hue();
    let bg = cx.color_l(bg_hue, bg_l);
    let strong_l = if light_ground { cx.uniform(0.25, 0.32) } else { cx.uniform(0.72, 0.8) };
    let delta = cx.uniform(0.18, 0.25);
    let weak_l = if light_ground { bg_l - delta } else { bg_l + delta };
    let hues = cx.hues(2, 40.0)?;
    let strong = cx.color_l(hues[0], strong_l);
    let weak = cx.color_l(hues[1], weak_l);
    let bgl = bg.lightness();
    if (weak.lightness() - bgl).abs() < CONTRAST || (strong.lightness() - bgl).abs() < 0.4 {
        return None;
    }
    let r = cx.real("strong_radius");
    let kind = cx.form();
    let rot = cx.angle();
    let offset = cx.real("strong_offset");
    let a = vec![cx.elem(kind, CENTER - dir * offset, r, rot, strong)];
    let n = cx.int("weak_count");
    let b = cluster(cx, n, Point::default(), 0.12, |cx| cx.real("weak_radius"), &[weak])?;
    let (all, _) = balance(&a, &b, bg, false)?;
    Some(asymmetric_draft(bg, all, vec![strong, weak]))
}

fn diagonal_split(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(FRAC_PI_4 + cx.index(4) as f64 * FRAC_PI_2);
    let (palette, bg) = two_colors(cx)?;
    let n_a = cx.int("a_count");
    let offset = cx.real("a_offset");
    let a = cluster(cx, n_a, CENTER - dir * offset, 0.12, |cx| cx.real("a_radius"), &palette[..1])?;
    let n_b = cx.int("b_count");
    let b = cluster(cx, n_b, Point::default(), 0.1, |cx| cx.real("b_radius"), &palette[1..])?;
    let (all, anchor) = balance(&a, &b, bg, false)?;
    if (anchor - CENTER).dot(dir) < 0.08 {
        return None;
    }
    Some(asymmetric_draft(bg, all, palette))
}

fn cluster_void(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(cx.angle());
    let (palette, bg) = two_colors(cx)?;
    let n = cx.int("cluster_count");
    let offset = cx.real("cluster_offset");
    let a = cluster(cx, n, CENTER - dir * offset, 0.08, |cx| cx.real("cluster_radius"), &palette[..1])?;
    let b = cluster(cx, 1, Point::default(), 0.0, |cx| cx.real("single_radius"), &palette[1..])?;
    let (all, anchor) = balance(&a, &b, bg, false)?;
    if (anchor - CENTER).dot(dir) < 0.1 {
        return None;
    }
    Some(asymmetric_draft(bg, all, palette))
}

fn interlock(cx: &mut Ctx) -> Option<Draft> {
    let dir = Point::from_angle(cx.angle());
    let hues = cx.hues(2, HUE_OUTLIER_MIN)?;
    let ca = cx.color(hues[0]);
    let cb = cx.color(hues[1]);
    let bg = cx.background(None, &[ca, cb])?;
    let major = cx.real("major_radius");
    let minor = major * cx.real("minor_scale");
    let offset = cx.real("major_offset");
    let aspect_a = cx.uniform(0.75, 1.0);
    let aspect_b = cx.uniform(0.75, 1.0);
    let (rot_a, rot_b) = (cx.angle(), cx.angle());
    let ha = CENTER - dir * offset;
    let eye = ShapeKind::Ellipse { aspect: 1.0 };
    let a = vec![
        cx.elem(ShapeKind::Ellipse { aspect: aspect_a }, ha, major, rot_a, ca),
        cx.elem(eye, ha, 0.22 * major, 0.0, cb).with_z(2),
    ];
    let b = vec![
        cx.elem(ShapeKind::Ellipse { aspect: aspect_b }, Point::default(), minor, rot_b, cb).with_z(1),
        cx.elem(eye, Point::default(), 0.22 * minor, 0.0, ca).with_z(2),
    ];
    let (all, anchor) = balance(&a, &b, bg, true)?;
    if anchor.distance(ha) >= major + minor {
        return None;
    }
    Some(asymmetric_draft(bg, all, vec![ca, cb]))
}

// ---- balance: crystallographic ----

fn quadrant_bounds(q: usize) -> (Point, Point) {
    let x0 = (q % 2) as f64 * 0.5;
    let y0 = (q / 2) as f64 * 0.5;
    (Point::new(x0, y0), Point::new(x0 + 0.5, y0 + 0.5))
}

fn distinct_colors(shapes: &[Shape]) -> usize {
    let mut seen: Vec<Rgb8> = Vec::new();
    for s in shapes {
        let c = s.fill.base_color();
        if !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen.len()
}

fn crystal_draft(cx: &mut Ctx, palette: Vec<Rgb8>, elements: Vec<Shape>) -> Option<Draft> {
    if distinct_colors(&elements) < 2 {
        return None;
    }
    let bg = cx.background(None, &palette)?;
    Some(Draft { background: bg, elements, truth: truth(palette) })
}

fn crystal_scatter(cx: &mut Ctx) -> Option<Draft> {
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let per_quadrant = cx.int("per_quadrant");
    let motifs: Vec<(ShapeKind, f64)> = (0..per_quadrant).map(|_| (cx.form(), cx.real("radius"))).collect();
    let mut elements: Vec<Shape> = Vec::new();
    for q in 0..4 {
        let (lo, hi) = quadrant_bounds(q);
        for &(kind, radius) in &motifs {
            let r = reach(kind, radius);
            let mut placed = false;
            for _ in 0..TRIES {
                let x = cx.uniform(lo.x.max(MARGIN + r), hi.x.min(1.0 - MARGIN - r));
                let y = cx.uniform(lo.y.max(MARGIN + r), hi.y.min(1.0 - MARGIN - r));
                if x == 0.5 || y == 0.5 {
                    continue;
                }
                let rot = cx.angle();
                let color = palette[cx.index(palette.len())];
                let s = cx.elem(kind, Point::new(x, y), radius, rot, color);
                if clear(&s, &elements) {
                    elements.push(s);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return None;
            }
        }
    }
    crystal_draft(cx, palette, elements)
}

/// Cell centers of an `n × n` tiling of the area inside the margin.
fn cell_centers(n: usize) -> (f64, Vec<Point>) {
    let cell = (1.0 - 2.0 * MARGIN) / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push(Point::new(MARGIN + (c as f64 + 0.5) * cell, MARGIN + (r as f64 + 0.5) * cell));
        }
    }
    (cell, out)
}

fn crystal_jitter_grid(cx: &mut Ctx) -> Option<Draft> {
    let n = 2 * cx.int("cells");
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let (cell, centers) = cell_centers(n);
    let radius = cell * cx.real("fill");
    let kind = cx.form();
    let rot = cx.angle();
    let jitter = cx.real("jitter") * cell;
    let mut elements = Vec::with_capacity(centers.len());
    for p in centers {
        let q = p + Point::new(cx.uniform(-jitter, jitter), cx.uniform(-jitter, jitter));
        let color = palette[cx.index(palette.len())];
        elements.push(cx.elem(kind, q, radius, rot, color));
    }
    if !all_clear(&elements) {
        return None;
    }
    crystal_draft(cx, palette, elements)
}

fn quadrant_of(p: Point) -> usize {
    (p.x >= 0.5) as usize + 2 * (p.y >= 0.5) as usize
}

fn crystal_mosaic(cx: &mut Ctx) -> Option<Draft> {
    let n = 2 * cx.int("cells");
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let (cell, centers) = cell_centers(n);
    let radius = cell * cx.real("fill");
    let per_quadrant = (n / 2) * (n / 2);
    let motif: Vec<ShapeKind> = (0..per_quadrant).map(|_| cx.form()).collect();
    let mut decks: Vec<Vec<ShapeKind>> = (0..4)
        .map(|_| {
            let mut d = motif.clone();
            d.shuffle(cx.rng);
            d
        })
        .collect();
    let mut elements = Vec::with_capacity(centers.len());
    for p in centers {
        let kind = decks[quadrant_of(p)].pop()?;
        let rot = cx.angle();
        let color = palette[cx.index(palette.len())];
        elements.push(cx.elem(kind, p, radius, rot, color));
    }
    crystal_draft(cx, palette, elements)
}

fn crystal_patches(cx: &mut Ctx) -> Option<Draft> {
    let n = 2 * cx.int("cells");
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let (cell, centers) = cell_centers(n);
    let radius = cell * core::f64::consts::FRAC_1_SQRT_2;
    let square = ShapeKind::RegularPolygon { sides: 4 };
    let elements: Vec<Shape> = centers
        .into_iter()
        .map(|p| {
            let color = palette[cx.index(palette.len())];
            cx.elem(square, p, radius, FRAC_PI_4, color)
        })
        .collect();
    crystal_draft(cx, palette, elements)
}

// ---- rhythm: regular ----

/// Largest spacing at which a `rows × cols` lattice rotated by `angle`, with
/// element reach `fill * spacing`, fits inside the margin.
fn max_spacing(rows: usize, cols: usize, angle: f64, fill: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    let span_x = (cols - 1) as f64 * c.abs() + (rows - 1) as f64 * s.abs();
    let span_y = (cols - 1) as f64 * s.abs() + (rows - 1) as f64 * c.abs();
    (1.0 - 2.0 * MARGIN) / (span_x.max(span_y) + 2.0 * fill)
}

fn uniform_draft(cx: &mut Ctx, elements: Vec<Shape>, color: Rgb8, layout: Option<Layout>) -> Option<Draft> {
    let bg = cx.background(None, &[color])?;
    let mut t = truth(vec![color]);
    t.layout = layout;
    Some(Draft { background: bg, elements, truth: t })
}

fn regular_grid(cx: &mut Ctx, rotated: bool) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let fill = cx.real("fill");
    let angle = if rotated { cx.real("grid_angle") } else { 0.0 };
    let kind = cx.form();
    let fill_reach = reach(kind, fill);
    let spacing = max_spacing(rows, cols, angle, fill_reach) * cx.uniform(0.6, 1.0);
    let radius = spacing * fill;
    if 2.0 * reach(kind, radius) + GAP > spacing {
        return None;
    }
    let rot = cx.angle();
    let grid = Grid::place(cx, rows, cols, spacing, angle, reach(kind, radius))?;
    let color = cx.random_color();
    let elements: Vec<Shape> = grid.points().into_iter().map(|p| cx.elem(kind, p, radius, rot, color)).collect();
    let layout = grid.layout((0..rows * cols).collect(), true);
    uniform_draft(cx, elements, color, Some(layout))
}

fn regular_row(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let fill = cx.real("fill");
    let angle = if cx.coin() { 0.0 } else { FRAC_PI_2 };
    let kind = cx.form();
    let spacing = max_spacing(1, count, angle, reach(kind, fill)) * cx.uniform(0.6, 1.0);
    let radius = (spacing * fill).min(0.1);
    let rot = cx.angle();
    let grid = Grid::place(cx, 1, count, spacing, angle, reach(kind, radius))?;
    let color = cx.random_color();
    let elements: Vec<Shape> = grid.points().into_iter().map(|p| cx.elem(kind, p, radius, rot, color)).collect();
    let layout = grid.layout((0..count).collect(), true);
    uniform_draft(cx, elements, color, Some(layout))
}

fn regular_rings(cx: &mut Ctx) -> Option<Draft> {
    let rings = cx.int("rings");
    let interval = cx.real("interval");
    let arc_gap = cx.real("arc_gap");
    let radius = interval * cx.real("fill");
    let kind = cx.form();
    let rot = cx.angle();
    let r = reach(kind, radius);
    let slack = 0.5 - MARGIN - rings as f64 * interval - r;
    if slack < 0.0 {
        return None;
    }
    let center = CENTER + Point::new(cx.uniform(-slack, slack), cx.uniform(-slack, slack));
    let color = cx.random_color();
    let mut elements = Vec::new();
    if cx.coin() {
        elements.push(cx.elem(kind, center, radius, rot, color));
    }
    for k in 1..=rings {
        let ring_radius = k as f64 * interval;
        let count = ((TAU * ring_radius / arc_gap).round() as usize).max(3);
        if 2.0 * ring_radius * (PI / count as f64).sin() < 2.0 * r + GAP {
            return None;
        }
        let phase = cx.angle();
        for i in 0..count {
            let a = phase + TAU * i as f64 / count as f64;
            elements.push(cx.elem(kind, center + Point::from_angle(a) * ring_radius, radius, rot, color));
        }
    }
    uniform_draft(cx, elements, color, Some(Layout::Rings { center, interval }))
}

// ---- rhythm: progressive ----

fn ordered(cx: &mut Ctx, n: usize) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..n).collect();
    if cx.coin() {
        seq.reverse();
    }
    seq
}

fn progressive_size(cx: &mut Ctx) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let n = rows * cols;
    let min_fill = cx.real("min_fill");
    let max_fill = cx.real("max_fill");
    let kind = cx.form();
    let spacing = max_spacing(rows, cols, 0.0, reach(kind, max_fill)) * cx.uniform(0.75, 1.0);
    if 2.0 * reach(kind, spacing * max_fill) + GAP > spacing {
        return None;
    }
    let rot = cx.angle();
    let grid = Grid::place(cx, rows, cols, spacing, 0.0, reach(kind, spacing * max_fill))?;
    let color = cx.random_color();
    let seq = ordered(cx, n);
    let pts = grid.points();
    let mut elements = Vec::with_capacity(n);
    for (i, p) in pts.into_iter().enumerate() {
        let rank = seq.iter().position(|&s| s == i)?;
        let fill = min_fill + (max_fill - min_fill) * rank as f64 / (n - 1) as f64;
        elements.push(cx.elem(kind, p, spacing * fill, rot, color));
    }
    let mut d = uniform_draft(cx, elements, color, Some(grid.layout((0..n).collect(), true)))?;
    d.truth.sequence = seq;
    Some(d)
}

/// Places `rel` offsets along a line and returns absolute positions.
fn place_row(cx: &mut Ctx, rel: &[Point], reach: f64) -> Option<Vec<Point>> {
    let origin = cx.place_points(rel, reach)?;
    Some(rel.iter().map(|&p| origin + p).collect())
}

fn progressive_spacing(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let radius = cx.real("radius");
    let ratio = cx.real("ratio");
    let angle = cx.real("axis_angle") + if cx.coin() { FRAC_PI_2 } else { 0.0 };
    let kind = cx.form();
    let r = reach(kind, radius);
    let first_gap = 2.0 * r + GAP + cx.uniform(0.0, 0.02);
    let dir = Point::from_angle(angle);
    let mut rel = vec![Point::default()];
    let mut gap = first_gap;
    for _ in 1..count {
        let last = *rel.last()?;
        rel.push(last + dir * gap);
        gap *= ratio;
    }
    let pts = place_row(cx, &rel, r)?;
    let rot = cx.angle();
    let color = cx.random_color();
    let seq = ordered(cx, count);
    let elements: Vec<Shape> = pts.into_iter().map(|p| cx.elem(kind, p, radius, rot, color)).collect();
    let mut d = uniform_draft(cx, elements, color, None)?;
    d.truth.sequence = seq;
    Some(d)
}

/// Side counts from triangle to near-circle.
const SIDE_LADDER: [u32; 11] = [3, 4, 5, 6, 7, 8, 10, 12, 16, 24, 48];

fn progressive_sides(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let fill = cx.real("fill");
    let angle = cx.real("axis_angle") + if cx.coin() { FRAC_PI_2 } else { 0.0 };
    // Consecutive rungs from a triangle or square, ending near a circle.
    let start = cx.index(2);
    let mut sides: Vec<u32> = SIDE_LADDER[start..start + count - 1].to_vec();
    sides.push(SIDE_LADDER[9 + cx.index(2)]);
    let spacing = max_spacing(1, count, angle, fill) * cx.uniform(0.8, 1.0);
    let radius = spacing * fill;
    let grid = Grid::place(cx, 1, count, spacing, angle, radius)?;
    let color = cx.random_color();
    let seq = ordered(cx, count);
    let rot = -FRAC_PI_2;
    let mut elements = Vec::with_capacity(count);
    for (i, p) in grid.points().into_iter().enumerate() {
        let rank = seq.iter().position(|&s| s == i)?;
        elements.push(cx.elem(ShapeKind::RegularPolygon { sides: sides[rank] }, p, radius, rot, color));
    }
    let mut d = uniform_draft(cx, elements, color, None)?;
    d.truth.sequence = seq;
    Some(d)
}

fn progressive_lightness(cx: &mut Ctx) -> Option<Draft> {
    let rows = cx.int("rows");
    let cols = cx.int("cols");
    let n = rows * cols;
    let fill = cx.real("fill");
    let step = cx.real("step").min(0.5 / (n - 1) as f64);
    let kind = cx.form();
    let spacing = max_spacing(rows, cols, 0.0, reach(kind, fill)) * cx.uniform(0.75, 1.0);
    let radius = spacing * fill;
    let rot = cx.angle();
    let grid = Grid::place(cx, rows, cols, spacing, 0.0, reach(kind, radius))?;
    let hue = cx.hue();
    let sat = cx.uniform(0.5, 0.9);
    let span = step * (n - 1) as f64;
    let l0 = cx.uniform(0.25, 0.8 - span);
    let seq = ordered(cx, n);
    let mut palette = Vec::with_capacity(n);
    let mut elements = Vec::with_capacity(n);
    for (i, p) in grid.points().into_iter().enumerate() {
        let rank = seq.iter().position(|&s| s == i)?;
        let c = Rgb8::from_hsl(Hsl { h: hue, s: sat, l: l0 + step * rank as f64 });
        palette.push(c);
        elements.push(cx.elem(kind, p, radius, rot, c));
    }
    let bg = cx.background(None, &palette)?;
    let mut t = truth(palette);
    t.sequence = seq;
    t.layout = Some(grid.layout((0..n).collect(), true));
    Some(Draft { background: bg, elements, truth: t })
}

// ---- rhythm: flowing ----

fn wavy_bands(cx: &mut Ctx) -> Option<Draft> {
    let bands = cx.int("bands");
    let amplitude = cx.real("amplitude");
    let waves = cx.real("waves");
    let thickness = cx.real("thickness");
    let angle = cx.real("axis_angle") + if cx.coin() { FRAC_PI_2 } else { 0.0 };
    let phase = cx.angle();
    let n_hues = cx.int("hues");
    let palette = cx.palette(n_hues)?;
    let bg = cx.background(None, &palette)?;
    let pitch = thickness + cx.uniform(0.02, 0.06);
    let half_length = cx.uniform(0.3, 0.42);
    let normal = Point::from_angle(angle + FRAC_PI_2);
    let shift = cx.uniform(-0.05, 0.05);
    let kind = ShapeKind::WavyBand { amplitude, waves, phase, thickness };
    let mut elements = Vec::with_capacity(bands);
    for k in 0..bands {
        let offset = (k as f64 - (bands - 1) as f64 / 2.0) * pitch + shift;
        let color = palette[k % palette.len()];
        let s = cx.elem(kind, CENTER + normal * offset, half_length, angle, color);
        if !s.bbox().dilate(0.01).inside_unit_square() {
            return None;
        }
        elements.push(s);
    }
    let mut t = truth(palette);
    t.sequence = (0..bands).collect();
    Some(Draft { background: bg, elements, truth: t })
}

fn sinusoid_path(cx: &mut Ctx) -> Option<Draft> {
    let count = cx.int("count");
    let amplitude = cx.real("amplitude");
    let periods = cx.real("periods");
    let angle = cx.real("axis_angle") + if cx.coin() { FRAC_PI_2 } else { 0.0 };
    let length = cx.uniform(0.65, 0.8);
    let wavelength = length / periods;
    let phase = cx.angle();
    let step = length / (count - 1) as f64;
    let radius = step * cx.real("fill");
    let kind = cx.form();
    let dir = Point::from_angle(angle);
    let normal = dir.rotated(FRAC_PI_2);
    let rel: Vec<Point> = (0..count)
        .map(|i| {
            let t = i as f64 * step;
            dir * t + normal * (amplitude * (TAU * t / wavelength + phase).sin())
        })
        .collect();
    let offset = cx.place_points(&rel, reach(kind, radius))?;
    let color = cx.random_color();
    let rot = cx.angle();
    let elements: Vec<Shape> = rel.iter().map(|&p| cx.elem(kind, offset + p, radius, rot, color)).collect();
    if !all_clear(&elements) {
        return None;
    }
    let layout = Layout::Sinusoid { origin: offset, angle, amplitude, wavelength, phase };
    let mut d = uniform_draft(cx, elements, color, Some(layout))?;
    d.truth.sequence = (0..count).collect();
    Some(d)
}
