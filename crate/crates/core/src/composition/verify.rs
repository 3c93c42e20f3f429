//! Rule verification: checks a composition against its label's predicate and
//! the shared invariants (canvas bounds, overlap policy, palette, contrast).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, TAU};
use core::fmt;

use serde::Serialize;

use super::{rule_spec, Composition, Layout, SubVdp};
use crate::color::hue_distance;
use crate::geometry::{Axis, Point, Shape, ShapeKind};

/// Minimum lightness difference between any element and the ground.
pub const FIGURE_GROUND_MIN: f64 = 0.15;
/// Minimum hue distance (degrees) of a colour outlier.
pub const HUE_OUTLIER_MIN: f64 = 60.0;
const ISOLATION_RATIO: f64 = 3.0;
const BALANCE_RATIO: f64 = 0.1;
const QUADRANT_TOLERANCE: f64 = 0.25;
const SCALE_OUTLIER_MIN: f64 = 2.0;
/// Hue agreement (degrees) for elements that must read as the same colour.
const HUE_MATCH: f64 = 15.0;
const POSITION_TOL: f64 = 1e-6;
const FORM_TOL: f64 = 1e-9;
const CENTER: Point = Point::new(0.5, 0.5);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    UnknownRule { rule: u8 },
    LabelMismatch { expected: SubVdp, actual: SubVdp },
    ElementCount { declared: usize, actual: usize },
    DanglingAnnotation { index: usize },
    MissingAnnotation { field: &'static str },
    OutsideCanvas { index: usize },
    Overlap { first: usize, second: usize },
    OffPalette { index: usize },
    FigureGround { index: usize },
    TooFewElements,
    NoDistinctColor,
    NotIsolated,
    FormMismatch { index: usize },
    NoDistinctForm,
    MissingColorCue,
    BrokenMirrorPair { index: usize },
    Unbalanced { ratio: f64 },
    AccidentalSymmetry,
    QuadrantImbalance { deviation: f64 },
    Uniform,
    OffLattice { index: usize },
    IncompleteLattice,
    NotMonotone { position: usize },
    NotParallel { index: usize },
    OffPath { index: usize },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::UnknownRule { .. } => "unknown-rule",
            Violation::LabelMismatch { .. } => "label-mismatch",
            Violation::ElementCount { .. } => "element-count",
            Violation::DanglingAnnotation { .. } => "dangling-annotation",
            Violation::MissingAnnotation { .. } => "missing-annotation",
            Violation::OutsideCanvas { .. } => "outside-canvas",
            Violation::Overlap { .. } => "overlap",
            Violation::OffPalette { .. } => "off-palette",
            Violation::FigureGround { .. } => "figure-ground",
            Violation::TooFewElements => "too-few-elements",
            Violation::NoDistinctColor => "no-distinct-color",
            Violation::NotIsolated => "not-isolated",
            Violation::FormMismatch { .. } => "form-mismatch",
            Violation::NoDistinctForm => "no-distinct-form",
            Violation::MissingColorCue => "missing-color-cue",
            Violation::BrokenMirrorPair { .. } => "broken-mirror-pair",
            Violation::Unbalanced { .. } => "unbalanced",
            Violation::AccidentalSymmetry => "accidental-symmetry",
            Violation::QuadrantImbalance { .. } => "quadrant-imbalance",
            Violation::Uniform => "uniform",
            Violation::OffLattice { .. } => "off-lattice",
            Violation::IncompleteLattice => "incomplete-lattice",
            Violation::NotMonotone { .. } => "not-monotone",
            Violation::NotParallel { .. } => "not-parallel",
            Violation::OffPath { .. } => "off-path",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `area * (1 + 2|ΔL|)` against a ground of lightness `background_lightness`.
pub fn visual_weight(shape: &Shape, background_lightness: f64) -> f64 {
    let dl = (shape.fill.base_color().lightness() - background_lightness).abs();
    shape.area() * (1.0 + 2.0 * dl)
}

/// All violations; empty means the composition satisfies its rule.
pub fn verify(comp: &Composition) -> Vec<Violation> {
    let spec = match rule_spec(comp.rule_id) {
        Ok(s) => s,
        Err(_) => return vec![Violation::UnknownRule { rule: comp.rule_id }],
    };
    let mut out = Vec::new();
    if comp.label != spec.sub_vdp {
        out.push(Violation::LabelMismatch { expected: spec.sub_vdp, actual: comp.label });
    }
    let n = comp.elements.len();
    if comp.truth.element_count != n {
        out.push(Violation::ElementCount { declared: comp.truth.element_count, actual: n });
    }
    if let Some(index) = dangling(comp) {
        out.push(Violation::DanglingAnnotation { index });
        return out;
    }
    for (i, e) in comp.elements.iter().enumerate() {
        if !e.inside_canvas() {
            out.push(Violation::OutsideCanvas { index: i });
        }
    }
    if !matches!(comp.rule_id, 18 | 22) {
        if let Some((first, second)) = first_overlap(&comp.elements) {
            out.push(Violation::Overlap { first, second });
        }
    }
    let bgl = comp.background.base_color().lightness();
    for (i, e) in comp.elements.iter().enumerate() {
        let c = e.fill.base_color();
        if !comp.truth.palette.contains(&c) {
            out.push(Violation::OffPalette { index: i });
        }
        if (c.lightness() - bgl).abs() < FIGURE_GROUND_MIN {
            out.push(Violation::FigureGround { index: i });
        }
    }
    match spec.sub_vdp {
        SubVdp::Color => check_color(comp, &mut out),
        SubVdp::Isolation => check_isolation(comp, &mut out),
        SubVdp::Shape => check_shape(comp, &mut out),
        SubVdp::Symmetric => check_symmetric(comp, &mut out),
        SubVdp::Asymmetric => check_asymmetric(comp, &mut out),
        SubVdp::Crystallographic => check_crystallographic(comp, &mut out),
        SubVdp::Regular => check_regular(comp, &mut out),
        SubVdp::Progressive => check_progressive(comp, &mut out),
        SubVdp::Flowing => check_flowing(comp, &mut out),
    }
    out
}

fn dangling(comp: &Composition) -> Option<usize> {
    let n = comp.elements.len();
    let t = &comp.truth;
    let mut indices: Vec<usize> = t.sequence.clone();
    indices.extend(t.emphasized);
    if let Some(Layout::Lattice { members, .. }) = &t.layout {
        indices.extend(members.iter().copied());
    }
    indices.into_iter().find(|&i| i >= n)
}

// ---- geometry helpers ----

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Exact polygon-outline overlap test with a bounding-circle prefilter.
pub(crate) fn shapes_overlap(a: &Shape, b: &Shape) -> bool {
    if a.center.distance(b.center) >= a.bounding_radius() + b.bounding_radius() {
        return false;
    }
    let pa = a.outline();
    let pb = b.outline();
    for i in 0..pa.len() {
        let (a1, a2) = (pa[i], pa[(i + 1) % pa.len()]);
        for j in 0..pb.len() {
            if segments_intersect(a1, a2, pb[j], pb[(j + 1) % pb.len()]) {
                return true;
            }
        }
    }
    point_in_polygon(pa[0], &pb) || point_in_polygon(pb[0], &pa)
}

fn first_overlap(shapes: &[Shape]) -> Option<(usize, usize)> {
    for i in 0..shapes.len() {
        for j in i + 1..shapes.len() {
            if shapes_overlap(&shapes[i], &shapes[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn same_kind(a: &Shape, b: &Shape) -> bool {
    match (a.kind, b.kind) {
        (ShapeKind::RegularPolygon { sides: x }, ShapeKind::RegularPolygon { sides: y }) => x == y,
        (ShapeKind::Ellipse { aspect: x }, ShapeKind::Ellipse { aspect: y }) => (x - y).abs() <= FORM_TOL,
        (ShapeKind::WavyBand { .. }, ShapeKind::WavyBand { .. }) => a.same_form(b, FORM_TOL),
        _ => false,
    }
}

/// Rotational period of a shape's outline.
fn rotation_period(s: &Shape) -> Option<f64> {
    match s.kind {
        ShapeKind::RegularPolygon { sides } => Some(TAU / sides as f64),
        ShapeKind::Ellipse { aspect } if (aspect - 1.0).abs() <= FORM_TOL => None,
        ShapeKind::Ellipse { .. } => Some(PI),
        ShapeKind::WavyBand { .. } => Some(TAU),
    }
}

fn angle_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

fn same_orientation(a: &Shape, b: &Shape, tol: f64) -> bool {
    let rotations = match rotation_period(a) {
        None => true,
        Some(period) => angle_diff(a.rotation, b.rotation, period) <= tol,
    };
    let phases = match (a.kind, b.kind) {
        (ShapeKind::WavyBand { phase: p, .. }, ShapeKind::WavyBand { phase: q, .. }) => angle_diff(p, q, TAU) <= tol,
        _ => true,
    };
    rotations && phases
}

/// Elements left without a mirror partner across `axis`.
fn unmatched_mirror(elements: &[Shape], axis: &Axis, pos_tol: f64, form_tol: f64, angle_tol: f64) -> Vec<usize> {
    let mut used = vec![false; elements.len()];
    let mut unmatched = Vec::new();
    for i in 0..elements.len() {
        if used[i] {
            continue;
        }
        let m = elements[i].mirrored(axis);
        let partner = (0..elements.len()).find(|&j| {
            let b = &elements[j];
            (!used[j] || j == i)
                && m.center.distance(b.center) <= pos_tol
                && m.same_form(b, form_tol)
                && m.fill.base_color() == b.fill.base_color()
                && same_orientation(&m, b, angle_tol)
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => unmatched.push(i),
        }
    }
    unmatched
}

fn group_matches(comp: &Composition, group: &[usize], out: &mut Vec<Violation>) {
    let Some(&first) = group.first() else { return };
    let reference = &comp.elements[first];
    for &i in &group[1..] {
        let e = &comp.elements[i];
        if !e.same_form(reference, FORM_TOL) || e.fill.base_color() != reference.fill.base_color() {
            out.push(Violation::FormMismatch { index: i });
        }
    }
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

fn emphasized(comp: &Composition, out: &mut Vec<Violation>) -> Option<usize> {
    if comp.truth.emphasized.is_none() {
        out.push(Violation::MissingAnnotation { field: "emphasized" });
    }
    comp.truth.emphasized
}

// ---- emphasis ----

fn check_color(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(e) = emphasized(comp, out) else { return };
    let hues: Vec<f64> = comp.elements.iter().map(|s| s.fill.base_color().hue()).collect();
    if hues.len() == 1 {
        let ground = comp.background.base_color().hue();
        if hue_distance(hues[0], ground) < HUE_OUTLIER_MIN {
            out.push(Violation::NoDistinctColor);
        }
        return;
    }
    let outliers: Vec<usize> = (0..hues.len())
        .filter(|&i| (0..hues.len()).all(|j| j == i || hue_distance(hues[i], hues[j]) >= HUE_OUTLIER_MIN))
        .collect();
    if outliers != [e] {
        out.push(Violation::NoDistinctColor);
    }
}

fn check_isolation(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(e) = emphasized(comp, out) else { return };
    let others: Vec<usize> = (0..comp.elements.len()).filter(|&i| i != e).collect();
    if others.len() < 2 {
        out.push(Violation::TooFewElements);
        return;
    }
    let mut group = vec![e];
    group.extend(&others);
    group_matches(comp, &group, out);
    let pts: Vec<Point> = others.iter().map(|&i| comp.elements[i].center).collect();
    let lone = comp.elements[e].center;
    let nearest = pts.iter().map(|p| p.distance(lone)).fold(f64::INFINITY, f64::min);
    if nearest < ISOLATION_RATIO * max_nearest_neighbor(&pts) {
        out.push(Violation::NotIsolated);
    }
    if let Some(layout) = &comp.truth.layout {
        check_layout(comp, layout, out);
    }
}

fn check_shape(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(e) = emphasized(comp, out) else { return };
    let others: Vec<usize> = (0..comp.elements.len()).filter(|&i| i != e).collect();
    if others.len() < 2 {
        out.push(Violation::TooFewElements);
        return;
    }
    group_matches(comp, &others, out);
    let odd = &comp.elements[e];
    let base = &comp.elements[others[0]];
    let distinct = if same_kind(odd, base) {
        let ratio = odd.radius.max(base.radius) / odd.radius.min(base.radius);
        ratio >= SCALE_OUTLIER_MIN
    } else {
        true
    };
    if !distinct {
        out.push(Violation::NoDistinctForm);
    }
    let (a, b) = (odd.fill.base_color(), base.fill.base_color());
    if matches!(comp.rule_id, 9 | 10) {
        let hue_ok = hue_distance(a.hue(), b.hue()) <= HUE_MATCH;
        if !hue_ok || (a.lightness() - b.lightness()).abs() < FIGURE_GROUND_MIN {
            out.push(Violation::MissingColorCue);
        }
    } else if a != b {
        out.push(Violation::FormMismatch { index: e });
    }
}

// ---- balance ----

fn check_symmetric(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(axis) = comp.truth.axis else {
        out.push(Violation::MissingAnnotation { field: "axis" });
        return;
    };
    if comp.elements.len() < 2 {
        out.push(Violation::TooFewElements);
    }
    for index in unmatched_mirror(&comp.elements, &axis, POSITION_TOL, FORM_TOL, POSITION_TOL) {
        out.push(Violation::BrokenMirrorPair { index });
    }
}

/// `|Σ w (c - o)| / Σ w |c - o|` about the canvas center.
pub(crate) fn balance_ratio(comp: &Composition) -> Option<f64> {
    let bgl = comp.background.base_color().lightness();
    let mut moment = Point::default();
    let mut spread = 0.0;
    for s in &comp.elements {
        let w = visual_weight(s, bgl);
        let d = s.center - CENTER;
        moment = moment + d * w;
        spread += w * d.norm();
    }
    (spread > 1e-12).then(|| moment.norm() / spread)
}

fn check_asymmetric(comp: &Composition, out: &mut Vec<Violation>) {
    if comp.elements.len() < 2 {
        out.push(Violation::TooFewElements);
        return;
    }
    match balance_ratio(comp) {
        Some(ratio) if ratio <= BALANCE_RATIO => {}
        Some(ratio) => out.push(Violation::Unbalanced { ratio }),
        None => out.push(Violation::Unbalanced { ratio: f64::NAN }),
    }
    if near_symmetric(&comp.elements) {
        out.push(Violation::AccidentalSymmetry);
    }
}

/// Whether the elements read as mirror-symmetric about the vertical,
/// horizontal or diagonal center lines.
pub(crate) fn near_symmetric(elements: &[Shape]) -> bool {
    let axes = [
        Axis::vertical(0.5),
        Axis::horizontal(0.5),
        Axis::from_angle(CENTER, FRAC_PI_4),
        Axis::from_angle(CENTER, 3.0 * FRAC_PI_4),
    ];
    axes.iter().any(|a| unmatched_mirror(elements, a, 0.02, 0.02, 0.05).is_empty())
}

fn check_crystallographic(comp: &Composition, out: &mut Vec<Violation>) {
    let mut sums = [0.0f64; 4];
    for s in &comp.elements {
        let q = (s.center.x >= 0.5) as usize + 2 * (s.center.y >= 0.5) as usize;
        sums[q] += s.area();
    }
    let mean = sums.iter().sum::<f64>() / 4.0;
    let deviation = if mean > 0.0 { sums.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max) } else { 1.0 };
    if deviation > QUADRANT_TOLERANCE {
        out.push(Violation::QuadrantImbalance { deviation });
    }
    let first = comp.elements.first();
    let varied = first.is_some_and(|f| {
        comp.elements.iter().any(|e| e.fill.base_color() != f.fill.base_color() || !same_kind(e, f))
    });
    if !varied {
        out.push(Violation::Uniform);
    }
}

// ---- rhythm ----

fn check_layout(comp: &Composition, layout: &Layout, out: &mut Vec<Violation>) {
    match layout {
        Layout::Lattice { origin, u, v, rows, cols, members, complete } => {
            let det = u.x * v.y - u.y * v.x;
            if det.abs() < 1e-12 {
                out.push(Violation::OffLattice { index: members.first().copied().unwrap_or(0) });
                return;
            }
            let mut seen = vec![false; rows * cols];
            for &m in members {
                let p = comp.elements[m].center - *origin;
                let col = (p.x * v.y - p.y * v.x) / det;
                let row = (u.x * p.y - u.y * p.x) / det;
                let (ci, ri) = (col.round(), row.round());
                let on_site = (col - ci).abs() <= POSITION_TOL
                    && (row - ri).abs() <= POSITION_TOL
                    && ci >= 0.0
                    && ri >= 0.0
                    && (ci as usize) < *cols
                    && (ri as usize) < *rows;
                if !on_site {
                    out.push(Violation::OffLattice { index: m });
                    continue;
                }
                let site = ri as usize * cols + ci as usize;
                if seen[site] {
                    out.push(Violation::OffLattice { index: m });
                }
                seen[site] = true;
            }
            if *complete && seen.iter().any(|s| !s) {
                out.push(Violation::IncompleteLattice);
            }
        }
        Layout::Rings { center, interval } => check_rings(comp, *center, *interval, out),
        Layout::Sinusoid { .. } => check_sinusoid(comp, layout, out),
    }
}

fn check_rings(comp: &Composition, center: Point, interval: f64, out: &mut Vec<Violation>) {
    if !(interval > 0.0) {
        out.push(Violation::OffLattice { index: 0 });
        return;
    }
    let mut rings: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, e) in comp.elements.iter().enumerate() {
        let d = e.center - center;
        let k = d.norm() / interval;
        let ki = k.round();
        if (k - ki).abs() > POSITION_TOL {
            out.push(Violation::OffLattice { index: i });
            continue;
        }
        let ring = ki as usize;
        let angle = d.y.atan2(d.x).rem_euclid(TAU);
        match rings.iter_mut().find(|(r, _)| *r == ring) {
            Some((_, angles)) => angles.push(angle),
            None => rings.push((ring, vec![angle])),
        }
    }
    if rings.iter().filter(|(r, _)| *r > 0).count() < 2 {
        out.push(Violation::TooFewElements);
    }
    for (ring, angles) in &mut rings {
        if *ring == 0 {
            if angles.len() > 1 {
                out.push(Violation::OffLattice { index: 0 });
            }
            continue;
        }
        if angles.len() < 3 {
            out.push(Violation::IncompleteLattice);
            continue;
        }
        angles.sort_by(|a, b| a.total_cmp(b));
        let expected = TAU / angles.len() as f64;
        let n = angles.len();
        for i in 0..n {
            let gap = (angles[(i + 1) % n] - angles[i]).rem_euclid(TAU);
            if (gap - expected).abs() > 1e-6 {
                out.push(Violation::IncompleteLattice);
                break;
            }
        }
    }
}

fn check_regular(comp: &Composition, out: &mut Vec<Violation>) {
    let n = comp.elements.len();
    if n < 3 {
        out.push(Violation::TooFewElements);
        return;
    }
    let all: Vec<usize> = (0..n).collect();
    group_matches(comp, &all, out);
    let first = &comp.elements[0];
    for (i, e) in comp.elements.iter().enumerate().skip(1) {
        if !same_orientation(first, e, POSITION_TOL) {
            out.push(Violation::FormMismatch { index: i });
        }
    }
    match &comp.truth.layout {
        Some(layout @ Layout::Lattice { members, .. }) => {
            if members.len() != n {
                out.push(Violation::IncompleteLattice);
            }
            check_layout(comp, layout, out);
        }
        Some(layout @ Layout::Rings { .. }) => check_layout(comp, layout, out),
        _ => out.push(Violation::MissingAnnotation { field: "layout" }),
    }
}

/// Index of the first step that breaks strict monotonicity by at least `margin`.
fn first_non_monotone(values: &[f64], margin: f64) -> Option<usize> {
    if values.len() < 2 {
        return Some(0);
    }
    let rising = values[1] > values[0];
    values.windows(2).position(|w| {
        let step = if rising { w[1] - w[0] } else { w[0] - w[1] };
        step < margin
    })
}

/// `sequence` must list every element exactly once.
fn sequence_elements<'a>(comp: &'a Composition, out: &mut Vec<Violation>) -> Option<Vec<&'a Shape>> {
    let seq = &comp.truth.sequence;
    let n = comp.elements.len();
    let mut seen = vec![false; n];
    for &i in seq {
        if seen[i] {
            out.push(Violation::DanglingAnnotation { index: i });
            return None;
        }
        seen[i] = true;
    }
    if seq.is_empty() || seen.iter().any(|s| !s) {
        out.push(Violation::MissingAnnotation { field: "sequence" });
        return None;
    }
    Some(seq.iter().map(|&i| &comp.elements[i]).collect())
}

fn check_progressive(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(seq) = sequence_elements(comp, out) else { return };
    if seq.len() < 3 {
        out.push(Violation::TooFewElements);
        return;
    }
    let base = seq[0];
    let same_color = |e: &Shape| e.fill.base_color() == base.fill.base_color();
    let values: Vec<f64> = match comp.rule_id {
        27 => {
            for (i, e) in seq.iter().enumerate() {
                if !same_kind(e, base) || !same_color(e) {
                    out.push(Violation::FormMismatch { index: comp.truth.sequence[i] });
                }
            }
            seq.iter().map(|e| e.radius).collect()
        }
        28 => {
            for (i, e) in seq.iter().enumerate() {
                if !e.same_form(base, FORM_TOL) || !same_color(e) {
                    out.push(Violation::FormMismatch { index: comp.truth.sequence[i] });
                }
            }
            let (a, b) = (seq[0].center, seq[seq.len() - 1].center);
            let len = a.distance(b);
            for (i, e) in seq.iter().enumerate() {
                if len <= 0.0 || orient(a, b, e.center).abs() / len > POSITION_TOL {
                    out.push(Violation::OffPath { index: comp.truth.sequence[i] });
                }
            }
            seq.windows(2).map(|w| w[0].center.distance(w[1].center)).collect()
        }
        29 => {
            let mut sides = Vec::with_capacity(seq.len());
            for (i, e) in seq.iter().enumerate() {
                let radius_ok = (e.radius - base.radius).abs() <= FORM_TOL;
                match e.kind {
                    ShapeKind::RegularPolygon { sides: s } if radius_ok && same_color(e) => sides.push(s as f64),
                    _ => out.push(Violation::FormMismatch { index: comp.truth.sequence[i] }),
                }
            }
            sides
        }
        _ => {
            let hue = base.fill.base_color().hue();
            for (i, e) in seq.iter().enumerate() {
                let hue_ok = hue_distance(e.fill.base_color().hue(), hue) <= HUE_MATCH;
                if !e.same_form(base, FORM_TOL) || !hue_ok {
                    out.push(Violation::FormMismatch { index: comp.truth.sequence[i] });
                }
            }
            seq.iter().map(|e| e.fill.base_color().lightness()).collect()
        }
    };
    let margin = match comp.rule_id {
        27 => 1e-3,
        28 => 1e-3,
        29 => 1.0,
        _ => 0.02,
    };
    if let Some(position) = first_non_monotone(&values, margin) {
        out.push(Violation::NotMonotone { position });
    }
    if let Some(layout) = &comp.truth.layout {
        check_layout(comp, layout, out);
    }
}

fn check_sinusoid(comp: &Composition, layout: &Layout, out: &mut Vec<Violation>) {
    let Layout::Sinusoid { origin, angle, amplitude, wavelength, phase } = *layout else { return };
    if !(wavelength > 0.0) {
        out.push(Violation::OffPath { index: 0 });
        return;
    }
    let dir = Point::from_angle(angle);
    let normal = dir.rotated(core::f64::consts::FRAC_PI_2);
    let mut ts = Vec::with_capacity(comp.elements.len());
    for (i, e) in comp.elements.iter().enumerate() {
        let t = (e.center - origin).dot(dir);
        let expected = origin + dir * t + normal * (amplitude * (TAU * t / wavelength + phase).sin());
        if expected.distance(e.center) > POSITION_TOL {
            out.push(Violation::OffPath { index: i });
        }
        ts.push(t);
    }
    let span = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ts.iter().copied().fold(f64::INFINITY, f64::min);
    if amplitude.abs() < 0.05 || span < 0.99 * wavelength {
        out.push(Violation::OffPath { index: 0 });
    }
}

fn check_flowing(comp: &Composition, out: &mut Vec<Violation>) {
    let Some(seq) = sequence_elements(comp, out) else { return };
    if comp.rule_id == 31 {
        if seq.len() < 2 {
            out.push(Violation::TooFewElements);
            return;
        }
        let base = seq[0];
        for (i, e) in seq.iter().enumerate() {
            let parallel = match (e.kind, base.kind) {
                (
                    ShapeKind::WavyBand { amplitude, .. },
                    ShapeKind::WavyBand { .. },
                ) => amplitude.abs() >= 0.02
                    && e.same_form(base, FORM_TOL)
                    && same_orientation(e, base, POSITION_TOL)
                    && (e.rotation - base.rotation).abs() <= POSITION_TOL,
                _ => false,
            };
            if !parallel {
                out.push(Violation::NotParallel { index: comp.truth.sequence[i] });
            }
        }
        return;
    }
    if seq.len() < 5 {
        out.push(Violation::TooFewElements);
        return;
    }
    let group: Vec<usize> = comp.truth.sequence.clone();
    group_matches(comp, &group, out);
    match &comp.truth.layout {
        Some(layout @ Layout::Sinusoid { origin, angle, .. }) => {
            check_sinusoid(comp, layout, out);
            let dir = Point::from_angle(*angle);
            let ts: Vec<f64> = seq.iter().map(|e| (e.center - *origin).dot(dir)).collect();
            if let Some(position) = first_non_monotone(&ts, 1e-6) {
                out.push(Violation::NotMonotone { position });
            }
        }
        _ => out.push(Violation::MissingAnnotation { field: "layout" }),
    }
}
