//! The rule catalog: 32 parameterized design rules grouped into nine classes.

use super::SubVdp;
use crate::{Error, Result};

/// A named sampling range. Integer parameters are sampled inclusively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSpec {
    pub id: u8,
    pub sub_vdp: SubVdp,
    pub summary: &'static str,
    pub params: &'static [ParamDomain],
}

impl RuleSpec {
    /// Looks up a parameter domain. Builders only ask for names declared in
    /// this catalog; a miss is a programming error.
    pub fn domain(&self, name: &str) -> ParamDomain {
        match self.params.iter().find(|p| p.name == name) {
            Some(p) => *p,
            None => panic!("rule {} has no parameter {name:?}", self.id),
        }
    }
}

const fn p(name: &'static str, min: f64, max: f64) -> ParamDomain {
    ParamDomain { name, min, max }
}

const fn rule(id: u8, sub_vdp: SubVdp, summary: &'static str, params: &'static [ParamDomain]) -> RuleSpec {
    RuleSpec { id, sub_vdp, summary, params }
}

use SubVdp::*;

const GRID_COLOR: &[ParamDomain] = &[
    p("rows", 3.0, 4.0),
    p("cols", 3.0, 4.0),
    p("spacing", 0.1, 0.14),
    p("fill", 0.34, 0.44),
    p("grid_angle", -0.6, 0.6),
    p("hue_gap", 70.0, 180.0),
];

const GRID_SHAPE: &[ParamDomain] = &[
    p("rows", 2.0, 4.0),
    p("cols", 2.0, 4.0),
    p("spacing", 0.12, 0.2),
    p("fill", 0.2, 0.25),
    p("grid_angle", -0.6, 0.6),
    p("outlier_scale", 2.2, 2.6),
    p("lightness_shift", 0.2, 0.3),
];

pub static RULES: [RuleSpec; 32] = [
    rule(1, Color, "single element with a distinct hue on a uniform ground", &[
        p("radius", 0.08, 0.2),
        p("hue_gap", 70.0, 180.0),
    ]),
    rule(2, Color, "grid of same-hue elements with exactly one hue outlier", GRID_COLOR),
    rule(3, Isolation, "compact grid with one element placed far off-grid", &[
        p("rows", 2.0, 4.0),
        p("cols", 2.0, 4.0),
        p("spacing", 0.08, 0.12),
        p("fill", 0.25, 0.35),
        p("grid_angle", -0.6, 0.6),
        p("isolation", 3.3, 5.0),
    ]),
    rule(4, Isolation, "canvas-wide grid with a hole holding one element", &[
        p("spacing", 0.07, 0.09),
        p("fill", 0.22, 0.32),
        p("hole", 3.3, 3.6),
    ]),
    rule(5, Isolation, "lone element opposite a loose swarm", &[
        p("count", 8.0, 16.0),
        p("radius", 0.02, 0.035),
        p("swarm_radius", 0.12, 0.2),
        p("isolation", 3.3, 5.0),
    ]),
    rule(6, Isolation, "row of elements along an axis with one element beyond it", &[
        p("count", 5.0, 8.0),
        p("spacing", 0.08, 0.11),
        p("fill", 0.25, 0.35),
        p("axis_angle", -0.6, 0.6),
        p("isolation", 3.4, 4.5),
    ]),
    rule(7, Shape, "colour-matched grid with one element of a different polygon", GRID_SHAPE),
    rule(8, Shape, "colour-matched scatter with one element at least twice the size", &[
        p("count", 5.0, 9.0),
        p("radius", 0.035, 0.06),
        p("outlier_scale", 2.2, 3.0),
    ]),
    rule(9, Shape, "grid layout with a scale outlier carrying a lightness cue", GRID_SHAPE),
    rule(10, Shape, "grid layout with a form outlier carrying a lightness cue", GRID_SHAPE),
    rule(11, Symmetric, "mirror symmetry about the vertical or horizontal center line", &[
        p("pairs", 2.0, 5.0),
        p("on_axis", 0.0, 2.0),
        p("radius", 0.04, 0.12),
        p("hues", 1.0, 3.0),
    ]),
    rule(12, Symmetric, "mirror symmetry about an oblique axis through the center", &[
        p("pairs", 2.0, 5.0),
        p("on_axis", 0.0, 2.0),
        p("radius", 0.04, 0.11),
        p("hues", 1.0, 3.0),
        p("axis_angle", 0.25, 2.89),
    ]),
    rule(13, Asymmetric, "few large elements balanced by many small ones", &[
        p("large_count", 1.0, 2.0),
        p("large_radius", 0.1, 0.16),
        p("large_offset", 0.12, 0.22),
        p("small_count", 5.0, 9.0),
        p("small_radius", 0.025, 0.045),
    ]),
    rule(14, Asymmetric, "big element near the center balanced by small far ones", &[
        p("big_radius", 0.14, 0.2),
        p("big_offset", 0.06, 0.14),
        p("small_count", 1.0, 2.0),
        p("small_radius", 0.035, 0.06),
    ]),
    rule(15, Asymmetric, "high-contrast small element balanced by low-contrast large ones", &[
        p("strong_radius", 0.06, 0.09),
        p("strong_offset", 0.05, 0.15),
        p("weak_count", 1.0, 2.0),
        p("weak_radius", 0.1, 0.14),
    ]),
    rule(16, Asymmetric, "unequal groups split along a diagonal", &[
        p("a_count", 2.0, 4.0),
        p("a_radius", 0.04, 0.1),
        p("a_offset", 0.18, 0.25),
        p("b_count", 1.0, 3.0),
        p("b_radius", 0.05, 0.12),
    ]),
    rule(17, Asymmetric, "dense cluster against a single element across a void", &[
        p("cluster_count", 6.0, 12.0),
        p("cluster_radius", 0.018, 0.03),
        p("cluster_offset", 0.2, 0.3),
        p("single_radius", 0.05, 0.09),
    ]),
    rule(18, Asymmetric, "two interlocking masses of unequal size with counter-coloured eyes", &[
        p("major_radius", 0.2, 0.26),
        p("major_offset", 0.08, 0.13),
        p("minor_scale", 0.75, 0.95),
    ]),
    rule(19, Crystallographic, "allover random scatter with colour and form variation", &[
        p("per_quadrant", 6.0, 10.0),
        p("radius", 0.025, 0.05),
        p("hues", 2.0, 4.0),
    ]),
    rule(20, Crystallographic, "jittered canvas-wide grid with colour variation", &[
        p("cells", 2.0, 4.0),
        p("fill", 0.22, 0.28),
        p("jitter", 0.0, 0.15),
        p("hues", 2.0, 4.0),
    ]),
    rule(21, Crystallographic, "mosaic of mixed forms over the whole canvas", &[
        p("cells", 2.0, 4.0),
        p("fill", 0.3, 0.4),
        p("hues", 2.0, 4.0),
    ]),
    rule(22, Crystallographic, "packed patches tiling the canvas", &[
        p("cells", 2.0, 3.0),
        p("hues", 2.0, 4.0),
    ]),
    rule(23, Regular, "axis-aligned square grid of identical elements", &[
        p("rows", 3.0, 7.0),
        p("cols", 3.0, 7.0),
        p("fill", 0.2, 0.35),
    ]),
    rule(24, Regular, "rotated grid of identical elements", &[
        p("rows", 3.0, 6.0),
        p("cols", 3.0, 6.0),
        p("fill", 0.2, 0.35),
        p("grid_angle", 0.25, 1.3),
    ]),
    rule(25, Regular, "single row or column repeated at a fixed interval", &[
        p("count", 4.0, 9.0),
        p("fill", 0.2, 0.35),
    ]),
    rule(26, Regular, "concentric rings at a fixed radial interval", &[
        p("rings", 2.0, 3.0),
        p("interval", 0.1, 0.14),
        p("arc_gap", 0.08, 0.12),
        p("fill", 0.2, 0.3),
    ]),
    rule(27, Progressive, "size growing monotonically along a grid", &[
        p("rows", 1.0, 3.0),
        p("cols", 4.0, 7.0),
        p("min_fill", 0.16, 0.2),
        p("max_fill", 0.38, 0.45),
    ]),
    rule(28, Progressive, "spacing growing monotonically along a row", &[
        p("count", 5.0, 7.0),
        p("radius", 0.045, 0.065),
        p("ratio", 1.2, 1.45),
        p("axis_angle", -0.6, 0.6),
    ]),
    rule(29, Progressive, "polygon gradually turning into a circle", &[
        p("count", 5.0, 6.0),
        p("fill", 0.34, 0.42),
        p("axis_angle", -0.6, 0.6),
    ]),
    rule(30, Progressive, "lightness ramp over identical elements", &[
        p("rows", 1.0, 2.0),
        p("cols", 5.0, 7.0),
        p("fill", 0.25, 0.38),
        p("step", 0.06, 0.09),
    ]),
    rule(31, Flowing, "parallel wavy bands", &[
        p("bands", 3.0, 6.0),
        p("amplitude", 0.03, 0.07),
        p("waves", 1.0, 3.0),
        p("thickness", 0.03, 0.06),
        p("axis_angle", -0.5, 0.5),
        p("hues", 1.0, 3.0),
    ]),
    rule(32, Flowing, "elements strung along a sinusoidal path", &[
        p("count", 7.0, 12.0),
        p("amplitude", 0.12, 0.2),
        p("periods", 1.0, 2.0),
        p("axis_angle", -0.4, 0.4),
        p("fill", 0.25, 0.4),
    ]),
];

pub fn rule_spec(id: u8) -> Result<&'static RuleSpec> {
    if (1..=32).contains(&id) {
        Ok(&RULES[id as usize - 1])
    } else {
        Err(Error::UnknownRule(id))
    }
}

/// Rule ids belonging to one class, ascending.
pub fn rules_for(class: SubVdp) -> impl Iterator<Item = u8> {
    RULES.iter().filter(move |r| r.sub_vdp == class).map(|r| r.id)
}
