use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdp_core::color::Rgb8;
use vdp_core::composition::{generate, rule_spec, verify, Composition, Style, SubVdp};
use vdp_core::raster::render;

const SEEDS: u64 = 100;

#[test]
fn every_rule_verifies_for_a_hundred_seeds() {
    for rule in 1..=32u8 {
        for seed in 0..SEEDS {
            let comp = generate(rule, seed, Style::Sdv1).unwrap();
            let v = verify(&comp);
            assert!(v.is_empty(), "rule {rule} seed {seed}: {v:?}");
        }
    }
}

#[test]
fn textured_compositions_verify_too() {
    for rule in 1..=32u8 {
        for seed in 0..20 {
            let comp = generate(rule, seed, Style::Sdv2).unwrap();
            assert!(verify(&comp).is_empty(), "rule {rule} seed {seed}");
        }
    }
}

fn mutate(comp: &Composition, rng: &mut ChaCha8Rng) -> Composition {
    let mut m = comp.clone();
    let k = rng.random_range(0..m.elements.len());
    if rng.random_bool(0.5) && m.elements.len() > 1 {
        m.elements.remove(k);
        // Annotations are left as generated, so indices may dangle.
    } else {
        let c = Rgb8::new(rng.random(), rng.random(), rng.random());
        m.elements[k].fill = m.elements[k].fill.with_base_color(c);
    }
    m
}

#[test]
fn mutations_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut total = 0usize;
    let mut caught = 0usize;
    for rule in 1..=32u8 {
        for seed in 0..25 {
            let comp = generate(rule, seed, Style::Sdv1).unwrap();
            let m = mutate(&comp, &mut rng);
            total += 1;
            if !verify(&m).is_empty() {
                caught += 1;
            }
        }
    }
    let rate = caught as f64 / total as f64;
    assert!(rate >= 0.95, "only {caught}/{total} mutations rejected");
}

#[test]
fn labels_follow_the_catalog() {
    let mut counts = [0usize; 9];
    for rule in 1..=32u8 {
        let comp = generate(rule, 1, Style::Sdv1).unwrap();
        assert_eq!(comp.label, rule_spec(rule).unwrap().sub_vdp);
        counts[comp.label.index()] += 1;
    }
    assert_eq!(counts.iter().sum::<usize>(), 32);
    assert_eq!(counts[SubVdp::Asymmetric.index()], 6);
}

#[test]
fn same_seed_gives_identical_pixels() {
    let a = render(&generate(12, 99, Style::Sdv2).unwrap(), 64, 64).unwrap();
    let b = render(&generate(12, 99, Style::Sdv2).unwrap(), 64, 64).unwrap();
    assert_eq!(a, b);
}

#[test]
fn different_seeds_give_different_layouts() {
    for rule in 1..=32u8 {
        let a = generate(rule, 1, Style::Sdv1).unwrap();
        let b = generate(rule, 2, Style::Sdv1).unwrap();
        assert_ne!(a.elements, b.elements, "rule {rule}");
    }
}
