//! End-to-end acceptance suite. Each criterion runs in isolation and prints
//! one `PASS`/`FAIL` line; the test fails if any criterion does.
//!
//! The learnability runs train the desk network at full size and dominate
//! the runtime (tens of minutes on one core).

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use vdp_core::augment::{
    brightness_gradient, flip, global_brightness_tweak, lab_to_pixel, normalize, pixel_to_lab, rgb_to_lab, rotate, FlipAxis, Rotation,
};
use vdp_core::color::Rgb8;
use vdp_core::composition::{generate, rule_spec, verify, Composition, Style, SubVdp};
use vdp_core::gradcam::{gradcam, gradcam_at_block};
use vdp_core::metrics::{fleiss_kappa, match_rates, oracle_accuracy, Column, RatingRecord, RatingTable};
use vdp_core::nn::layers::{self, Conv2d, Linear};
use vdp_core::nn::{predict_probabilities, top_k, Architecture, CnnModel, PaddingMode, Tensor};
use vdp_core::raster::{render, RasterImage};
use vdp_core::rng::{derive_seed, rng_from_seed};
use vdp_toolkit::generate::{parse_rules, Balance, GeneratorConfig};
use vdp_toolkit::pipeline::{desk_config, evaluate_images, train_images, AugmentMode, Checkpoint};
use vdp_toolkit::run_manifest::RunManifest;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct Suite {
    lines: Vec<(bool, String)>,
}

impl Suite {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Check) {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let (pass, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let line = format!("{} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        println!("{line}");
        self.lines.push((pass, line));
    }
}

// ---------------------------------------------------------------- datasets

const SIZE: usize = 64;
const THREE_CLASS_RULES: &str = "1-2,11-12,27-30";

/// Class-balanced synthetic set rendered in memory, seeded like `vdp generate`.
fn dataset(style: Style, rules: &str, count: usize, base_seed: u64) -> (Vec<RasterImage>, Vec<SubVdp>, Vec<Option<u8>>) {
    let config = GeneratorConfig { style, rules: parse_rules(rules).unwrap(), count, base_seed, size: SIZE, balance: Balance::Class };
    let assignment = config.assignment();
    let images = assignment
        .par_iter()
        .enumerate()
        .map(|(i, &rule)| render(&generate(rule, derive_seed(base_seed, i as u64), style).unwrap(), SIZE, SIZE).unwrap())
        .collect();
    let labels = assignment.iter().map(|&r| rule_spec(r).unwrap().sub_vdp).collect();
    (images, labels, assignment.into_iter().map(Some).collect())
}

fn classes_of(labels: &[SubVdp]) -> Vec<SubVdp> {
    let mut c = labels.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// Trains on `train_count` images and scores `test_count` held-out ones.
fn learnability(style: Style, rules: &str, train_count: usize, test_count: usize, epochs: usize) -> (Checkpoint, vdp_toolkit::pipeline::EvaluationReport) {
    let (images, labels, _) = dataset(style, rules, train_count, 1);
    let classes = classes_of(&labels);
    let ck = train_images(images, &labels, &classes, &desk_config(classes.len(), epochs, 3), AugmentMode::Full).unwrap();
    let (images, labels, ids) = dataset(style, rules, test_count, 2);
    let report = evaluate_images(&ck, &images, &labels, &ids).unwrap();
    (ck, report)
}

// ---------------------------------------------------------------- gradients

const STEP: f64 = 1e-6;
const GRAD_TOLERANCE: f64 = 1e-4;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn probe(out: &[f64], weights: &[f64]) -> f64 {
    out.iter().zip(weights).map(|(a, b)| a * b).sum()
}

/// Worst relative error of `grad` against central differences of `f`.
fn worst_error(x: &mut [f64], grad: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let keep = x[i];
        x[i] = keep + STEP;
        let up = f(x);
        x[i] = keep - STEP;
        let down = f(x);
        x[i] = keep;
        worst = worst.max(rel_err((up - down) / (2.0 * STEP), grad[i]));
    }
    worst
}

fn gradient_errors() -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (name, mode) in [("conv zero-pad", PaddingMode::Zeros), ("conv replicate", PaddingMode::Replicate)] {
        let mut rng = rng_from_seed(1);
        let conv = Conv2d::<f64>::new(2, 3, 3, 1, &mut rng).with_padding_mode(mode);
        let (n, h, w) = (2, 5, 6);
        let (oh, ow) = conv.output_size(h, w).unwrap();
        let input = random_vec(n * 2 * h * w, 10);
        let upstream = random_vec(n * 3 * oh * ow, 11);
        let (_, cols) = conv.forward(&input, n, h, w);
        let mut wg = vec![0.0; conv.weight.len()];
        let mut bg = vec![0.0; conv.bias.len()];
        let ig = conv.backward(&cols, &upstream, n, h, w, &mut wg, &mut bg, true).unwrap();
        let mut e = worst_error(&mut input.clone(), &ig, |x| probe(&conv.forward(x, n, h, w).0, &upstream));
        let mut c = conv.clone();
        e = e.max(worst_error(&mut conv.weight.clone(), &wg, |p| {
            c.weight.copy_from_slice(p);
            probe(&c.forward(&input, n, h, w).0, &upstream)
        }));
        let mut c = conv.clone();
        e = e.max(worst_error(&mut conv.bias.clone(), &bg, |p| {
            c.bias.copy_from_slice(p);
            probe(&c.forward(&input, n, h, w).0, &upstream)
        }));
        out.insert(name.into(), e);
    }

    let mut rng = rng_from_seed(4);
    let fc = Linear::<f64>::new(5, 4, &mut rng);
    let input = random_vec(15, 12);
    let upstream = random_vec(12, 13);
    let mut wg = vec![0.0; fc.weight.len()];
    let mut bg = vec![0.0; fc.bias.len()];
    let ig = fc.backward(&input, &upstream, 3, &mut wg, &mut bg);
    let mut e = worst_error(&mut input.clone(), &ig, |x| probe(&fc.forward(x, 3), &upstream));
    let mut f = fc.clone();
    e = e.max(worst_error(&mut fc.weight.clone(), &wg, |p| {
        f.weight.copy_from_slice(p);
        probe(&f.forward(&input, 3), &upstream)
    }));
    out.insert("linear".into(), e);

    let input: Vec<f64> = random_vec(40, 14).into_iter().map(|v| if v.abs() < 0.05 { 0.3 } else { v }).collect();
    let upstream = random_vec(40, 15);
    let mut act = input.clone();
    layers::relu_in_place(&mut act);
    let mut g = upstream.clone();
    layers::relu_backward(&act, &mut g);
    out.insert(
        "relu".into(),
        worst_error(&mut input.clone(), &g, |x| {
            let mut o = x.to_vec();
            layers::relu_in_place(&mut o);
            probe(&o, &upstream)
        }),
    );

    let (planes, h, w) = (3, 4, 6);
    let mut input: Vec<f64> = (0..planes * h * w).map(|i| ((i * 37) % 101) as f64 * 0.01).collect();
    let upstream = random_vec(planes * 6, 16);
    let (_, idx) = layers::max_pool(&input, planes, h, w, 2);
    let g = layers::max_pool_backward(&upstream, &idx, input.len());
    out.insert("max pool".into(), worst_error(&mut input, &g, |x| probe(&layers::max_pool(x, planes, h, w, 2).0, &upstream)));

    let mut input = random_vec(36, 17);
    let upstream = random_vec(4, 18);
    let g = layers::global_avg_pool_backward(&upstream, 9);
    out.insert("global average pool".into(), worst_error(&mut input, &g, |x| probe(&layers::global_avg_pool(x, 9), &upstream)));

    let mut logits = random_vec(15, 19);
    let labels = [0, 4, 2];
    let (_, g) = layers::softmax_cross_entropy(&logits, &labels, 5);
    out.insert("softmax cross-entropy".into(), worst_error(&mut logits, &g, |x| layers::softmax_cross_entropy(x, &labels, 5).0));

    for padding in [PaddingMode::Zeros, PaddingMode::Replicate] {
        let arch = Architecture { input_size: 8, in_channels: 3, channels: vec![3, 4, 5], kernel: 3, stride: 1, pool: 2, num_classes: 4, padding };
        let model = CnnModel::<f64>::new(arch, 21).unwrap();
        let batch = Tensor::from_vec(vec![2, 3, 8, 8], random_vec(2 * 3 * 64, 22)).unwrap();
        let labels = [1, 3];
        let (_, grads) = model.loss_and_grads(&batch, &labels).unwrap();
        let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
        let mut probe_model = model.clone();
        let mut e = 0.0f64;
        for (k, g) in analytic.iter().enumerate() {
            let mut params = model.parameters()[k].to_vec();
            e = e.max(worst_error(&mut params, g, |p| {
                probe_model.parameters_mut()[k].copy_from_slice(p);
                probe_model.loss_and_grads(&batch, &labels).unwrap().0
            }));
            probe_model.parameters_mut()[k].copy_from_slice(model.parameters()[k]);
        }
        out.insert(format!("whole network {padding:?}"), e);
    }
    out
}

// ---------------------------------------------------------------- rules

fn mutate(comp: &Composition, rng: &mut impl Rng) -> Composition {
    let mut m = comp.clone();
    let k = rng.random_range(0..m.elements.len());
    if rng.random_bool(0.5) && m.elements.len() > 1 {
        m.elements.remove(k);
    } else {
        let c = Rgb8::new(rng.random(), rng.random(), rng.random());
        m.elements[k].fill = m.elements[k].fill.with_base_color(c);
    }
    m
}

// ---------------------------------------------------------------- metrics

fn rec(item: &str, rater: &str, ranks: &[SubVdp]) -> RatingRecord {
    RatingRecord { item_id: item.into(), domain: None, rater: rater.into(), ranks: ranks.to_vec() }
}

fn column(rows: &[(&str, &[SubVdp])]) -> Column {
    rows.iter().map(|(i, r)| (i.to_string(), r.to_vec())).collect()
}

fn random_column(rng: &mut impl Rng, items: usize) -> Column {
    (0..items)
        .map(|i| {
            let len = rng.random_range(0..=3);
            let mut ranks: Vec<SubVdp> = Vec::new();
            while ranks.len() < len {
                let c = SubVdp::ALL[rng.random_range(0..9)];
                if !ranks.contains(&c) {
                    ranks.push(c);
                }
            }
            (format!("{i}"), ranks)
        })
        .collect()
}

// ---------------------------------------------------------------- determinism

fn vdp(args: &[String]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vdp")).args(args).env("RUST_LOG", "warn").output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Runs generate → train → evaluate into `root` and returns every artifact;
/// run manifests have their timestamps zeroed.
fn pipeline_artifacts(root: &Path, workers: &str) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    if root.exists() {
        fs::remove_dir_all(root).unwrap();
    }
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let args = |v: &[&str]| -> Vec<String> { v.iter().map(|s| s.to_string()).chain(["--workers".into(), workers.into()]).collect() };
    vdp(&args(&["generate", "--style", "sdv2", "--rules", THREE_CLASS_RULES, "--count", "48", "--size", "32", "--balance", "class", "--seed", "8", "--out", &p("data")]))?;
    vdp(&args(&["train", "--manifest", &p("data/manifest.jsonl"), "--classes", "3", "--epochs", "2", "--seed", "8", "--out", &p("model")]))?;
    vdp(&args(&["evaluate", "--model", &p("model/model.json"), "--manifest", &p("data/manifest.jsonl"), "--out", &p("eval")]))?;
    let mut t = tree(root);
    for (path, bytes) in t.iter_mut() {
        if path.ends_with("run_manifest.json") {
            let mut m: RunManifest = serde_json::from_slice(bytes).unwrap();
            m.started_unix_ms = 0;
            m.finished_unix_ms = 0;
            *bytes = serde_json::to_vec(&m).unwrap();
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------- suite

#[test]
fn primary_acceptance_criteria() {
    let mut suite = Suite { lines: Vec::new() };
    let mut sdv1_model: Option<Checkpoint> = None;

    suite.run("synthetic learnability SDV1 (3 classes, 600/150, top-1 >= 0.90)", || {
        let (ck, r) = learnability(Style::Sdv1, THREE_CLASS_RULES, 600, 150, 60);
        sdv1_model = Some(ck);
        ensure(r.count == 150, "test set size")?;
        let d = format!("top-1 {:.4} on {} test images", r.top1, r.count);
        ensure(r.top1 >= 0.90, d.clone())?;
        Ok(d)
    });

    suite.run("synthetic learnability SDV2 (3 classes, 600/150, top-1 >= 0.85)", || {
        let (_, r) = learnability(Style::Sdv2, THREE_CLASS_RULES, 600, 150, 60);
        let d = format!("top-1 {:.4} on {} test images", r.top1, r.count);
        ensure(r.top1 >= 0.85, d.clone())?;
        Ok(d)
    });

    suite.run("9-class synthetic run (9x400/9x50, top-1 >= 0.70, top-3 >= 0.90)", || {
        let (_, r) = learnability(Style::Sdv1, "1-32", 9 * 400, 9 * 50, 15);
        let d = format!("top-1 {:.4}, top-3 {:.4} on {} test images", r.top1, r.top3, r.count);
        ensure(r.top1 >= 0.70 && r.top3 >= 0.90, d.clone())?;
        Ok(d)
    });

    suite.run("gradient oracle (central differences, f64, rel err <= 1e-4)", || {
        let errors = gradient_errors();
        let worst = errors.iter().fold(("", 0.0f64), |w, (k, &v)| if v > w.1 { (k.as_str(), v) } else { w });
        let d = format!("{} layer checks, worst {:.2e} ({})", errors.len(), worst.1, worst.0);
        ensure(worst.1 <= GRAD_TOLERANCE, d.clone())?;
        Ok(d)
    });

    suite.run("rule self-consistency (32 rules x 100 seeds; mutations rejected >= 95%)", || {
        let failures: Vec<(u8, u64)> = (1..=32u8)
            .into_par_iter()
            .flat_map_iter(|rule| (0..100u64).filter(move |&s| !verify(&generate(rule, s, Style::Sdv1).unwrap()).is_empty()).map(move |s| (rule, s)))
            .collect();
        ensure(failures.is_empty(), format!("verification failed for {failures:?}"))?;
        let mut rng = rng_from_seed(17);
        let (mut total, mut caught) = (0usize, 0usize);
        for rule in 1..=32u8 {
            for seed in 0..100 {
                let m = mutate(&generate(rule, seed, Style::Sdv1).unwrap(), &mut rng);
                total += 1;
                caught += !verify(&m).is_empty() as usize;
            }
        }
        let rate = caught as f64 / total as f64;
        let d = format!("3200/3200 verified; {caught}/{total} mutations rejected ({:.1}%)", 100.0 * rate);
        ensure(rate >= 0.95, d.clone())?;
        Ok(d)
    });

    suite.run("LAB round trip (4096 colours, max error <= 1/255; white = (100,0,0) +- 0.01)", || {
        let levels: Vec<u8> = (0..16).map(|i| (i * 17) as u8).collect();
        let mut worst = 0i32;
        for &r in &levels {
            for &g in &levels {
                for &b in &levels {
                    let back = lab_to_pixel(pixel_to_lab([r, g, b]));
                    for (x, y) in back.iter().zip([r, g, b]) {
                        worst = worst.max((*x as i32 - y as i32).abs());
                    }
                }
            }
        }
        let white = pixel_to_lab([255, 255, 255]);
        let d = format!("max error {worst}/255; white {white:.4?}");
        ensure(worst <= 1, d.clone())?;
        ensure((white[0] - 100.0).abs() <= 0.01 && white[1].abs() <= 0.01 && white[2].abs() <= 0.01, d.clone())?;
        Ok(d)
    });

    suite.run("augmentation group laws (100 images, bit-exact; GBT/BG keep a,b)", || {
        for seed in 0..100u64 {
            let (w, h) = (3 + (seed % 11) as usize, 2 + (seed % 7) as usize);
            let mut rng = rng_from_seed(seed);
            let img = RasterImage::from_pixels(w, h, (0..w * h * 3).map(|_| rng.random()).collect()).unwrap();
            let fx = flip(&img, FlipAxis::X);
            let fy = flip(&img, FlipAxis::Y);
            let r90 = rotate(&img, Rotation::R90);
            let r180 = rotate(&r90, Rotation::R90);
            ensure(flip(&fx, FlipAxis::X) == img && flip(&fy, FlipAxis::Y) == img, format!("flip involution, image {seed}"))?;
            ensure(rotate(&rotate(&r180, Rotation::R90), Rotation::R90) == img, format!("four quarter turns, image {seed}"))?;
            ensure(flip(&fy, FlipAxis::X) == r180, format!("half turn = both flips, image {seed}"))?;
            ensure(rotate(&r90, Rotation::R270) == img, format!("R90 then R270, image {seed}"))?;
            let lab = rgb_to_lab(&img);
            for out in [
                global_brightness_tweak(&lab, rng.random_range(-20.0..20.0)),
                brightness_gradient(&lab, rng.random_range(0.0..6.3), rng.random_range(-30.0..30.0)),
            ] {
                let same = lab.pixels.iter().zip(&out.pixels).all(|(a, b)| a[1].to_bits() == b[1].to_bits() && a[2].to_bits() == b[2].to_bits());
                ensure(same, format!("chroma changed, image {seed}"))?;
            }
        }
        Ok("100/100 images".into())
    });

    suite.run("Fleiss' kappa oracle (perfect = 1, null |K| <= 0.05, hand table to 1e-9)", || {
        use SubVdp::*;
        let mut recs = Vec::new();
        for i in 0..20 {
            for r in ["h1", "h2", "h3"] {
                recs.push(rec(&format!("item{i}"), r, &[[Color, Shape, Regular, Flowing][i % 4]]));
            }
        }
        let perfect = fleiss_kappa(&RatingTable::from_records(recs).unwrap(), 1, false).unwrap().kappa;
        ensure(perfect == Some(1.0), format!("perfect agreement gave {perfect:?}"))?;

        let mut rng = rng_from_seed(2024);
        let mut recs = Vec::with_capacity(30000);
        for i in 0..10000 {
            for r in ["a", "b", "c"] {
                recs.push(rec(&i.to_string(), r, &[if rng.random_bool(0.5) { Color } else { Shape }]));
            }
        }
        let null = fleiss_kappa(&RatingTable::from_records(recs).unwrap(), 1, false).unwrap().kappa.unwrap();
        ensure(null.abs() <= 0.05, format!("null kappa {null}"))?;

        // Counts per item (Color, Shape, None): 3 0 0 / 1 2 0 / 0 2 1 / 1 1 1.
        // P̄ = (1 + 1/3 + 1/3 + 0)/4 = 5/12; p = (5, 5, 2)/12; P̄e = 54/144 = 3/8.
        let table = RatingTable::from_records([
            rec("1", "a", &[Color]),
            rec("1", "b", &[Color]),
            rec("1", "c", &[Color]),
            rec("2", "a", &[Color]),
            rec("2", "b", &[Shape]),
            rec("2", "c", &[Shape]),
            rec("3", "a", &[Shape]),
            rec("3", "b", &[Shape]),
            rec("3", "c", &[]),
            rec("4", "a", &[Color]),
            rec("4", "b", &[]),
            rec("4", "c", &[Shape]),
        ])
        .unwrap();
        let hand = ((5.0 / 12.0) - (3.0 / 8.0)) / (1.0 - 3.0 / 8.0);
        let k = fleiss_kappa(&table, 1, false).unwrap().kappa.unwrap();
        ensure((k - hand).abs() <= 1e-9, format!("hand table {k} vs {hand}"))?;
        Ok(format!("perfect 1.0; null {null:+.4}; hand table {k:.12}"))
    });

    suite.run("match rates and oracle accuracy (hand values; bounds; any >= rank1)", || {
        use SubVdp::*;
        let a = column(&[("1", &[Color, Shape, Flowing]), ("2", &[Regular]), ("3", &[Shape, Color]), ("4", &[])]);
        let b = column(&[("1", &[Color, Shape, Regular]), ("2", &[Symmetric, Regular]), ("3", &[Color, Shape]), ("4", &[Color])]);
        let m = match_rates(&a, &b);
        ensure((m.rank1, m.rank2, m.rank3, m.any_single, m.items) == (0.25, 0.25, 0.0, 0.75, 4), format!("{m:?}"))?;

        let oracle = column(&[("1", &[Color, Shape]), ("2", &[Regular, Flowing]), ("3", &[Symmetric, Asymmetric])]);
        let rater = column(&[("1", &[Color]), ("2", &[Progressive]), ("3", &[Symmetric])]);
        let domains: BTreeMap<String, String> = [("1", "ART"), ("2", "ART"), ("3", "PHT")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let acc = oracle_accuracy(&rater, &oracle, &domains).unwrap();
        ensure(acc.per_domain["ART"].rank1 == 0.5 && acc.per_domain["PHT"].rank1 == 1.0, format!("{acc:?}"))?;
        ensure((acc.overall.rank1 - 2.0 / 3.0).abs() < 1e-12, format!("{acc:?}"))?;

        let mut rng = rng_from_seed(5);
        for _ in 0..500 {
            let n = rng.random_range(1..30);
            let (x, y) = (random_column(&mut rng, n), random_column(&mut rng, n));
            let m = match_rates(&x, &y);
            let rates = [m.rank1, m.rank2, m.rank3, m.any_single];
            ensure(rates.iter().all(|r| (0.0..=1.0).contains(r)), format!("out of range {m:?}"))?;
            ensure(m.any_single >= m.rank1, format!("any < rank1 {m:?}"))?;
        }
        Ok("hand tables reproduced; 500 random pairs within bounds".into())
    });

    suite.run("Grad-CAM focality (>= 50 correct rule-1 images, >= 80% with inside >= 2x outside)", || {
        let ck = sdv1_model.as_ref().ok_or("no SDV1 model (learnability run failed)")?;
        let color = ck.class_index(SubVdp::Color).ok_or("model lacks the color class")?;
        let last = ck.model.arch.channels.len() - 1;
        let mut by_block = vec![0usize; last + 1];
        let mut correct = 0usize;
        for i in 0..120u64 {
            let comp = generate(1, derive_seed(99, i), Style::Sdv1).unwrap();
            let img = render(&comp, SIZE, SIZE).unwrap();
            let probs = predict_probabilities(&ck.model, &[&img]).unwrap();
            if top_k(&probs[0], 1)[0].0 != color {
                continue;
            }
            correct += 1;
            let focus = comp.truth.focus_box.ok_or("rule 1 has no focus box")?.dilate(0.1);
            let input = normalize(&img);
            for (block, hits) in by_block.iter_mut().enumerate() {
                let cam = if block == last { gradcam(&ck.model, &input, color) } else { gradcam_at_block(&ck.model, &input, color, block) };
                let (inside, outside) = cam.unwrap().heatmap.density_inside_outside(&focus);
                *hits += (inside >= 2.0 * outside) as usize;
            }
        }
        let share = by_block[last] as f64 / correct.max(1) as f64;
        let others: Vec<String> = (0..last).map(|b| format!("block {b}: {}/{correct}", by_block[b])).collect();
        let d = format!(
            "{}/{correct} focal at the default (last) block = {:.1}%; earlier blocks, for reference: {}",
            by_block[last],
            100.0 * share,
            others.join(", ")
        );
        ensure(correct >= 50, format!("only {correct} correct; {d}"))?;
        ensure(share >= 0.80, d.clone())?;
        Ok(d)
    });

    suite.run("determinism (generate/train/evaluate across runs and worker counts)", || {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("run");
        let first = pipeline_artifacts(&root, "1")?;
        let again = pipeline_artifacts(&root, "1")?;
        ensure(first == again, "artifacts differ between identical runs")?;
        let threaded = pipeline_artifacts(&root, "2")?;
        let data = |t: &BTreeMap<PathBuf, Vec<u8>>| -> BTreeMap<PathBuf, Vec<u8>> {
            t.iter().filter(|(p, _)| !p.ends_with("run_manifest.json")).map(|(p, b)| (p.clone(), b.clone())).collect()
        };
        ensure(data(&first) == data(&threaded), "artifacts differ between --workers 1 and 2")?;
        Ok(format!("{} files identical across 2 runs and 2 worker counts", first.len()))
    });

    let failed: Vec<&String> = suite.lines.iter().filter(|(p, _)| !p).map(|(_, l)| l).collect();
    println!("\n{} of {} criteria passed", suite.lines.len() - failed.len(), suite.lines.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("\n"));
}
