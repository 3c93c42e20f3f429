use vdp_core::composition::{generate, rule_spec, Style, SubVdp};
use vdp_core::nn::predict_probabilities;
use vdp_core::raster::{render, RasterImage};
use vdp_toolkit::pipeline::{desk_config, evaluate_images, explain, train_images, AugmentMode, Checkpoint};
use vdp_toolkit::Error;

fn corpus(rules: &[u8], per_rule: usize, base: u64) -> (Vec<RasterImage>, Vec<SubVdp>, Vec<Option<u8>>) {
    let (mut images, mut labels, mut ids) = (vec![], vec![], vec![]);
    for &r in rules {
        for i in 0..per_rule {
            images.push(render(&generate(r, base + i as u64, Style::Sdv1).unwrap(), 32, 32).unwrap());
            labels.push(rule_spec(r).unwrap().sub_vdp);
            ids.push(Some(r));
        }
    }
    (images, labels, ids)
}

fn tiny_checkpoint() -> Checkpoint {
    let (images, labels, _) = corpus(&[1, 11, 27], 6, 0);
    let mut classes = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    train_images(images, &labels, &classes, &desk_config(3, 2, 7), AugmentMode::Full).unwrap()
}

#[test]
fn training_is_reproducible() {
    let a = tiny_checkpoint();
    assert_eq!(a, tiny_checkpoint());
    assert_eq!(a.model.arch.input_size, 32);
    assert_eq!(a.report.as_ref().unwrap().epochs.len(), 2);
}

#[test]
fn checkpoint_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let ck = tiny_checkpoint();
    let path = dir.path().join("model.json");
    ck.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back, ck);
    let (images, _, _) = corpus(&[2, 12], 2, 50);
    let refs: Vec<&RasterImage> = images.iter().collect();
    assert_eq!(predict_probabilities(&back.model, &refs).unwrap(), predict_probabilities(&ck.model, &refs).unwrap());

    let mut json: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    json["version"] = 9.into();
    std::fs::write(&path, json.to_string()).unwrap();
    assert!(matches!(Checkpoint::load(&path), Err(Error::Format { .. })));

    let wrong = Checkpoint::new(vec![SubVdp::Color], ck.model.clone(), None);
    wrong.save(&path).unwrap();
    assert!(matches!(Checkpoint::load(&path), Err(Error::Format { .. })));
    std::fs::write(&path, "{").unwrap();
    assert!(matches!(Checkpoint::load(&path), Err(Error::Format { .. })));
}

#[test]
fn evaluation_agrees_with_direct_prediction() {
    let ck = tiny_checkpoint();
    let (images, labels, rules) = corpus(&[1, 2, 11, 12, 27, 28], 4, 100);
    let report = evaluate_images(&ck, &images, &labels, &rules).unwrap();
    let refs: Vec<&RasterImage> = images.iter().collect();
    let probs = predict_probabilities(&ck.model, &refs).unwrap();
    let argmax = |p: &Vec<f64>| (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
    let hits: Vec<bool> = probs.iter().zip(&labels).map(|(p, l)| ck.classes[argmax(p)] == *l).collect();
    let top1 = hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64;
    assert!((report.top1 - top1).abs() < 1e-12);
    assert!(report.top1 <= report.top2 && report.top2 <= report.top3);
    assert_eq!(report.top3, 1.0);
    assert_eq!(report.count, 24);
    assert_eq!(report.confusion.counts.iter().flatten().sum::<u64>(), 24);
    for (rule, acc) in &report.per_rule {
        let idx: Vec<usize> = (0..24).filter(|&i| rules[i] == Some(*rule)).collect();
        assert_eq!(idx.len(), 4);
        let expected = idx.iter().filter(|&&i| hits[i]).count() as f64 / 4.0;
        assert!((acc - expected).abs() < 1e-12, "rule {rule}");
    }
    assert!(report.to_text().starts_with("items 24"));
    assert!(evaluate_images(&ck, &images[..1], &[SubVdp::Flowing], &[None]).is_err());
}

#[test]
fn explain_defaults_to_the_prediction() {
    let ck = tiny_checkpoint();
    let (images, _, _) = corpus(&[1], 1, 300);
    let probs = predict_probabilities(&ck.model, &[&images[0]]).unwrap();
    let best = (0..3).fold(0, |b, i| if probs[0][i] > probs[0][b] { i } else { b });
    let (target, heatmap, over) = explain(&ck, &images[0], None, None, 0.0).unwrap();
    assert_eq!(target, best);
    assert_eq!((heatmap.width, heatmap.height), (32, 32));
    assert_eq!(over, images[0]);
    let (t, early, _) = explain(&ck, &images[0], Some(SubVdp::Progressive), Some(0), 0.5).unwrap();
    assert_eq!(ck.classes[t], SubVdp::Progressive);
    assert_eq!(early.values.len(), 32 * 32);
    assert!(explain(&ck, &images[0], Some(SubVdp::Flowing), None, 0.5).is_err());
    assert!(explain(&ck, &images[0], None, Some(3), 0.5).is_err());
}

#[test]
fn non_square_training_images_are_rejected() {
    let img = RasterImage::from_pixels(4, 3, vec![0; 36]).unwrap();
    let err = train_images(vec![img], &[SubVdp::Color], &[SubVdp::Color], &desk_config(1, 1, 0), AugmentMode::None);
    assert!(err.is_err());
}
