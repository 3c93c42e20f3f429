use vdp_core::augment::normalize;
use vdp_core::composition::{generate, Style};
use vdp_core::nn::*;
use vdp_core::raster::{render, RasterImage};
use vdp_core::rng::rng_from_seed;
use vdp_core::Error;

use rand::seq::SliceRandom;

fn image(rule: u8, seed: u64) -> RasterImage {
    render(&generate(rule, seed, Style::Sdv1).unwrap(), 64, 64).unwrap()
}

fn batch(images: &[RasterImage]) -> Tensor {
    Tensor::stack(&images.iter().map(normalize).collect::<Vec<_>>()).unwrap()
}

#[test]
fn zero_classifier_gives_uniform_output() {
    let mut m = CnnModel::<f32>::new(Architecture::desk(9), 3).unwrap();
    m.zero_fc();
    let imgs: Vec<_> = (0..4).map(|s| image(1 + s as u8, s)).collect();
    let logits = m.forward(&batch(&imgs)).unwrap();
    assert_eq!(logits.shape(), &[4, 9]);
    assert!(logits.data().iter().all(|&v| v == 0.0));
    let (loss, _) = m.loss_and_grads(&batch(&imgs), &[0, 3, 5, 8]).unwrap();
    assert!((loss as f64 - 9f64.ln()).abs() < 1e-5, "{loss}");

    let ranked = predict_topk(&m, &imgs[0], 9).unwrap();
    assert_eq!(ranked.iter().map(|r| r.0).collect::<Vec<_>>(), (0..9).collect::<Vec<_>>());
    assert!(ranked.iter().all(|r| (r.1 - 1.0 / 9.0).abs() < 1e-12));
}

#[test]
fn fresh_model_loss_is_near_ln_c() {
    let m = CnnModel::<f32>::new(Architecture::desk(3), 9).unwrap();
    let imgs: Vec<_> = (0..8).map(|s| image(11, s)).collect();
    let (loss, _) = m.loss_and_grads(&batch(&imgs), &[0; 8]).unwrap();
    assert!(loss >= 0.0);
    assert!((loss as f64 - 3f64.ln()).abs() < 0.5, "{loss}");
}

#[test]
fn batch_permutation_permutes_logits() {
    let m = CnnModel::<f32>::new(Architecture::desk(9), 5).unwrap();
    let imgs: Vec<_> = (0..5).map(|s| image(20 + s as u8, s)).collect();
    let order = [3, 0, 4, 1, 2];
    let shuffled: Vec<_> = order.iter().map(|&i| imgs[i].clone()).collect();
    let a = m.forward(&batch(&imgs)).unwrap();
    let b = m.forward(&batch(&shuffled)).unwrap();
    for (row, &i) in order.iter().enumerate() {
        assert_eq!(b.row(row), a.row(i));
    }
}

#[test]
fn probabilities_are_normalized_and_sorted() {
    let m = CnnModel::<f32>::new(Architecture::desk(9), 6).unwrap();
    for s in 0..5 {
        let img = image(5 + s as u8, s);
        let all = predict_topk(&m, &img, 9).unwrap();
        let total: f64 = all.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(all.windows(2).all(|w| w[0].1 >= w[1].1));
        let logits = m.forward(&batch(std::slice::from_ref(&img))).unwrap();
        let argmax = logits.data().iter().enumerate().fold(0, |b, (i, &v)| if v > logits.data()[b] { i } else { b });
        assert_eq!(all[0].0, argmax);
        assert_eq!(predict_topk(&m, &img, 3).unwrap(), all[..3].to_vec());
    }
    assert!(predict_topk(&m, &image(1, 0), 0).is_err());
    assert!(predict_topk(&m, &image(1, 0), 10).is_err());
}

#[test]
fn bad_inputs_are_rejected() {
    let m = CnnModel::<f32>::new(Architecture::desk(3), 1).unwrap();
    let b = batch(&[image(1, 0)]);
    assert!(matches!(m.loss_and_grads(&b, &[3]), Err(Error::InvalidLabel { label: 3, classes: 3 })));
    assert!(matches!(m.loss_and_grads(&b, &[0, 1]), Err(Error::LengthMismatch { .. })));
    let odd = Tensor::zeros(&[1, 3, 30, 30]);
    assert!(matches!(m.forward(&odd), Err(Error::ShapeMismatch { .. })));
    let gray = Tensor::zeros(&[1, 1, 64, 64]);
    assert!(matches!(m.forward(&gray), Err(Error::ShapeMismatch { .. })));
    assert!(CnnModel::<f32>::new(Architecture::desk(1), 0).is_err());
}

#[test]
fn lr_schedule_is_non_increasing() {
    let cfg = TrainConfig::default();
    assert_eq!(lr_at(&cfg, 0.0), 0.0256);
    let mut prev = f64::INFINITY;
    for i in 0..200 {
        let lr = lr_at(&cfg, i as f64 * 0.1);
        assert!(lr <= prev);
        prev = lr;
    }
    let flat = TrainConfig { decay_gamma: 1.0, ..cfg };
    assert_eq!(lr_at(&flat, 50.0), 0.0256);
}

fn samples(rules: &[&[u8]], per: usize, base: u64) -> Vec<Sample> {
    let mut out = Vec::new();
    for (label, group) in rules.iter().enumerate() {
        for i in 0..per {
            out.push(Sample { image: image(group[i % group.len()], base + i as u64), label });
        }
    }
    out
}

#[test]
fn training_is_deterministic() {
    let data = samples(&[&[1], &[11], &[30]], 12, 0);
    let cfg = TrainConfig { epochs: 2, batch: 4, num_classes: 3, val_fraction: 0.25, ..Default::default() };
    let run = || {
        let mut m = CnnModel::new(Architecture::desk(3), 4).unwrap();
        let report = train(&mut m, &data, &cfg, Some(&vdp_core::augment::PlanSampler::default())).unwrap();
        (m, report)
    };
    let (m1, r1) = run();
    let (m2, r2) = run();
    assert_eq!(r1, r2);
    assert_eq!(m1, m2);
    assert_eq!(r1.epochs.iter().map(|e| e.epoch).collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!((r1.train_count, r1.val_count), (27, 9));
    assert_eq!(m1.trained_epochs, r1.best_epoch + 1);
}

#[test]
fn shuffled_labels_stay_at_chance() {
    let rules: &[&[u8]] = &[&[1, 2], &[11, 12], &[27, 28, 29, 30]];
    let mut data = samples(rules, 100, 0);
    let mut labels: Vec<usize> = data.iter().map(|s| s.label).collect();
    labels.shuffle(&mut rng_from_seed(77));
    for (s, l) in data.iter_mut().zip(labels) {
        s.label = l;
    }
    let cfg = TrainConfig { epochs: 3, batch: 8, num_classes: 3, ..Default::default() };
    let mut m = CnnModel::new(Architecture::desk(3), 2).unwrap();
    train(&mut m, &data, &cfg, None).unwrap();

    let mut held = samples(rules, 100, 500_000);
    let mut labels: Vec<usize> = held.iter().map(|s| s.label).collect();
    labels.shuffle(&mut rng_from_seed(78));
    for (s, l) in held.iter_mut().zip(labels) {
        s.label = l;
    }
    let imgs: Vec<&RasterImage> = held.iter().map(|s| &s.image).collect();
    let probs = predict_probabilities(&m, &imgs).unwrap();
    let hits = probs.iter().zip(&held).filter(|(p, s)| top_k(p, 1)[0].0 == s.label).count();
    let acc = hits as f64 / held.len() as f64;
    assert!((acc - 1.0 / 3.0).abs() <= 0.1, "{acc}");
}

#[test]
fn topk_accuracy_grows_with_k() {
    let m = CnnModel::<f32>::new(Architecture::desk(9), 8).unwrap();
    let data = samples(&[&[1], &[3], &[7], &[11], &[13], &[19], &[23], &[27], &[31]], 3, 0);
    let imgs: Vec<&RasterImage> = data.iter().map(|s| &s.image).collect();
    let probs = predict_probabilities(&m, &imgs).unwrap();
    let acc = |k: usize| probs.iter().zip(&data).filter(|(p, s)| top_k(p, k).iter().any(|r| r.0 == s.label)).count();
    assert!(acc(1) <= acc(2) && acc(2) <= acc(3));
}

#[test]
fn checkpoints_round_trip_through_precision_change() {
    let m = CnnModel::<f32>::new(Architecture::desk(3), 12).unwrap();
    let back: CnnModel<f32> = m.convert::<f64>().convert();
    assert_eq!(back, m);
}
