use vdp_core::augment::{flip, normalize, FlipAxis};
use vdp_core::composition::{generate, Style};
use vdp_core::gradcam::*;
use vdp_core::nn::{Architecture, CnnModel};
use vdp_core::raster::{render, RasterImage};
use vdp_core::Error;

fn image(rule: u8, seed: u64) -> RasterImage {
    render(&generate(rule, seed, Style::Sdv1).unwrap(), 64, 64).unwrap()
}

/// Mirrors every kernel left to right and averages, so each conv commutes
/// with a horizontal flip of its input.
fn symmetrize(model: &mut CnnModel) {
    for conv in &mut model.convs {
        let k = conv.kernel;
        for tap in conv.weight.chunks_exact_mut(k * k) {
            for r in 0..k {
                for c in 0..k / 2 {
                    let (a, b) = (r * k + c, r * k + k - 1 - c);
                    let mean = 0.5 * (tap[a] + tap[b]);
                    tap[a] = mean;
                    tap[b] = mean;
                }
            }
        }
    }
}

#[test]
fn zero_gradient_gives_zero_map() {
    let mut m = CnnModel::<f32>::new(Architecture::desk(9), 1).unwrap();
    m.zero_fc();
    let cam = gradcam(&m, &normalize(&image(1, 0)), 0).unwrap();
    assert!(cam.heatmap.values.iter().all(|&v| v == 0.0));
    assert_eq!(cam.heatmap.entropy(), None);
    assert!(cam.untrained);
}

#[test]
fn map_matches_input_and_is_max_normalized() {
    let m = CnnModel::<f32>::new(Architecture::desk(9), 2).unwrap();
    for (rule, seed) in [(1, 0), (12, 3), (26, 5), (31, 8)] {
        for class in [0, 4, 8] {
            let h = gradcam(&m, &normalize(&image(rule, seed)), class).unwrap().heatmap;
            assert_eq!((h.width, h.height, h.values.len()), (64, 64, 64 * 64));
            assert!(h.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(h.max() == 0.0 || h.max() == 1.0);
        }
    }
    let small = image(1, 0);
    let h = gradcam(&CnnModel::new(Architecture { input_size: 32, ..Architecture::desk(9) }, 0).unwrap(), &normalize(&render(&generate(1, 0, Style::Sdv1).unwrap(), 32, 32).unwrap()), 1).unwrap();
    assert_eq!((h.heatmap.width, h.heatmap.height), (32, 32));
    assert!(matches!(gradcam(&m, &normalize(&small), 9), Err(Error::InvalidLabel { .. })));
}

#[test]
fn mirrored_input_mirrors_the_map() {
    for seed in 0..4 {
        let mut m = CnnModel::<f32>::new(Architecture::desk(9), 10 + seed).unwrap();
        symmetrize(&mut m);
        let img = image(1 + seed as u8 * 7, seed);
        let class = seed as usize * 2;
        let direct = gradcam(&m, &normalize(&img), class).unwrap().heatmap;
        let mirrored = gradcam(&m, &normalize(&flip(&img, FlipAxis::X)), class).unwrap().heatmap.flipped_x();
        let total = direct.total();
        if total == 0.0 {
            continue;
        }
        let moved: f64 = direct.values.iter().zip(&mirrored.values).map(|(a, b)| (a - b).abs() as f64).sum();
        assert!(moved / total <= 0.1, "seed {seed}: {}", moved / total);
    }
}

#[test]
fn overlay_blends_between_image_and_colormap() {
    let img = image(2, 1);
    let m = CnnModel::<f32>::new(Architecture::desk(9), 3).unwrap();
    let h = gradcam(&m, &normalize(&img), 0).unwrap().heatmap;
    assert_eq!(overlay(&img, &h, 0.0).unwrap(), img);
    let pure = overlay(&img, &h, 1.0).unwrap();
    for y in 0..64 {
        for x in 0..64 {
            let c = colormap(h.value(x, y));
            let p = pure.pixel(x, y);
            assert_eq!([p.r, p.g, p.b], c);
        }
    }
    assert_eq!(overlay(&img, &h, 0.4).unwrap(), overlay(&img, &h, 0.4).unwrap());
    assert!(overlay(&img, &h, 1.5).is_err());
    let other = RasterImage::filled(32, 32, vdp_core::color::Rgb8::new(0, 0, 0));
    assert!(matches!(overlay(&other, &h, 0.5), Err(Error::DimensionMismatch(_))));
}

#[test]
fn colormap_endpoints_and_monotone_lightness() {
    let dark = colormap(0.0);
    let bright = colormap(1.0);
    let luma = |c: [u8; 3]| 0.2126 * c[0] as f64 + 0.7152 * c[1] as f64 + 0.0722 * c[2] as f64;
    assert!(luma(dark) < 10.0 && luma(bright) > 200.0);
    let mut prev = -1.0;
    for i in 0..=100 {
        let l = luma(colormap(i as f32 / 100.0));
        assert!(l >= prev - 0.5, "{i}");
        prev = l;
    }
}

#[test]
fn focus_density_counts_pixel_centres() {
    let mut values = vec![0.0f32; 16];
    values[5] = 1.0;
    let h = Heatmap { width: 4, height: 4, values };
    let bbox = vdp_core::geometry::BBox { min: vdp_core::geometry::Point::new(0.25, 0.25), max: vdp_core::geometry::Point::new(0.5, 0.5) };
    let (inside, outside) = h.density_inside_outside(&bbox);
    assert_eq!((inside, outside), (1.0, 0.0));
}

#[test]
fn block_selection() {
    let m = CnnModel::<f32>::new(Architecture::desk(3), 4).unwrap();
    let x = normalize(&image(1, 2));
    assert_eq!(gradcam(&m, &x, 1).unwrap(), gradcam_at_block(&m, &x, 1, 2).unwrap());
    for block in 0..2 {
        let h = gradcam_at_block(&m, &x, 1, block).unwrap().heatmap;
        assert_eq!((h.width, h.height), (64, 64));
        assert!(h.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(h.max() == 0.0 || h.max() == 1.0);
    }
    assert!(matches!(gradcam_at_block(&m, &x, 1, 3), Err(Error::InvalidArgument(_))));
}
