//! Training, evaluation and heatmaps over manifests on disk.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vdp_core::augment::{normalize, PlanSampler};
use vdp_core::composition::SubVdp;
use vdp_core::dataset::ManifestEntry;
use vdp_core::gradcam::{gradcam, gradcam_at_block, overlay, Heatmap};
use vdp_core::metrics::{class_report, confusion, normalize_columns, topk_accuracy, ClassReport, ConfusionMatrix, NormalizedConfusion};
use vdp_core::nn::{predict_probabilities, top_k, train, Architecture, CnnModel, Sample, TrainConfig, TrainingReport};
use vdp_core::raster::RasterImage;

use crate::png_io::load_png;
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "vdp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained classifier with its class order. Output `i` scores `classes[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub classes: Vec<SubVdp>,
    pub model: CnnModel<f32>,
    pub report: Option<TrainingReport>,
}

impl Checkpoint {
    pub fn new(classes: Vec<SubVdp>, model: CnnModel<f32>, report: Option<TrainingReport>) -> Self {
        Self { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, classes, model, report }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec(self).expect("checkpoint serializes");
        fs::write(path, json).map_err(Error::io(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(Error::io(path))?;
        let ck: Checkpoint = serde_json::from_slice(&bytes).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Format { path: path.into(), message: format!("unsupported checkpoint {} v{}", ck.format, ck.version) });
        }
        if ck.classes.len() != ck.model.num_classes() {
            return Err(Error::Format { path: path.into(), message: "class list does not match model outputs".into() });
        }
        Ok(ck)
    }

    pub fn class_index(&self, label: SubVdp) -> Option<usize> {
        self.classes.iter().position(|&c| c == label)
    }
}

/// Labels present in a manifest, in canonical class order.
pub fn manifest_classes(entries: &[ManifestEntry]) -> Vec<SubVdp> {
    let mut out: Vec<SubVdp> = entries.iter().map(|e| e.label).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Resolves a manifest path against the manifest's directory.
pub fn resolve(manifest_dir: &Path, entry: &ManifestEntry) -> PathBuf {
    let p = Path::new(&entry.path);
    if p.is_absolute() {
        p.into()
    } else {
        manifest_dir.join(p)
    }
}

/// Loads every image in manifest order.
pub fn load_images(manifest_dir: &Path, entries: &[ManifestEntry]) -> Result<Vec<RasterImage>> {
    entries.par_iter().map(|e| load_png(resolve(manifest_dir, e))).collect()
}

/// Augmentation used while training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AugmentMode {
    None,
    /// Flips and quarter turns.
    Geometric,
    /// Flips, quarter turns and both LAB brightness operations.
    #[default]
    Full,
}

impl AugmentMode {
    pub fn sampler(self) -> Option<PlanSampler> {
        match self {
            AugmentMode::None => None,
            AugmentMode::Geometric => Some(PlanSampler::geometric()),
            AugmentMode::Full => Some(PlanSampler::default()),
        }
    }
}

/// Desk-scale defaults: one image per step, the default step schedule.
pub fn desk_config(num_classes: usize, epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig { epochs, batch: 1, seed, num_classes, ..TrainConfig::default() }
}

/// Trains the desk architecture on labeled images. Class `i` of the
/// result is `classes[i]`.
pub fn train_images(
    images: Vec<RasterImage>,
    labels: &[SubVdp],
    classes: &[SubVdp],
    config: &TrainConfig,
    augment: AugmentMode,
) -> Result<Checkpoint> {
    let first = images.first().ok_or(vdp_core::Error::EmptyManifest)?;
    if first.width != first.height {
        return Err(Error::Invalid(format!("training images must be square, got {}x{}", first.width, first.height)));
    }
    let arch = Architecture { input_size: first.width, ..Architecture::desk(classes.len()) };
    let samples = images
        .into_iter()
        .zip(labels)
        .map(|(image, l)| {
            let label = classes.iter().position(|c| c == l).ok_or_else(|| Error::Invalid(format!("label {l} not among the model classes")))?;
            Ok(Sample { image, label })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut model = CnnModel::new(arch, config.seed)?;
    let report = train(&mut model, &samples, config, augment.sampler().as_ref())?;
    Ok(Checkpoint::new(classes.to_vec(), model, Some(report)))
}

pub fn train_manifest(manifest_dir: &Path, entries: &[ManifestEntry], config: &TrainConfig, augment: AugmentMode) -> Result<Checkpoint> {
    let classes = manifest_classes(entries);
    if classes.len() != config.num_classes {
        return Err(Error::Invalid(format!("manifest has {} classes, {} requested", classes.len(), config.num_classes)));
    }
    let images = load_images(manifest_dir, entries)?;
    let labels: Vec<SubVdp> = entries.iter().map(|e| e.label).collect();
    train_images(images, &labels, &classes, config, augment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classes: Vec<SubVdp>,
    pub count: usize,
    pub top1: f64,
    pub top2: f64,
    pub top3: f64,
    /// Rows = predicted, columns = actual.
    pub confusion: ConfusionMatrix,
    pub normalized: NormalizedConfusion,
    pub report: ClassReport,
    /// Top-1 accuracy per generator rule, for rows that carry one.
    pub per_rule: BTreeMap<u8, f64>,
}

impl EvaluationReport {
    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "items {}  top1 {:.4}  top2 {:.4}  top3 {:.4}", self.count, self.top1, self.top2, self.top3);
        let _ = writeln!(s, "\n{:<18} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for (c, sc) in self.classes.iter().zip(&self.report.classes) {
            let _ = writeln!(s, "{:<18} {:>9.4} {:>9.4} {:>9.4} {:>8}", c.name(), sc.precision, sc.recall, sc.f1, sc.support);
        }
        let _ = writeln!(s, "{:<18} {:>9.4} {:>9.4} {:>9.4}", "macro", self.report.macro_precision, self.report.macro_recall, self.report.macro_f1);
        let _ = writeln!(s, "\nconfusion (rows predicted, columns actual)");
        let _ = write!(s, "{:<18}", "");
        for c in &self.classes {
            let _ = write!(s, " {:>6.6}", c.name());
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion.counts) {
            let _ = write!(s, "{:<18}", c.name());
            for v in row {
                let _ = write!(s, " {v:>6}");
            }
            s.push('\n');
        }
        s
    }
}

/// Scores `images` against `labels` (labels outside the model's classes are rejected).
pub fn evaluate_images(checkpoint: &Checkpoint, images: &[RasterImage], labels: &[SubVdp], rules: &[Option<u8>]) -> Result<EvaluationReport> {
    let n = checkpoint.classes.len();
    let actual = labels
        .iter()
        .map(|&l| checkpoint.class_index(l).ok_or_else(|| Error::Invalid(format!("label {l} is not a model class"))))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&RasterImage> = images.iter().collect();
    let probs = predict_probabilities(&checkpoint.model, &refs)?;
    let ranked: Vec<Vec<usize>> = probs.iter().map(|p| top_k(p, n).into_iter().map(|(c, _)| c).collect()).collect();
    let top = |k: usize| -> Result<f64> { Ok(topk_accuracy(&ranked, &actual, k.min(n))?) };
    let predicted: Vec<usize> = ranked.iter().map(|r| r[0]).collect();
    let cm = confusion(&predicted, &actual, n)?;
    let mut per_rule: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for ((r, p), a) in rules.iter().zip(&predicted).zip(&actual) {
        if let Some(r) = r {
            let e = per_rule.entry(*r).or_default();
            e.0 += (p == a) as usize;
            e.1 += 1;
        }
    }
    Ok(EvaluationReport {
        classes: checkpoint.classes.clone(),
        count: images.len(),
        top1: top(1)?,
        top2: top(2)?,
        top3: top(3)?,
        normalized: normalize_columns(&cm),
        report: class_report(&cm),
        confusion: cm,
        per_rule: per_rule.into_iter().map(|(r, (h, t))| (r, h as f64 / t as f64)).collect(),
    })
}

pub fn evaluate_manifest(checkpoint: &Checkpoint, manifest_dir: &Path, entries: &[ManifestEntry]) -> Result<EvaluationReport> {
    let images = load_images(manifest_dir, entries)?;
    let labels: Vec<SubVdp> = entries.iter().map(|e| e.label).collect();
    let rules: Vec<Option<u8>> = entries.iter().map(|e| e.rule_id).collect();
    evaluate_images(checkpoint, &images, &labels, &rules)
}

/// Heatmap for `class` (default: the predicted class) and its overlay. `block`
/// picks the conv block read by Grad-CAM; the last one when `None`.
pub fn explain(
    checkpoint: &Checkpoint,
    image: &RasterImage,
    class: Option<SubVdp>,
    block: Option<usize>,
    alpha: f64,
) -> Result<(usize, Heatmap, RasterImage)> {
    let input = normalize(image);
    let target = match class {
        Some(c) => checkpoint.class_index(c).ok_or_else(|| Error::Invalid(format!("{c} is not a model class")))?,
        None => {
            let p = predict_probabilities(&checkpoint.model, &[image])?;
            top_k(&p[0], 1)[0].0
        }
    };
    let cam = match block {
        Some(b) => gradcam_at_block(&checkpoint.model, &input, target, b)?,
        None => gradcam(&checkpoint.model, &input, target)?,
    };
    let over = overlay(image, &cam.heatmap, alpha)?;
    Ok((target, cam.heatmap, over))
}

pub const HEATMAP_MAGIC: &[u8; 4] = b"VDPH";
pub const HEATMAP_VERSION: u32 = 1;

/// Raw heatmap layout, all integers and floats little-endian:
///
/// | offset | size | field |
/// |---|---|---|
/// | 0 | 4 | magic `VDPH` |
/// | 4 | 4 | version, `u32` = 1 |
/// | 8 | 4 | width, `u32` |
/// | 12 | 4 | height, `u32` |
/// | 16 | 4·w·h | values, `f32`, row-major |
pub fn heatmap_bytes(heatmap: &Heatmap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * heatmap.values.len());
    out.extend_from_slice(HEATMAP_MAGIC);
    out.extend_from_slice(&HEATMAP_VERSION.to_le_bytes());
    out.extend_from_slice(&(heatmap.width as u32).to_le_bytes());
    out.extend_from_slice(&(heatmap.height as u32).to_le_bytes());
    for v in &heatmap.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_heatmap(bytes: &[u8], path: &Path) -> Result<Heatmap> {
    let bad = |m: &str| Error::Format { path: path.into(), message: m.into() };
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    if bytes.len() < 16 || &bytes[..4] != HEATMAP_MAGIC {
        return Err(bad("not a heatmap file"));
    }
    if word(4) != HEATMAP_VERSION {
        return Err(bad("unsupported heatmap version"));
    }
    let (w, h) = (word(8) as usize, word(12) as usize);
    if bytes.len() != 16 + 4 * w * h {
        return Err(bad("length does not match dimensions"));
    }
    let values = bytes[16..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    Ok(Heatmap { width: w, height: h, values })
}

pub fn save_heatmap(heatmap: &Heatmap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, heatmap_bytes(heatmap)).map_err(Error::io(path))
}

pub fn load_heatmap(path: impl AsRef<Path>) -> Result<Heatmap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    parse_heatmap(&bytes, path)
}
