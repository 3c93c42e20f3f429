//! The `vdp` command line.
//!
//! Subcommands follow the experiment order: generate data, preview
//! augmentation, split, train, evaluate, measure rater agreement, explain
//! with heatmaps, and collect annotations. Every command takes `--seed`,
//! writes its artifacts under `--out` (or `--data-dir` for `serve`) and
//! leaves a `run_manifest.json` there.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print
//! one JSON object `{"error": {"kind", "message"}}` on stderr.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vdp_core::composition::{Style, SubVdp};
use vdp_core::dataset::{apply_scheme, split, Scheme};
use vdp_core::metrics::{fleiss_kappa, match_rates, oracle_accuracy, Kappa, OracleAccuracy, RatingTable, MAX_RANKS};
use vdp_core::nn::TrainConfig;
use vdp_core::rng::derive_seed;

use crate::generate::{generate_dataset, parse_rules, texture_registry, Balance, GeneratorConfig};
use crate::jsonl::{read_manifest, read_ratings, write_jsonl, write_manifest};
use crate::pipeline::{evaluate_manifest, explain, save_heatmap, train_manifest, AugmentMode, Checkpoint};
use crate::png_io::{load_png, save_png};
use crate::run_manifest::{digest_file, sha256_hex, unix_ms, FileDigest, RunManifest};
use crate::service::{self, Mode, PairRates, Store, StoreConfig};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "vdp", version, about = "Synthetic visual-design-principle data, classifier training and annotation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Base seed for every random choice the command makes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for generation, augmentation and image loading; results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic dataset and its manifest.
    Generate {
        #[arg(long, default_value = "sdv1")]
        style: Style,
        /// Rule ids, e.g. `1-32` or `1,2,11,12,27-30`.
        #[arg(long, default_value = "1-32")]
        rules: String,
        #[arg(long)]
        count: usize,
        /// Side of the square images in pixels.
        #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(16..))]
        size: u64,
        #[arg(long, value_enum, default_value_t = Balance::Rule)]
        balance: Balance,
        /// Extra PNG textures for the textured style.
        #[arg(long)]
        textures: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write randomly augmented copies of one image.
    AugmentPreview {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, value_enum, default_value_t = AugmentMode::Full)]
        augment: AugmentMode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Stratified train/val split, or a balancing scheme's train/test split.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        /// model1 ... model5; switches to a train/test split.
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long, default_value_t = 50)]
        test_per_cell: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train the classifier on every row of a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Expected number of classes in the manifest.
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long, default_value_t = 15)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        #[arg(long, default_value_t = 0.0256)]
        lr: f64,
        #[arg(long, default_value_t = 0.97)]
        decay_gamma: f64,
        #[arg(long, default_value_t = 2.4)]
        decay_period: f64,
        #[arg(long, default_value_t = 0.1)]
        val_fraction: f64,
        #[arg(long, value_enum, default_value_t = AugmentMode::Full)]
        augment: AugmentMode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Top-k accuracy, confusion matrix and per-class scores on a manifest.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fleiss' kappa and pairwise match rates of a rating table.
    Agreement {
        #[arg(long)]
        ratings: PathBuf,
        /// Rater treated as ground truth for oracle accuracy.
        #[arg(long)]
        oracle: Option<String>,
        /// Drop items with a "None" at the rank instead of counting it as a category.
        #[arg(long)]
        exclude_none: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Class-activation heatmap of one image.
    Gradcam {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Class to explain; defaults to the predicted one.
        #[arg(long)]
        class: Option<SubVdp>,
        /// Conv block to read (0-based); defaults to the last.
        #[arg(long)]
        block: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the annotation service.
    Serve {
        #[arg(long, env = "VDP_MANIFEST")]
        manifest: PathBuf,
        #[arg(long, env = "VDP_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long, value_enum, env = "VDP_MODE", default_value_t = Mode::Ranked)]
        mode: Mode,
        #[arg(long, env = "VDP_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Comma-separated annotator ids; when empty anyone may join.
        #[arg(long, env = "VDP_ANNOTATORS", value_delimiter = ',')]
        annotators: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::AugmentPreview { .. } => "augment-preview",
            Command::Split { .. } => "split",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Agreement { .. } => "agreement",
            Command::Gradcam { .. } => "gradcam",
            Command::Serve { .. } => "serve",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Generate { common, .. }
            | Command::AugmentPreview { common, .. }
            | Command::Split { common, .. }
            | Command::Train { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Agreement { common, .. }
            | Command::Gradcam { common, .. }
            | Command::Serve { common, .. } => common,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl From<vdp_core::Error> for CliError {
    fn from(e: vdp_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Runtime(e) => e.kind(),
        };
        serde_json::json!({ "error": { "kind": kind, "message": self.to_string() } }).to_string()
    }
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                print!("{e}");
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            eprintln!("{}", usage(e.to_string().trim_end()).to_json());
            return 2;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &argv) {
        Ok(dir) => {
            log::info!("{} finished; outputs in {}", cli.command.name(), dir.display());
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Output bookkeeping shared by all commands.
struct Run<'a> {
    command: &'a Command,
    argv: &'a [String],
    started: u64,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    settings: serde_json::Value,
}

impl Run<'_> {
    fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    fn output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    fn finish(self, dir: &Path, workers: usize) -> Result<PathBuf, CliError> {
        let common = self.command.common();
        let manifest = RunManifest {
            tool: "vdp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.name().into(),
            argv: self.argv.to_vec(),
            seed: common.seed,
            workers,
            inputs: self.inputs,
            outputs: self.outputs,
            settings: self.settings,
            started_unix_ms: self.started,
            finished_unix_ms: unix_ms(),
        };
        manifest.write(dir)?;
        Ok(dir.to_path_buf())
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, json + "\n").map_err(Error::io(path))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(Error::io(path))?;
    Ok(())
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Validates flags, then runs the command inside a pool of the requested size.
pub fn execute(command: &Command, argv: &[String]) -> Result<PathBuf, CliError> {
    validate(command)?;
    let workers = command.common().workers.map(|w| w as usize).unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(Error::Invalid(format!("thread pool: {e}"))))?;
    let run = Run { command, argv, started: unix_ms(), inputs: Vec::new(), outputs: Vec::new(), settings: serde_json::Value::Null };
    pool.install(|| dispatch(command, run, workers))
}

fn validate(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Generate { rules, count, .. } => {
            let rules = parse_rules(rules).map_err(|e| usage(e.to_string()))?;
            if *count == 0 {
                return Err(usage("--count must be at least 1"));
            }
            if let Some(bad) = rules.iter().find(|r| !(1..=32).contains(*r)) {
                return Err(usage(format!("unknown rule id {bad} (expected 1..=32)")));
            }
        }
        Command::AugmentPreview { count, .. } if *count == 0 => return Err(usage("--count must be at least 1")),
        Command::Split { train_fraction, .. } if !(*train_fraction > 0.0 && *train_fraction < 1.0) => {
            return Err(usage("--train-fraction must be in (0, 1)"))
        }
        Command::Train { epochs, batch, lr, decay_gamma, decay_period, val_fraction, classes, .. } => {
            let config = TrainConfig {
                lr0: *lr,
                decay_gamma: *decay_gamma,
                decay_period: *decay_period,
                epochs: *epochs,
                batch: *batch,
                seed: 0,
                val_fraction: *val_fraction,
                num_classes: classes.unwrap_or(2).max(2),
            };
            config.validate().map_err(|e| usage(e.to_string()))?;
            if classes.is_some_and(|c| c < 2) {
                return Err(usage("--classes must be at least 2"));
            }
        }
        Command::Gradcam { alpha, .. } if !(0.0..=1.0).contains(alpha) => return Err(usage("--alpha must be in [0, 1]")),
        _ => {}
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub raters: Vec<String>,
    pub items: usize,
    pub exclude_none: bool,
    /// Fleiss' kappa per rank (`rank1` ... `rank3`); `None` when it is undefined or the data are insufficient.
    pub kappa: BTreeMap<String, Option<Kappa>>,
    pub match_rates: Vec<PairRates>,
    /// Each other rater against the oracle rater.
    pub oracle: Option<BTreeMap<String, OracleAccuracy>>,
}

/// Kappa at every rank and all pairwise match rates.
pub fn agreement_report(table: &RatingTable, exclude_none: bool, oracle: Option<&str>) -> Result<AgreementReport, CliError> {
    let raters: Vec<String> = table.raters().map(String::from).collect();
    let kappa = (1..=MAX_RANKS).map(|r| (format!("rank{r}"), fleiss_kappa(table, r, exclude_none).ok())).collect();
    let mut pairs = Vec::new();
    for (i, a) in raters.iter().enumerate() {
        for b in &raters[i + 1..] {
            pairs.push(PairRates { a: a.clone(), b: b.clone(), rates: match_rates(&table.column(a), &table.column(b)) });
        }
    }
    let oracle = match oracle {
        None => None,
        Some(o) => {
            if !raters.iter().any(|r| r == o) {
                return Err(usage(format!("oracle rater {o:?} is not in the table")));
            }
            let truth = table.column(o);
            let domains: BTreeMap<String, String> =
                table.items().filter_map(|i| table.domain(i).map(|d| (i.to_string(), d.to_string()))).collect();
            let mut out = BTreeMap::new();
            for r in raters.iter().filter(|r| *r != o) {
                out.insert(r.clone(), oracle_accuracy(&table.column(r), &truth, &domains)?);
            }
            Some(out)
        }
    };
    Ok(AgreementReport { raters, items: table.item_count(), exclude_none, kappa, match_rates: pairs, oracle })
}

fn agreement_text(report: &AgreementReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "raters {}  items {}", report.raters.len(), report.items);
    for (rank, k) in &report.kappa {
        match k {
            Some(k) => {
                let v = k.kappa.map_or("undefined".to_string(), |v| format!("{v:.4}"));
                let _ = writeln!(s, "{rank:<6} kappa {v:>10}  items {:>5}  dropped {:>5}", k.items, k.dropped_items.len());
            }
            None => {
                let _ = writeln!(s, "{rank:<6} kappa {:>10}", "n/a");
            }
        }
    }
    let _ = writeln!(s, "\n{:<12} {:<12} {:>7} {:>7} {:>7} {:>7} {:>6}", "rater a", "rater b", "rank1", "rank2", "rank3", "any", "items");
    for p in &report.match_rates {
        let r = &p.rates;
        let _ = writeln!(s, "{:<12} {:<12} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>6}", p.a, p.b, r.rank1, r.rank2, r.rank3, r.any_single, r.items);
    }
    s
}

fn dispatch(command: &Command, mut run: Run<'_>, workers: usize) -> Result<PathBuf, CliError> {
    let seed = command.common().seed;
    match command {
        Command::Generate { style, rules, count, size, balance, textures, out, .. } => {
            let config = GeneratorConfig {
                style: *style,
                rules: parse_rules(rules).map_err(|e| usage(e.to_string()))?,
                count: *count,
                base_seed: seed,
                size: *size as usize,
                balance: *balance,
            };
            let registry = texture_registry(textures.as_deref())?;
            config.validate(&registry).map_err(|e| usage(e.to_string()))?;
            create_dir(out)?;
            let rows = generate_dataset(&config, &registry, out)?;
            let manifest = out.join("manifest.jsonl");
            write_manifest(&manifest, &rows)?;
            run.output(&manifest)?;
            let digests: Vec<String> = rows
                .par_iter()
                .map(|r| digest_file(&out.join(&r.path)).map(|d| d.sha256))
                .collect::<Result<_, _>>()?;
            run.settings = serde_json::json!({ "generator": config, "images_sha256": sha256_hex(digests.concat().as_bytes()) });
            run.finish(out, workers)
        }
        Command::AugmentPreview { image, count, augment, out, .. } => {
            let img = load_png(image)?;
            run.input(image)?;
            create_dir(out)?;
            let sampler = augment.sampler().unwrap_or(vdp_core::augment::PlanSampler {
                flip_probability: 0.0,
                rotate_probability: 0.0,
                gbt_probability: 0.0,
                gbt_limit: 0.0,
                bg_probability: 0.0,
                bg_limit: 0.0,
            });
            let plans: Vec<_> = (0..*count as u64).map(|i| sampler.sample(derive_seed(seed, i))).collect();
            let names: Vec<PathBuf> = (0..*count).map(|i| out.join(format!("augment_{i:03}.png"))).collect();
            plans
                .par_iter()
                .zip(&names)
                .map(|(plan, path)| save_png(&vdp_core::augment::apply_plan(&img, plan), path))
                .collect::<Result<Vec<_>, _>>()?;
            let plan_path = out.join("plans.jsonl");
            write_jsonl(&plan_path, &plans)?;
            run.output(&plan_path)?;
            for n in &names {
                run.output(n)?;
            }
            run.settings = serde_json::json!({ "augment": augment, "sampler": sampler, "count": count });
            run.finish(out, workers)
        }
        Command::Split { manifest, train_fraction, scheme, test_per_cell, out, .. } => {
            let rows = read_manifest(manifest)?;
            run.input(manifest)?;
            create_dir(out)?;
            // Output rows keep paths valid relative to the new location.
            let base = manifest_dir(manifest);
            let rebase = |mut v: Vec<vdp_core::dataset::ManifestEntry>| -> Vec<vdp_core::dataset::ManifestEntry> {
                for e in &mut v {
                    let p = crate::pipeline::resolve(&base, e);
                    e.path = fs::canonicalize(&p).unwrap_or(p).to_string_lossy().into_owned();
                }
                v
            };
            let (first, second, names, per_cell) = match scheme {
                None => {
                    let (tr, va) = split(&rows, *train_fraction, seed)?;
                    (tr, va, ("train.jsonl", "val.jsonl"), None)
                }
                Some(s) => {
                    let r = apply_scheme(&rows, *s, *test_per_cell, seed)?;
                    (r.train, r.test, ("train.jsonl", "test.jsonl"), r.per_cell)
                }
            };
            let counts = serde_json::json!({ names.0: first.len(), names.1: second.len(), "per_cell": per_cell });
            for (rows, name) in [(rebase(first), names.0), (rebase(second), names.1)] {
                let p = out.join(name);
                write_manifest(&p, &rows)?;
                run.output(&p)?;
            }
            run.settings = serde_json::json!({ "train_fraction": train_fraction, "scheme": scheme, "test_per_cell": test_per_cell, "counts": counts });
            run.finish(out, workers)
        }
        Command::Train { manifest, classes, epochs, batch, lr, decay_gamma, decay_period, val_fraction, augment, out, .. } => {
            let rows = read_manifest(manifest)?;
            run.input(manifest)?;
            let present = crate::pipeline::manifest_classes(&rows).len();
            if let Some(c) = classes {
                if *c != present {
                    return Err(usage(format!("--classes {c} but the manifest has {present} classes")));
                }
            }
            let config = TrainConfig {
                lr0: *lr,
                decay_gamma: *decay_gamma,
                decay_period: *decay_period,
                epochs: *epochs,
                batch: *batch,
                seed,
                val_fraction: *val_fraction,
                num_classes: present,
            };
            create_dir(out)?;
            let ck = train_manifest(&manifest_dir(manifest), &rows, &config, *augment)?;
            let model = out.join("model.json");
            ck.save(&model)?;
            let report = out.join("training_report.json");
            write_json(&report, &ck.report)?;
            run.output(&model)?;
            run.output(&report)?;
            run.settings = serde_json::json!({ "train": config, "augment": augment, "classes": ck.classes, "architecture": ck.model.arch });
            run.finish(out, workers)
        }
        Command::Evaluate { model, manifest, out, .. } => {
            let ck = Checkpoint::load(model)?;
            let rows = read_manifest(manifest)?;
            run.input(model)?;
            run.input(manifest)?;
            create_dir(out)?;
            let report = evaluate_manifest(&ck, &manifest_dir(manifest), &rows)?;
            let json = out.join("evaluation.json");
            let text = out.join("evaluation.txt");
            write_json(&json, &report)?;
            write_text(&text, &report.to_text())?;
            run.output(&json)?;
            run.output(&text)?;
            run.finish(out, workers)
        }
        Command::Agreement { ratings, oracle, exclude_none, out, .. } => {
            let table = read_ratings(ratings)?;
            run.input(ratings)?;
            create_dir(out)?;
            let report = agreement_report(&table, *exclude_none, oracle.as_deref())?;
            let json = out.join("agreement.json");
            let text = out.join("agreement.txt");
            write_json(&json, &report)?;
            write_text(&text, &agreement_text(&report))?;
            run.output(&json)?;
            run.output(&text)?;
            run.settings = serde_json::json!({ "exclude_none": exclude_none, "oracle": oracle });
            run.finish(out, workers)
        }
        Command::Gradcam { model, image, class, block, alpha, out, .. } => {
            let ck = Checkpoint::load(model)?;
            let img = load_png(image)?;
            run.input(model)?;
            run.input(image)?;
            create_dir(out)?;
            let (target, heatmap, over) = explain(&ck, &img, *class, *block, *alpha)?;
            let png = out.join("overlay.png");
            let raw = out.join("heatmap.vdph");
            let summary = out.join("gradcam.json");
            save_png(&over, &png)?;
            save_heatmap(&heatmap, &raw)?;
            write_json(
                &summary,
                &serde_json::json!({ "class": ck.classes[target], "class_index": target, "entropy": heatmap.entropy(), "width": heatmap.width, "height": heatmap.height }),
            )?;
            for p in [&png, &raw, &summary] {
                run.output(p)?;
            }
            run.settings = serde_json::json!({ "alpha": alpha, "class": class, "block": block });
            run.finish(out, workers)
        }
        Command::Serve { manifest, data_dir, mode, listen, annotators, .. } => {
            let annotators: Vec<String> = annotators.iter().map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
            let store = Store::open(StoreConfig { manifest: manifest.clone(), data_dir: data_dir.clone(), mode: *mode, annotators: annotators.clone(), seed })?;
            run.input(manifest)?;
            run.settings = serde_json::json!({ "mode": mode, "listen": listen.to_string(), "annotators": annotators });
            let dir = run.finish(data_dir, workers)?;
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::Runtime(Error::Invalid(format!("runtime: {e}"))))?;
            rt.block_on(service::serve(store, *listen, async {
                let _ = tokio::signal::ctrl_c().await;
            }))
            .map_err(|e| CliError::Runtime(Error::Io { path: PathBuf::from(listen.to_string()), source: e }))?;
            Ok(dir)
        }
    }
}
