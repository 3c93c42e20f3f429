use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vdp_core::composition::SubVdp;
use vdp_core::metrics::{fleiss_kappa, match_rates, RatingRecord, RatingTable};
use vdp_toolkit::cli::AgreementReport;
use vdp_toolkit::jsonl::{read_manifest, write_ratings};
use vdp_toolkit::pipeline::{load_heatmap, EvaluationReport};
use vdp_toolkit::png_io::load_png;
use vdp_toolkit::run_manifest::{sha256_hex, RunManifest};

fn vdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdp")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn ok(args: &[&str]) {
    let out = vdp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no JSON on stderr: {stderr}"));
    serde_json::from_str(line).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file under `dir` keyed by relative path.
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

fn without_timestamps(bytes: &[u8]) -> RunManifest {
    let mut m: RunManifest = serde_json::from_slice(bytes).unwrap();
    m.started_unix_ms = 0;
    m.finished_unix_ms = 0;
    m
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["generate", "--help"], &["serve", "--help"]] {
        assert_eq!(vdp(args).status.code(), Some(0), "{args:?}");
    }
    let out = vdp(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["generate", "augment-preview", "split", "train", "evaluate", "agreement", "gradcam", "serve"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}

#[test]
fn usage_errors_exit_two_without_side_effects() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let o = s(&out_dir);
    for args in [
        vec!["frobnicate"],
        vec!["generate", "--out", o],
        vec!["generate", "--count", "0", "--out", o],
        vec!["generate", "--count", "5", "--rules", "0-3", "--out", o],
        vec!["generate", "--count", "5", "--rules", "3-1", "--out", o],
        vec!["generate", "--count", "5", "--size", "4", "--out", o],
        vec!["generate", "--count", "5", "--workers", "0", "--out", o],
        vec!["generate", "--count", "5", "--seed", "-1", "--out", o],
        vec!["split", "--manifest", "m.jsonl", "--train-fraction", "1.5", "--out", o],
        vec!["train", "--manifest", "m.jsonl", "--epochs", "0", "--out", o],
        vec!["train", "--manifest", "m.jsonl", "--lr", "-1", "--out", o],
        vec!["gradcam", "--model", "m", "--image", "i", "--alpha", "2", "--out", o],
    ] {
        let out = vdp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&out)["error"]["kind"], "usage", "{args:?}");
        assert!(!out_dir.exists(), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let out = vdp(&["evaluate", "--model", "/no/such/model.json", "--manifest", "/no/such.jsonl", "--out", s(&o)]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "io");
    assert!(err["error"]["message"].as_str().unwrap().contains("model.json"));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"path\": 1}\n").unwrap();
    let out = vdp(&["train", "--manifest", s(&bad), "--out", s(&o)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "parse");
}

#[test]
fn generate_writes_images_manifest_and_run_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    ok(&["generate", "--style", "sdv1", "--rules", "1-32", "--count", "320", "--size", "32", "--seed", "4", "--out", s(&out)]);
    let rows = read_manifest(out.join("manifest.jsonl")).unwrap();
    assert_eq!(rows.len(), 320);
    let pngs = fs::read_dir(out.join("images")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png")).count();
    assert_eq!(pngs, 320);
    for r in rows.iter().step_by(37) {
        let img = load_png(out.join(&r.path)).unwrap();
        assert_eq!((img.width, img.height), (32, 32));
    }
    let mut per_rule = BTreeMap::new();
    for r in &rows {
        *per_rule.entry(r.rule_id.unwrap()).or_insert(0) += 1;
    }
    assert!(per_rule.len() == 32 && per_rule.values().all(|&c| c == 10));

    let run: RunManifest = serde_json::from_slice(&fs::read(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!((run.command.as_str(), run.seed), ("generate", 4));
    assert_eq!(run.outputs.len(), 1);
    assert_eq!(run.outputs[0].sha256, sha256_hex(&fs::read(out.join("manifest.jsonl")).unwrap()));
    let concat: String = rows.iter().map(|r| sha256_hex(&fs::read(out.join(&r.path)).unwrap())).collect();
    assert_eq!(run.settings["images_sha256"], sha256_hex(concat.as_bytes()));
    assert!(run.started_unix_ms <= run.finished_unix_ms);
}

#[test]
fn generation_artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let args = |w: &'static str| -> Vec<String> {
        ["generate", "--style", "sdv2", "--rules", "1-32", "--count", "64", "--size", "48", "--seed", "11", "--workers", w, "--out", s(&out)]
            .iter()
            .map(|a| a.to_string())
            .collect()
    };
    let run = |w| {
        if out.exists() {
            fs::remove_dir_all(&out).unwrap();
        }
        let a = args(w);
        ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
        let mut t = tree(&out);
        let m = without_timestamps(&t.remove(Path::new("run_manifest.json")).unwrap());
        (t, m)
    };
    let (first, m1) = run("1");
    let (again, m2) = run("1");
    assert_eq!(first, again);
    assert_eq!(m1, m2);
    let (threaded, m3) = run("2");
    assert_eq!(first, threaded);
    assert_eq!(m1.outputs, m3.outputs);
    assert_eq!(m1.settings, m3.settings);
}

#[test]
fn split_partitions_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["generate", "--rules", "1,11,27", "--count", "60", "--size", "16", "--out", s(&data)]);
    let sp = dir.path().join("split");
    ok(&["split", "--manifest", s(&data.join("manifest.jsonl")), "--train-fraction", "0.8", "--seed", "3", "--out", s(&sp)]);
    let train = read_manifest(sp.join("train.jsonl")).unwrap();
    let val = read_manifest(sp.join("val.jsonl")).unwrap();
    assert_eq!(train.len() + val.len(), 60);
    let mut names: Vec<String> =
        train.iter().chain(&val).map(|e| Path::new(&e.path).file_name().unwrap().to_string_lossy().into_owned()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 60);
    for e in train.iter().chain(&val) {
        assert!(Path::new(&e.path).is_absolute() && Path::new(&e.path).exists());
    }
    for c in [SubVdp::Color, SubVdp::Symmetric, SubVdp::Progressive] {
        assert_eq!(val.iter().filter(|e| e.label == c).count(), 4, "{c}");
    }
}

#[test]
fn train_evaluate_and_explain_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["generate", "--rules", "1,2,11,12,27,28", "--count", "36", "--size", "32", "--balance", "class", "--out", s(&data)]);
    let manifest = data.join("manifest.jsonl");
    let run_train = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        ok(&["train", "--manifest", s(&manifest), "--classes", "3", "--epochs", "2", "--seed", "5", "--workers", workers, "--out", s(&out)]);
        fs::read(out.join("model.json")).unwrap()
    };
    let model_bytes = run_train("m1", "1");
    assert_eq!(model_bytes, run_train("m2", "2"));
    let model = dir.path().join("m1/model.json");

    let out = vdp(&["train", "--manifest", s(&manifest), "--classes", "4", "--epochs", "1", "--out", s(&dir.path().join("m3"))]);
    assert_eq!(out.status.code(), Some(2));

    let ev = dir.path().join("ev");
    ok(&["evaluate", "--model", s(&model), "--manifest", s(&manifest), "--out", s(&ev)]);
    let report: EvaluationReport = serde_json::from_slice(&fs::read(ev.join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(report.count, 36);
    assert!(report.top1 <= report.top2 && report.top2 <= report.top3 && report.top3 == 1.0);
    assert!(fs::read_to_string(ev.join("evaluation.txt")).unwrap().contains("top3"));

    let rows = read_manifest(&manifest).unwrap();
    let image = data.join(&rows[0].path);
    let gc = dir.path().join("gc");
    ok(&["gradcam", "--model", s(&model), "--image", s(&image), "--class", "color", "--out", s(&gc)]);
    let overlay = load_png(gc.join("overlay.png")).unwrap();
    let heatmap = load_heatmap(gc.join("heatmap.vdph")).unwrap();
    assert_eq!((overlay.width, heatmap.width, heatmap.height), (32, 32, 32));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(gc.join("gradcam.json")).unwrap()).unwrap();
    assert_eq!(summary["class"], "color");
    let gc2 = dir.path().join("gc2");
    ok(&["gradcam", "--model", s(&model), "--image", s(&image), "--block", "1", "--out", s(&gc2)]);
    assert_eq!(load_heatmap(gc2.join("heatmap.vdph")).unwrap().values.len(), 32 * 32);
}

#[test]
fn augment_preview_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["generate", "--rules", "5", "--count", "1", "--size", "24", "--out", s(&data)]);
    let image = data.join(&read_manifest(data.join("manifest.jsonl")).unwrap()[0].path);
    let preview = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&["augment-preview", "--image", s(&image), "--count", "6", "--seed", seed, "--out", s(&out)]);
        let mut t = tree(&out);
        t.remove(Path::new("run_manifest.json"));
        t
    };
    let a = preview("a", "1");
    assert_eq!(a.len(), 7);
    assert_eq!(a, preview("b", "1"));
    assert_ne!(a, preview("c", "2"));
}

#[test]
fn agreement_matches_the_metrics_functions() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    for i in 0..12usize {
        for (r, rater) in ["ann", "bo", "cy"].iter().enumerate() {
            let first = SubVdp::ALL[(i + (r * i) % 3) % 9];
            let second = SubVdp::ALL[(i + 4) % 9];
            let ranks = if r > 0 && (i + r) % 5 == 0 { vec![] } else if first == second { vec![first] } else { vec![first, second] };
            records.push(RatingRecord { item_id: format!("i{i:02}"), domain: Some(if i % 2 == 0 { "ART" } else { "PHT" }.into()), rater: rater.to_string(), ranks });
        }
    }
    let table = RatingTable::from_records(records).unwrap();
    let ratings = dir.path().join("r.jsonl");
    write_ratings(&ratings, &table).unwrap();
    let out = dir.path().join("ag");
    ok(&["agreement", "--ratings", s(&ratings), "--oracle", "ann", "--out", s(&out)]);
    let report: AgreementReport = serde_json::from_slice(&fs::read(out.join("agreement.json")).unwrap()).unwrap();
    for rank in 1..=3 {
        assert_eq!(report.kappa[&format!("rank{rank}")], fleiss_kappa(&table, rank, false).ok(), "rank {rank}");
    }
    assert_eq!(report.match_rates.len(), 3);
    let ab = &report.match_rates[0];
    assert_eq!((ab.a.as_str(), ab.b.as_str()), ("ann", "bo"));
    assert_eq!(ab.rates, match_rates(&table.column("ann"), &table.column("bo")));
    assert_eq!(report.oracle.as_ref().unwrap().len(), 2);

    let missing = vdp(&["agreement", "--ratings", s(&ratings), "--oracle", "zed", "--out", s(&dir.path().join("x"))]);
    assert_eq!(missing.status.code(), Some(2));
}
