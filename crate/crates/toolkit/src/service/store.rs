//! Annotation state: corpus, per-annotator task order and the journal.
//!
//! `journal.jsonl` holds one record per line in submission order. On open
//! the journal is compacted: the latest record per (item, annotator) is
//! kept and superseded ones move to `audit.jsonl`. A resubmission appends
//! the replaced record to the audit log before the new one is journaled.
//! Every write is fsync'd before it is acknowledged.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vdp_core::composition::SubVdp;
use vdp_core::metrics::{fleiss_kappa, match_rates, validate_ranks, Kappa, MatchRates, RatingRecord, RatingTable};
use vdp_core::rng::{derive_seed, rng_from_seed};

use crate::jsonl::{read_manifest, to_jsonl};
use crate::pipeline::resolve;
use crate::Error;

pub const JOURNAL: &str = "journal.jsonl";
pub const AUDIT: &str = "audit.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One label per item.
    Single,
    /// Up to three labels, most relevant first.
    Ranked,
}

/// Why an item got no label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkipReason {
    /// The "other" button: none of the classes fits.
    Other,
    /// No design principle is present.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub ranks: Vec<SubVdp>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<SkipReason>,
    /// Milliseconds since the Unix epoch; stamped by the server when absent.
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error(transparent)]
    Storage(#[from] Error),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Validation(_) => "validation",
            ServiceError::UnknownAnnotator(_) => "unknown_annotator",
            ServiceError::UnknownItem(_) => "unknown_item",
            ServiceError::Storage(_) => "storage",
        }
    }
}

type ServiceResult<T> = Result<T, ServiceError>;

#[derive(Debug, Clone)]
pub struct StoreConfig {
    pub manifest: PathBuf,
    pub data_dir: PathBuf,
    pub mode: Mode,
    /// Registered annotators. Empty: anyone asking for a task is registered.
    pub annotators: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub path: PathBuf,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub item_id: String,
    pub image_url: String,
    pub domain: String,
    pub mode: Mode,
    /// Items this annotator has already submitted.
    pub completed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextTask {
    Task(Task),
    Done { total: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub item_id: String,
    pub annotator_id: String,
    pub replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorStats {
    pub submitted: usize,
    /// Fraction of submissions carrying 0, 1, 2 and 3 labels.
    pub label_counts: [f64; 4],
    pub none: usize,
    pub other: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRates {
    pub a: String,
    pub b: String,
    pub rates: MatchRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mode: Mode,
    pub items: usize,
    pub annotators: BTreeMap<String, AnnotatorStats>,
    /// Rank-1 Fleiss' kappa over items every registered annotator labelled.
    pub kappa: Option<Kappa>,
    pub insufficient_data: bool,
    pub match_rates: Vec<PairRates>,
}

pub struct Store {
    config: StoreConfig,
    items: Vec<Item>,
    index: HashMap<String, usize>,
    registered: BTreeSet<String>,
    orders: HashMap<String, Vec<usize>>,
    latest: BTreeMap<(String, String), AnnotationRecord>,
    journal: File,
    audit: File,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn append(file: &mut File, path: &Path, records: &[AnnotationRecord]) -> Result<(), Error> {
    if records.is_empty() {
        return Ok(());
    }
    file.write_all(to_jsonl(records).as_bytes()).map_err(Error::io(path))?;
    file.sync_data().map_err(Error::io(path))
}

fn open_append(path: &Path) -> Result<File, Error> {
    OpenOptions::new().create(true).append(true).open(path).map_err(Error::io(path))
}

/// Reads a record log; a torn final line (crash mid-write) is dropped.
fn read_journal(path: &Path) -> Result<Vec<AnnotationRecord>, Error> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::Io { path: path.into(), source: e }),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>().map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() => log::warn!("{}: dropping torn final line", path.display()),
            Err(e) => return Err(Error::Parse { path: path.into(), line: i + 1, message: e.to_string() }),
        }
    }
    Ok(out)
}

impl Store {
    pub fn open(config: StoreConfig) -> Result<Self, Error> {
        let entries = read_manifest(&config.manifest)?;
        let base = config.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut items = Vec::with_capacity(entries.len());
        let mut index = HashMap::new();
        for e in &entries {
            let path = resolve(&base, e);
            let item_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(&e.path).to_string();
            if index.insert(item_id.clone(), items.len()).is_some() {
                return Err(Error::Format { path: config.manifest.clone(), message: format!("two images share the item id {item_id:?}") });
            }
            items.push(Item { item_id, path, domain: e.domain.name().into() });
        }
        fs::create_dir_all(&config.data_dir).map_err(Error::io(&config.data_dir))?;

        let journal_path = config.data_dir.join(JOURNAL);
        let audit_path = config.data_dir.join(AUDIT);
        let mut latest: BTreeMap<(String, String), AnnotationRecord> = BTreeMap::new();
        let mut superseded = Vec::new();
        for r in read_journal(&journal_path)? {
            if let Some(old) = latest.insert((r.item_id.clone(), r.annotator_id.clone()), r) {
                superseded.push(old);
            }
        }
        // Overwrites are audited at submit time; only add what a crash left out.
        let audited = read_journal(&audit_path)?;
        superseded.retain(|r| !audited.contains(r));
        let mut audit = open_append(&audit_path)?;
        append(&mut audit, &audit_path, &superseded)?;

        // Rewrite in submission order so replays stay stable.
        let mut kept: Vec<AnnotationRecord> = latest.values().cloned().collect();
        kept.sort_by_key(|r| r.timestamp);
        let tmp = config.data_dir.join("journal.jsonl.tmp");
        {
            let mut f = File::create(&tmp).map_err(Error::io(&tmp))?;
            f.write_all(to_jsonl(&kept).as_bytes()).map_err(Error::io(&tmp))?;
            f.sync_all().map_err(Error::io(&tmp))?;
        }
        fs::rename(&tmp, &journal_path).map_err(Error::io(&journal_path))?;
        if let Ok(dir) = File::open(&config.data_dir) {
            let _ = dir.sync_all();
        }
        let journal = open_append(&journal_path)?;

        let mut registered: BTreeSet<String> = config.annotators.iter().cloned().collect();
        if config.annotators.is_empty() {
            registered.extend(latest.keys().map(|(_, a)| a.clone()));
        }
        Ok(Self { config, items, index, registered, orders: HashMap::new(), latest, journal, audit })
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, item_id: &str) -> Option<&Item> {
        self.index.get(item_id).map(|&i| &self.items[i])
    }

    pub fn registered(&self) -> impl Iterator<Item = &str> {
        self.registered.iter().map(String::as_str)
    }

    fn check_annotator(&mut self, annotator: &str) -> ServiceResult<()> {
        if annotator.is_empty() {
            return Err(ServiceError::Validation("annotator id must not be empty".into()));
        }
        if !self.registered.contains(annotator) {
            if !self.config.annotators.is_empty() {
                return Err(ServiceError::UnknownAnnotator(annotator.into()));
            }
            self.registered.insert(annotator.into());
        }
        Ok(())
    }

    /// Item order for one annotator: a shuffle seeded by the service seed and
    /// a digest of the annotator id.
    fn order(&mut self, annotator: &str) -> &[usize] {
        let n = self.items.len();
        let seed = self.config.seed;
        self.orders.entry(annotator.into()).or_insert_with(|| {
            let digest = Sha256::digest(annotator.as_bytes());
            let key = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng_from_seed(derive_seed(seed, key)));
            order
        })
    }

    fn completed(&self, annotator: &str) -> usize {
        self.latest.keys().filter(|(_, a)| a == annotator).count()
    }

    /// First item in the annotator's order without a submission, so retries
    /// get the same item until it is submitted.
    pub fn next_task(&mut self, annotator: &str) -> ServiceResult<NextTask> {
        self.check_annotator(annotator)?;
        let order = self.order(annotator).to_vec();
        let total = self.items.len();
        let pending = order.into_iter().find(|&i| !self.latest.contains_key(&(self.items[i].item_id.clone(), annotator.to_string())));
        Ok(match pending {
            None => NextTask::Done { total },
            Some(i) => {
                let item = &self.items[i];
                NextTask::Task(Task {
                    item_id: item.item_id.clone(),
                    image_url: format!("/api/image/{}", item.item_id),
                    domain: item.domain.clone(),
                    mode: self.config.mode,
                    completed: self.completed(annotator),
                    total,
                })
            }
        })
    }

    pub fn validate(&self, record: &AnnotationRecord) -> ServiceResult<()> {
        let invalid = |m: String| Err(ServiceError::Validation(m));
        if record.mode != self.config.mode {
            return invalid(format!("service runs in {:?} mode, record says {:?}", self.config.mode, record.mode).to_lowercase());
        }
        if record.mode == Mode::Single && record.ranks.len() > 1 {
            return invalid(format!("single mode takes at most one label, got {}", record.ranks.len()));
        }
        validate_ranks(&record.ranks).map_err(|e| ServiceError::Validation(e.to_string()))?;
        if !record.ranks.is_empty() && record.reason.is_some() {
            return invalid("a skip reason is only valid without labels".into());
        }
        if !self.index.contains_key(&record.item_id) {
            return Err(ServiceError::UnknownItem(record.item_id.clone()));
        }
        Ok(())
    }

    /// Validates, persists, then acknowledges.
    pub fn submit(&mut self, mut record: AnnotationRecord) -> ServiceResult<Ack> {
        self.check_annotator(&record.annotator_id)?;
        self.validate(&record)?;
        if record.ranks.is_empty() && record.reason.is_none() {
            record.reason = Some(match record.mode {
                Mode::Single => SkipReason::Other,
                Mode::Ranked => SkipReason::None,
            });
        }
        record.timestamp.get_or_insert_with(now_ms);
        let key = (record.item_id.clone(), record.annotator_id.clone());
        let previous = self.latest.get(&key).cloned();
        if let Some(old) = &previous {
            let path = self.config.data_dir.join(AUDIT);
            append(&mut self.audit, &path, std::slice::from_ref(old))?;
        }
        let path = self.config.data_dir.join(JOURNAL);
        append(&mut self.journal, &path, std::slice::from_ref(&record))?;
        let ack = Ack { item_id: record.item_id.clone(), annotator_id: record.annotator_id.clone(), replaced: previous.is_some() };
        self.latest.insert(key, record);
        Ok(ack)
    }

    pub fn records(&self) -> impl Iterator<Item = &AnnotationRecord> {
        self.latest.values()
    }

    /// Current annotations as a rating table, items tagged with their domain.
    pub fn rating_table(&self) -> RatingTable {
        let records = self.latest.values().map(|r| RatingRecord {
            item_id: r.item_id.clone(),
            domain: self.item(&r.item_id).map(|i| i.domain.clone()),
            rater: r.annotator_id.clone(),
            ranks: r.ranks.clone(),
        });
        RatingTable::from_records(records).expect("stored records are validated and unique per key")
    }

    pub fn export_jsonl(&self) -> String {
        to_jsonl(&self.rating_table().records())
    }

    pub fn stats(&self) -> Stats {
        let mut annotators = BTreeMap::new();
        for a in &self.registered {
            let mine: Vec<&AnnotationRecord> = self.latest.values().filter(|r| &r.annotator_id == a).collect();
            let mut counts = [0usize; 4];
            for r in &mine {
                counts[r.ranks.len().min(3)] += 1;
            }
            let n = mine.len();
            let frac = counts.map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 });
            let reason = |s: SkipReason| mine.iter().filter(|r| r.ranks.is_empty() && r.reason == Some(s)).count();
            annotators.insert(a.clone(), AnnotatorStats { submitted: n, label_counts: frac, none: reason(SkipReason::None), other: reason(SkipReason::Other) });
        }

        let mut table = RatingTable::new();
        for r in self.latest.values().filter(|r| self.registered.contains(&r.annotator_id)) {
            table
                .insert(RatingRecord { item_id: r.item_id.clone(), domain: None, rater: r.annotator_id.clone(), ranks: r.ranks.clone() })
                .expect("stored records are validated and unique per key");
        }
        for a in &self.registered {
            table.add_rater(a);
        }
        let kappa = fleiss_kappa(&table, 1, true).ok();

        let raters: Vec<&String> = self.registered.iter().collect();
        let mut pairs = Vec::new();
        for (i, a) in raters.iter().enumerate() {
            for b in &raters[i + 1..] {
                pairs.push(PairRates { a: (*a).clone(), b: (*b).clone(), rates: match_rates(&table.column(a), &table.column(b)) });
            }
        }
        Stats {
            mode: self.config.mode,
            items: self.items.len(),
            annotators,
            insufficient_data: kappa.is_none(),
            kappa,
            match_rates: pairs,
        }
    }
}
