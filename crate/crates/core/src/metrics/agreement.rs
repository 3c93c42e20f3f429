//! Inter-rater agreement over ranked label tables.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::composition::SubVdp;
use crate::{Error, Result};

/// Most labels one rater may give an item.
pub const MAX_RANKS: usize = 3;

/// One rater's ranked labels for one item. An empty list means "None".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub item_id: String,
    #[serde(default)]
    pub domain: Option<String>,
    pub rater: String,
    pub ranks: Vec<SubVdp>,
}

pub fn validate_ranks(ranks: &[SubVdp]) -> Result<()> {
    if ranks.len() > MAX_RANKS {
        return Err(Error::InvalidArgument(format!("at most {MAX_RANKS} ranks allowed, got {}", ranks.len())));
    }
    for (i, r) in ranks.iter().enumerate() {
        if ranks[..i].contains(r) {
            return Err(Error::InvalidArgument(format!("label {r} ranked twice")));
        }
    }
    Ok(())
}

/// Labels of one rater keyed by item id.
pub type Column = BTreeMap<String, Vec<SubVdp>>;

/// Items × raters table of ranked labels. A rater may leave items unrated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatingTable {
    raters: BTreeSet<String>,
    domains: BTreeMap<String, Option<String>>,
    cells: BTreeMap<String, BTreeMap<String, Vec<SubVdp>>>,
}

impl RatingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rejects invalid ranks and repeated (item, rater) pairs.
    pub fn from_records(records: impl IntoIterator<Item = RatingRecord>) -> Result<Self> {
        let mut t = Self::new();
        for r in records {
            t.insert(r)?;
        }
        Ok(t)
    }

    pub fn insert(&mut self, record: RatingRecord) -> Result<()> {
        validate_ranks(&record.ranks)?;
        let row = self.cells.entry(record.item_id.clone()).or_default();
        if row.contains_key(&record.rater) {
            return Err(Error::InvalidArgument(format!("item {:?} rated twice by {:?}", record.item_id, record.rater)));
        }
        row.insert(record.rater.clone(), record.ranks);
        let domain = self.domains.entry(record.item_id).or_insert(None);
        if domain.is_none() {
            *domain = record.domain;
        }
        self.raters.insert(record.rater);
        Ok(())
    }

    /// Registers a rater who may not have rated anything yet.
    pub fn add_rater(&mut self, rater: &str) {
        self.raters.insert(rater.into());
    }

    pub fn raters(&self) -> impl Iterator<Item = &str> {
        self.raters.iter().map(String::as_str)
    }

    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.cells.keys().map(String::as_str)
    }

    pub fn item_count(&self) -> usize {
        self.cells.len()
    }

    pub fn domain(&self, item: &str) -> Option<&str> {
        self.domains.get(item).and_then(|d| d.as_deref())
    }

    pub fn get(&self, item: &str, rater: &str) -> Option<&[SubVdp]> {
        self.cells.get(item)?.get(rater).map(Vec::as_slice)
    }

    pub fn column(&self, rater: &str) -> Column {
        self.cells.iter().filter_map(|(item, row)| row.get(rater).map(|r| (item.clone(), r.clone()))).collect()
    }

    /// Rows ordered by item id, then rater.
    pub fn records(&self) -> Vec<RatingRecord> {
        let mut out = Vec::new();
        for (item, row) in &self.cells {
            for (rater, ranks) in row {
                out.push(RatingRecord { item_id: item.clone(), domain: self.domains[item].clone(), rater: rater.clone(), ranks: ranks.clone() });
            }
        }
        out
    }
}

/// Fleiss' kappa statistics. `kappa` is `None` when chance agreement is 1
/// (every rating in one category).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: Option<f64>,
    pub observed: f64,
    pub expected: f64,
    pub items: usize,
    pub raters: usize,
    /// Items left out because a rater had no usable rating for them.
    pub dropped_items: Vec<String>,
}

/// Fleiss' kappa from an items × categories count matrix in which every
/// row sums to the same number of raters `n ≥ 2`.
pub fn fleiss_kappa_counts(counts: &[Vec<u32>]) -> Result<Kappa> {
    let first = counts.first().ok_or_else(|| Error::InsufficientData { cell: "items".into(), needed: 1, available: 0 })?;
    let n: u32 = first.iter().sum();
    let k = first.len();
    if n < 2 {
        return Err(Error::InsufficientData { cell: "raters per item".into(), needed: 2, available: n as usize });
    }
    let mut column = vec![0u64; k];
    let mut agreement = 0.0;
    for row in counts {
        if row.len() != k {
            return Err(Error::LengthMismatch { left: row.len(), right: k });
        }
        let s: u32 = row.iter().sum();
        if s != n {
            return Err(Error::InvalidArgument(format!("every item needs {n} ratings, found {s}")));
        }
        let pairs: u64 = row.iter().map(|&c| c as u64 * (c as u64).saturating_sub(1)).sum();
        agreement += pairs as f64 / (n as f64 * (n as f64 - 1.0));
        for (acc, &c) in column.iter_mut().zip(row) {
            *acc += c as u64;
        }
    }
    let items = counts.len();
    let total = (items as u64 * n as u64) as f64;
    let observed = agreement / items as f64;
    let expected: f64 = column.iter().map(|&c| (c as f64 / total).powi(2)).sum();
    let kappa = if (1.0 - expected).abs() < 1e-15 { None } else { Some((observed - expected) / (1.0 - expected)) };
    Ok(Kappa { kappa, observed, expected, items, raters: n as usize, dropped_items: Vec::new() })
}

/// Category slot of a rating at `rank` (1-based): label index, or 9 for "None".
fn category(ranks: &[SubVdp], rank: usize) -> usize {
    ranks.get(rank - 1).map_or(SubVdp::ALL.len(), |l| l.index())
}

/// Fleiss' kappa over every registered rater at one rank.
///
/// A rater with fewer than `rank` labels on an item rated "None" there; an
/// item some rater never rated is dropped. With `exclude_none`, items with
/// any "None" at this rank are dropped instead.
pub fn fleiss_kappa(table: &RatingTable, rank: usize, exclude_none: bool) -> Result<Kappa> {
    if !(1..=MAX_RANKS).contains(&rank) {
        return Err(Error::InvalidArgument(format!("rank must be in 1..={MAX_RANKS}, got {rank}")));
    }
    let raters: Vec<&str> = table.raters().collect();
    if raters.len() < 2 {
        return Err(Error::InsufficientData { cell: "raters".into(), needed: 2, available: raters.len() });
    }
    let none = SubVdp::ALL.len();
    let mut counts = Vec::new();
    let mut dropped = Vec::new();
    'items: for item in table.items() {
        let mut row = vec![0u32; none + 1];
        for r in &raters {
            let Some(ranks) = table.get(item, r) else {
                dropped.push(String::from(item));
                continue 'items;
            };
            let c = category(ranks, rank);
            if exclude_none && c == none {
                dropped.push(String::from(item));
                continue 'items;
            }
            row[c] += 1;
        }
        counts.push(row);
    }
    if counts.is_empty() {
        return Err(Error::InsufficientData { cell: "fully co-rated items".into(), needed: 1, available: 0 });
    }
    let mut k = fleiss_kappa_counts(&counts)?;
    k.dropped_items = dropped;
    Ok(k)
}

/// Agreement between two raters' ranked labels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchRates {
    pub rank1: f64,
    pub rank2: f64,
    pub rank3: f64,
    pub any_single: f64,
    pub items: usize,
}

#[derive(Default)]
struct Tally {
    rank: [usize; 3],
    any: usize,
    items: usize,
}

impl Tally {
    fn add(&mut self, a: &[SubVdp], b: &[SubVdp]) {
        self.items += 1;
        for (i, hit) in self.rank.iter_mut().enumerate() {
            if matches!((a.get(i), b.get(i)), (Some(x), Some(y)) if x == y) {
                *hit += 1;
            }
        }
        if a.iter().any(|l| b.contains(l)) {
            self.any += 1;
        }
    }

    fn rates(&self) -> MatchRates {
        let f = |c: usize| if self.items == 0 { 0.0 } else { c as f64 / self.items as f64 };
        MatchRates { rank1: f(self.rank[0]), rank2: f(self.rank[1]), rank3: f(self.rank[2]), any_single: f(self.any), items: self.items }
    }
}

/// Per-rank and any-label match rates over the items both columns rated.
/// An empty rank never matches.
pub fn match_rates(a: &Column, b: &Column) -> MatchRates {
    let mut t = Tally::default();
    for (item, ra) in a {
        if let Some(rb) = b.get(item) {
            t.add(ra, rb);
        }
    }
    t.rates()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAccuracy {
    pub overall: MatchRates,
    pub per_domain: BTreeMap<String, MatchRates>,
}

/// Match rates of `rater` against `oracle`, overall and per item domain.
/// Every oracle item the rater labelled must carry at least one label.
pub fn oracle_accuracy(rater: &Column, oracle: &Column, domains: &BTreeMap<String, String>) -> Result<OracleAccuracy> {
    let mut overall = Tally::default();
    let mut per: BTreeMap<String, Tally> = BTreeMap::new();
    for (item, truth) in oracle {
        let Some(r) = rater.get(item) else { continue };
        if truth.is_empty() {
            return Err(Error::InvalidArgument(format!("oracle has no label for item {item:?}")));
        }
        overall.add(r, truth);
        if let Some(d) = domains.get(item) {
            per.entry(d.clone()).or_default().add(r, truth);
        }
    }
    Ok(OracleAccuracy { overall: overall.rates(), per_domain: per.into_iter().map(|(d, t)| (d, t.rates())).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SubVdp::*;

    fn rec(item: &str, rater: &str, ranks: &[SubVdp]) -> RatingRecord {
        RatingRecord { item_id: item.into(), domain: None, rater: rater.into(), ranks: ranks.to_vec() }
    }

    #[test]
    fn rank_validation() {
        assert!(validate_ranks(&[Color, Shape, Flowing]).is_ok());
        assert!(validate_ranks(&[Color, Color]).is_err());
        assert!(validate_ranks(&[Color, Shape, Flowing, Regular]).is_err());
    }

    #[test]
    fn duplicate_cells_rejected() {
        assert!(RatingTable::from_records([rec("a", "x", &[Color]), rec("a", "x", &[Shape])]).is_err());
    }

    #[test]
    fn single_rater_is_insufficient() {
        let t = RatingTable::from_records([rec("a", "x", &[Color])]).unwrap();
        assert!(matches!(fleiss_kappa(&t, 1, false), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn all_one_category_is_undefined() {
        let t = RatingTable::from_records([rec("a", "x", &[Color]), rec("a", "y", &[Color])]).unwrap();
        assert_eq!(fleiss_kappa(&t, 1, false).unwrap().kappa, None);
    }

    #[test]
    fn empty_ranks_are_the_none_category() {
        let t = RatingTable::from_records([rec("a", "x", &[]), rec("a", "y", &[]), rec("b", "x", &[Color]), rec("b", "y", &[Color])]).unwrap();
        assert_eq!(fleiss_kappa(&t, 1, false).unwrap().kappa, Some(1.0));
        let k = fleiss_kappa(&t, 1, true).unwrap();
        assert_eq!(k.items, 1);
        assert_eq!(k.dropped_items, vec![String::from("a")]);
    }
}
