//! Manifests, stratified splits and the five class/domain balancing schemes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::composition::{Principle, SubVdp};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Domain {
    /// Photographs.
    Pht,
    /// Artworks.
    Art,
    /// Architecture.
    Arc,
    /// Synthetic compositions.
    Syn,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Pht => "PHT",
            Domain::Art => "ART",
            Domain::Arc => "ARC",
            Domain::Syn => "SYN",
        }
    }
}

impl core::str::FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Domain::Pht, Domain::Art, Domain::Arc, Domain::Syn]
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown domain {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: SubVdp,
    #[serde(default)]
    pub rule_id: Option<u8>,
    pub domain: Domain,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Rejects repeated image paths.
pub fn check_unique_paths(entries: &[ManifestEntry]) -> Result<()> {
    let mut seen = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        if let Some(j) = seen.insert(e.path.as_str(), i) {
            return Err(Error::InvalidArgument(format!("duplicate path {:?} at rows {j} and {i}", e.path)));
        }
    }
    Ok(())
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("train fraction must be in (0, 1), got {fraction}")))
    }
}

/// Train share of a class of `n` items: `round(fraction·n)`, at least 1.
pub fn train_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1.min(n), n)
}

/// Stratified split of item indices by `labels`. Within each label the
/// items are shuffled with a seed derived from `(seed, label)` and the
/// first [`train_count`] go to train. Both outputs are in ascending order.
pub fn split_indices(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::EmptyManifest);
    }
    check_fraction(train_fraction)?;
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut held = Vec::new();
    for (label, mut idx) in by_label {
        idx.shuffle(&mut rng_from_seed(derive_seed(seed, label as u64)));
        let k = train_count(idx.len(), train_fraction);
        train.extend_from_slice(&idx[..k]);
        held.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    held.sort_unstable();
    Ok((train, held))
}

/// Stratified train/validation split. Rows are returned with their `split`
/// field set.
pub fn split(entries: &[ManifestEntry], train_fraction: f64, seed: u64) -> Result<(Vec<ManifestEntry>, Vec<ManifestEntry>)> {
    let labels: Vec<usize> = entries.iter().map(|e| e.label.index()).collect();
    let (tr, va) = split_indices(&labels, train_fraction, seed)?;
    let pick = |idx: Vec<usize>, s: Split| idx.into_iter().map(|i| ManifestEntry { split: s, ..entries[i].clone() }).collect();
    Ok((pick(tr, Split::Train), pick(va, Split::Val)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Per-domain models on all available data.
    Model1,
    /// One pooled model on all available data.
    Model2,
    /// Per-domain models, every (domain, label) cell cut to the same size.
    Model3,
    /// One pooled model over the equalized cells of `Model3`.
    Model4,
    /// One pooled model over the three principles, equalized per
    /// (domain, principle).
    Model5,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Model1, Scheme::Model2, Scheme::Model3, Scheme::Model4, Scheme::Model5];

    /// Whether one model is trained over all domains together.
    pub fn pooled(self) -> bool {
        !matches!(self, Scheme::Model1 | Scheme::Model3)
    }
}

impl core::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "model1" | "1" => Ok(Scheme::Model1),
            "model2" | "2" => Ok(Scheme::Model2),
            "model3" | "3" => Ok(Scheme::Model3),
            "model4" | "4" => Ok(Scheme::Model4),
            "model5" | "5" => Ok(Scheme::Model5),
            _ => Err(Error::InvalidArgument(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSplit {
    pub scheme: Scheme,
    pub train: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
    /// Training items taken from each balancing cell, for equalizing schemes.
    pub per_cell: Option<usize>,
}

impl SchemeSplit {
    /// Training count per class of the scheme (labels, or principles for
    /// `Model5`) after pooling domains.
    pub fn train_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for e in &self.train {
            let key = match self.scheme {
                Scheme::Model5 => format!("{:?}", e.label.principle()).to_ascii_lowercase(),
                _ => String::from(e.label.name()),
            };
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }
}

fn cell_name(domain: Domain, label: &str) -> String {
    format!("{}/{}", domain.name(), label)
}

fn floor10(n: usize) -> usize {
    if n >= 10 {
        n - n % 10
    } else {
        n
    }
}

/// Builds train/test sets for one balancing scheme.
///
/// Test items are set aside first: `test_per_cell` random items from every
/// (domain, label) cell, the same for all schemes given `seed`. Cells are
/// the full product of the domains and labels present. Then:
///
/// - `Model1`, `Model2`: every remaining item trains.
/// - `Model3`, `Model4`: the smallest remaining cell, rounded down to a
///   multiple of ten, is taken from every cell.
/// - `Model5`: labels are grouped by principle; the smallest remaining
///   (domain, principle) total is taken from every (domain, principle).
pub fn apply_scheme(entries: &[ManifestEntry], scheme: Scheme, test_per_cell: usize, seed: u64) -> Result<SchemeSplit> {
    if entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    check_unique_paths(entries)?;
    let mut domains: Vec<Domain> = entries.iter().map(|e| e.domain).collect();
    domains.sort_unstable();
    domains.dedup();
    let mut labels: Vec<SubVdp> = entries.iter().map(|e| e.label).collect();
    labels.sort_unstable();
    labels.dedup();

    let mut cells: BTreeMap<(Domain, SubVdp), Vec<usize>> = BTreeMap::new();
    for &d in &domains {
        for &l in &labels {
            cells.insert((d, l), Vec::new());
        }
    }
    for (i, e) in entries.iter().enumerate() {
        cells.get_mut(&(e.domain, e.label)).expect("cell exists").push(i);
    }

    let mut test = Vec::new();
    let mut rest: BTreeMap<(Domain, SubVdp), Vec<usize>> = BTreeMap::new();
    for (&(d, l), idx) in &cells {
        if idx.len() < test_per_cell {
            return Err(Error::InsufficientData { cell: cell_name(d, l.name()), needed: test_per_cell, available: idx.len() });
        }
        let mut idx = idx.clone();
        idx.shuffle(&mut rng_from_seed(derive_seed(seed, (d as u64) << 8 | l as u64)));
        test.extend_from_slice(&idx[..test_per_cell]);
        rest.insert((d, l), idx[test_per_cell..].to_vec());
    }

    let (train, per_cell) = match scheme {
        Scheme::Model1 | Scheme::Model2 => (rest.values().flatten().copied().collect::<Vec<_>>(), None),
        Scheme::Model3 | Scheme::Model4 => {
            let base = floor10(rest.values().map(Vec::len).min().unwrap_or(0));
            if base == 0 {
                let (&(d, l), v) = rest.iter().min_by_key(|(_, v)| v.len()).expect("non-empty");
                return Err(Error::InsufficientData { cell: cell_name(d, l.name()), needed: 1, available: v.len() });
            }
            (rest.values().flat_map(|v| v[..base].iter().copied()).collect(), Some(base))
        }
        Scheme::Model5 => {
            let mut groups: BTreeMap<(Domain, u8), Vec<usize>> = BTreeMap::new();
            for (&(d, l), v) in &rest {
                groups.entry((d, l.principle() as u8)).or_default().extend_from_slice(v);
            }
            let principles: Vec<Principle> = {
                let mut p: Vec<Principle> = labels.iter().map(|l| l.principle()).collect();
                p.dedup();
                p
            };
            for &d in &domains {
                for &p in &principles {
                    groups.entry((d, p as u8)).or_default();
                }
            }
            let base = groups.values().map(Vec::len).min().unwrap_or(0);
            if base == 0 {
                let (&(d, p), _) = groups.iter().min_by_key(|(_, v)| v.len()).expect("non-empty");
                let name = format!("{:?}", principles.iter().find(|x| **x as u8 == p).expect("present")).to_ascii_lowercase();
                return Err(Error::InsufficientData { cell: cell_name(d, &name), needed: 1, available: 0 });
            }
            let mut train = Vec::new();
            for (&(d, p), v) in &mut groups {
                v.sort_unstable();
                v.shuffle(&mut rng_from_seed(derive_seed(seed ^ 0x5c4e_3e55, (d as u64) << 8 | p as u64)));
                train.extend_from_slice(&v[..base]);
            }
            (train, Some(base))
        }
    };
    let mut train = train;
    train.sort_unstable();
    test.sort_unstable();
    let pick = |idx: Vec<usize>, s: Split| idx.into_iter().map(|i| ManifestEntry { split: s, ..entries[i].clone() }).collect();
    Ok(SchemeSplit { scheme, train: pick(train, Split::Train), test: pick(test, Split::Test), per_cell })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(i: usize, label: SubVdp, domain: Domain) -> ManifestEntry {
        ManifestEntry { path: format!("{i}.png"), label, rule_id: None, domain, split: Split::Train, seed: None }
    }

    #[test]
    fn train_count_rounding() {
        assert_eq!(train_count(100, 0.9), 90);
        assert_eq!(train_count(1, 0.1), 1);
        assert_eq!(train_count(0, 0.5), 0);
        assert_eq!(train_count(5, 0.5), 3);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        assert_eq!(split(&[], 0.9, 0).unwrap_err(), Error::EmptyManifest);
        let e = [entry(0, SubVdp::Color, Domain::Syn)];
        assert!(split(&e, 1.0, 0).is_err());
        assert!(split(&e, 0.0, 0).is_err());
    }

    #[test]
    fn one_item_class_goes_to_train() {
        let e = [entry(0, SubVdp::Color, Domain::Syn), entry(1, SubVdp::Shape, Domain::Syn), entry(2, SubVdp::Shape, Domain::Syn)];
        let (tr, va) = split(&e, 0.1, 3).unwrap();
        assert!(tr.iter().any(|x| x.label == SubVdp::Color));
        assert_eq!(tr.len() + va.len(), 3);
    }

    #[test]
    fn duplicate_paths_rejected() {
        let e = [entry(0, SubVdp::Color, Domain::Syn), entry(0, SubVdp::Shape, Domain::Syn)];
        assert!(check_unique_paths(&e).is_err());
    }
}
