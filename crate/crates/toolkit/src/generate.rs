//! Parallel dataset generation.
//!
//! Sample `i` gets its rule from a fixed assignment and its seed from
//! `derive_seed(base_seed, i)`, so the output does not depend on how many
//! workers render it.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vdp_core::composition::{generate_with, rule_spec, Style, SubVdp};
use vdp_core::dataset::{Domain, ManifestEntry, Split};
use vdp_core::raster::render;
use vdp_core::rng::derive_seed;
use vdp_core::texture::{Texture, TextureRegistry};

use crate::png_io::{load_png, save_png};
use crate::{Error, Result};

/// How `count` is divided among the selected rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Balance {
    /// Every rule ⌊count/rules⌋ or ⌈count/rules⌉ times.
    #[default]
    Rule,
    /// Every class equally often, then every rule equally often within its class.
    Class,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub style: Style,
    pub rules: Vec<u8>,
    pub count: usize,
    pub base_seed: u64,
    pub size: usize,
    #[serde(default)]
    pub balance: Balance,
}

impl GeneratorConfig {
    pub fn validate(&self, textures: &TextureRegistry) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Invalid("count must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Invalid("no rules selected".into()));
        }
        for &r in &self.rules {
            rule_spec(r)?;
        }
        let mut sorted = self.rules.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.rules.len() {
            return Err(Error::Invalid("rule list has duplicates".into()));
        }
        if self.style == Style::Sdv2 && textures.is_empty() {
            return Err(vdp_core::Error::EmptyTextureRegistry.into());
        }
        Ok(())
    }

    /// Rule of every sample, in sample order.
    pub fn assignment(&self) -> Vec<u8> {
        let mut rules = self.rules.clone();
        rules.sort_unstable();
        match self.balance {
            Balance::Rule => (0..self.count).map(|i| rules[i % rules.len()]).collect(),
            Balance::Class => {
                let mut classes: Vec<(SubVdp, Vec<u8>)> = Vec::new();
                for r in rules {
                    let c = rule_spec(r).expect("validated").sub_vdp;
                    match classes.iter_mut().find(|(k, _)| *k == c) {
                        Some((_, v)) => v.push(r),
                        None => classes.push((c, vec![r])),
                    }
                }
                classes.sort_by_key(|(c, _)| *c);
                let mut turns = vec![0usize; classes.len()];
                (0..self.count)
                    .map(|i| {
                        let k = i % classes.len();
                        let members = &classes[k].1;
                        let r = members[turns[k] % members.len()];
                        turns[k] += 1;
                        r
                    })
                    .collect()
            }
        }
    }
}

/// Parses `1-4,11,27-30` into rule ids.
pub fn parse_rules(spec: &str) -> Result<Vec<u8>> {
    let bad = || Error::Invalid(format!("bad rule list {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<u8>().map_err(|_| bad())?, b.trim().parse::<u8>().map_err(|_| bad())?),
            None => {
                let v = part.parse::<u8>().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(bad());
        }
        out.extend(lo..=hi);
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// The procedural set plus every PNG in `dir` as a photographic patch,
/// in file-name order.
pub fn texture_registry(dir: Option<&Path>) -> Result<TextureRegistry> {
    let mut reg = TextureRegistry::procedural();
    if let Some(dir) = dir {
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(Error::io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        files.sort();
        for f in files {
            reg.push(Texture::Image { image: load_png(&f)? });
        }
    }
    Ok(reg)
}

pub fn image_name(index: usize, rule: u8) -> String {
    format!("images/{index:06}_r{rule:02}.png")
}

/// Renders `config.count` images under `out_dir/images/` and returns their
/// manifest rows (paths relative to `out_dir`), in sample order.
pub fn generate_dataset(config: &GeneratorConfig, textures: &TextureRegistry, out_dir: &Path) -> Result<Vec<ManifestEntry>> {
    config.validate(textures)?;
    let images = out_dir.join("images");
    fs::create_dir_all(&images).map_err(Error::io(&images))?;
    let assignment = config.assignment();
    assignment
        .par_iter()
        .enumerate()
        .map(|(i, &rule)| {
            let seed = derive_seed(config.base_seed, i as u64);
            let comp = generate_with(rule, seed, config.style, textures)?;
            let image = render(&comp, config.size, config.size)?;
            let path = image_name(i, rule);
            save_png(&image, out_dir.join(&path))?;
            Ok(ManifestEntry { path, label: comp.label, rule_id: Some(rule), domain: Domain::Syn, split: Split::Train, seed: Some(seed) })
        })
        .collect()
}
