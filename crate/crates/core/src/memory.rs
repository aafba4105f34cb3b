//! Long-term memory (one store of patches and five feature maps per domain)
//! and the working-memory hub that links domains through coarse features.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagefeat::{DescriptorKind, DetailMetric, FeatureBundle, GeneralFeatures};
use crate::raster::{RasterImage, Rect};
use crate::som::{Som, SomConfig};

pub type EntryId = u32;

/// How a source image is cut into stored patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CropPolicy {
    /// The whole image is one patch.
    Whole,
    /// Non-overlapping square tiles whose side is each fraction of the
    /// image's shorter side.
    FixedGrid { fractions: Vec<f64> },
}

impl Default for CropPolicy {
    fn default() -> Self {
        CropPolicy::FixedGrid { fractions: vec![0.5, 0.25] }
    }
}

impl CropPolicy {
    pub fn crops(&self, width: usize, height: usize) -> Vec<Rect> {
        match self {
            CropPolicy::Whole => vec![Rect::new(0, 0, width, height)],
            CropPolicy::FixedGrid { fractions } => {
                let mut out = Vec::new();
                for &f in fractions {
                    let side = (width.min(height) as f64 * f).floor() as usize;
                    if side == 0 {
                        continue;
                    }
                    for y in (0..=height - side).step_by(side) {
                        for x in (0..=width - side).step_by(side) {
                            out.push(Rect::new(x, y, side, side));
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceImage {
    pub name: String,
    pub image: RasterImage,
    pub policy: CropPolicy,
}

impl SourceImage {
    pub fn new(name: impl Into<String>, image: RasterImage, policy: CropPolicy) -> Self {
        SourceImage { name: name.into(), image, policy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSource {
    pub file: String,
    pub crop: Rect,
    pub source_w: usize,
    pub source_h: usize,
}

impl PatchSource {
    pub fn is_whole(&self) -> bool {
        self.crop == Rect::new(0, 0, self.source_w, self.source_h)
    }
}

impl std::fmt::Display for PatchSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let r = self.crop;
        write!(f, "{}@{},{}+{}x{}", self.file, r.x, r.y, r.w, r.h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub id: EntryId,
    pub domain: String,
    pub image: RasterImage,
    pub features: FeatureBundle,
    pub source: PatchSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemoryConfig {
    pub domain_grid: (usize, usize),
    pub hub_grid: (usize, usize),
    pub epochs: usize,
    pub lr0: f64,
    pub lr_final: f64,
    pub nbhd_final: f64,
    pub min_entries: usize,
    pub seed: u64,
    pub metric: DetailMetric,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig {
            domain_grid: (8, 8),
            hub_grid: (16, 16),
            epochs: 50,
            lr0: 0.5,
            lr_final: 0.01,
            nbhd_final: 0.5,
            min_entries: 20,
            seed: 7,
            metric: DetailMetric::default(),
        }
    }
}

impl MemoryConfig {
    fn som_config(&self, grid: (usize, usize), dim: usize, seed: u64) -> SomConfig {
        let mut c = SomConfig::new(grid.0, grid.1, dim, seed);
        c.epochs = self.epochs;
        c.lr0 = self.lr0;
        c.lr_final = self.lr_final;
        c.nbhd_final = self.nbhd_final.min(c.nbhd0);
        c
    }
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a, stable across platforms and runs.
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMemory {
    pub name: String,
    pub entries: Vec<PatchEntry>,
    /// One map per descriptor kind, in `DescriptorKind::ALL` order. Empty for
    /// a domain with no entries.
    pub feature_soms: Vec<Som>,
    /// `unit_index[kind][unit]` lists the entries whose BMU is `unit`.
    pub unit_index: Vec<Vec<Vec<EntryId>>>,
}

impl DomainMemory {
    /// A registered domain with nothing in it.
    pub fn empty(name: impl Into<String>) -> Self {
        DomainMemory { name: name.into(), entries: Vec::new(), feature_soms: Vec::new(), unit_index: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, id: EntryId) -> Option<&PatchEntry> {
        self.entries.get(id as usize).filter(|e| e.id == id)
    }

    pub fn som(&self, kind: DescriptorKind) -> Option<&Som> {
        self.feature_soms.get(kind.index())
    }

    /// Within-domain completion: BMU of the query on the `kind` map, then the
    /// nearest entry (full detail vector) among those indexed at that unit.
    /// If the BMU is a dead unit, the nearest unit with entries is used.
    pub fn recall(&self, query: &FeatureBundle, kind: DescriptorKind, metric: &DetailMetric) -> Result<&PatchEntry> {
        let som = self
            .som(kind)
            .filter(|_| !self.entries.is_empty())
            .ok_or_else(|| Error::InvalidState(format!("domain `{}` has no entries", self.name)))?;
        let (bmu, _) = som.bmu(query.descriptor(kind))?;
        let index = &self.unit_index[kind.index()];
        let ids = som
            .neighborhood(bmu, som.diameter())?
            .into_iter()
            .map(|u| &index[u])
            .find(|ids| !ids.is_empty())
            .ok_or_else(|| Error::InvalidState("unit index is empty".into()))?;
        let (entry, _) = nearest(ids.iter().map(|&id| &self.entries[id as usize]), query, metric)?;
        Ok(entry)
    }
}

/// Entry with the smallest detail distance to `reference`; ties go to the
/// lowest id.
fn nearest<'a>(
    candidates: impl IntoIterator<Item = &'a PatchEntry>,
    reference: &FeatureBundle,
    metric: &DetailMetric,
) -> Result<(&'a PatchEntry, f64)> {
    let mut best: Option<(&PatchEntry, f64)> = None;
    for c in candidates {
        let d = metric.distance(&c.features, reference);
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b.id <= c.id) => Some((b, bd)),
            _ => Some((c, d)),
        };
    }
    best.ok_or_else(|| Error::invalid("no candidates"))
}

/// Cuts every source image by its crop policy, extracts features, trains the
/// five feature maps and indexes each entry under its BMU on every map.
pub fn ingest_domain(name: &str, images: &[SourceImage], cfg: &MemoryConfig) -> Result<DomainMemory> {
    let mut crops = Vec::new();
    for src in images {
        let (w, h) = (src.image.width(), src.image.height());
        for rect in src.policy.crops(w, h) {
            crops.push((src.image.crop(rect)?, PatchSource { file: src.name.clone(), crop: rect, source_w: w, source_h: h }));
        }
    }
    if crops.len() < cfg.min_entries.max(1) {
        return Err(Error::InsufficientData { needed: cfg.min_entries.max(1), got: crops.len() });
    }
    let features: Vec<FeatureBundle> = crops
        .par_iter()
        .map(|(img, src)| FeatureBundle::extract(img, src.source_w, src.source_h))
        .collect::<Result<_>>()?;
    let entries: Vec<PatchEntry> = crops
        .into_iter()
        .zip(features)
        .enumerate()
        .map(|(i, ((image, source), features))| PatchEntry {
            id: i as EntryId,
            domain: name.to_string(),
            image,
            features,
            source,
        })
        .collect();

    let base = cfg.seed ^ name_hash(name);
    let feature_soms: Vec<Som> = DescriptorKind::ALL
        .par_iter()
        .map(|&kind| {
            let samples: Vec<Vec<f64>> = entries.iter().map(|e| e.features.descriptor(kind).to_vec()).collect();
            let seed = base.wrapping_add((kind.index() as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            Som::train(&samples, &cfg.som_config(cfg.domain_grid, kind.dim(), seed))
        })
        .collect::<Result<_>>()?;

    let mut unit_index = Vec::with_capacity(feature_soms.len());
    for (kind, som) in DescriptorKind::ALL.iter().zip(&feature_soms) {
        let mut units = vec![Vec::new(); som.units()];
        for e in &entries {
            let (u, _) = som.bmu(e.features.descriptor(*kind))?;
            units[u].push(e.id);
        }
        unit_index.push(units);
    }
    Ok(DomainMemory { name: name.to_string(), entries, feature_soms, unit_index })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HubRef {
    pub domain: String,
    pub id: EntryId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubMemory {
    pub hub_som: Som,
    /// Entries whose general features have their BMU at each hub unit.
    pub unit_map: Vec<Vec<HubRef>>,
}

pub fn build_hub(domains: &[DomainMemory], cfg: &MemoryConfig) -> Result<HubMemory> {
    if domains.len() < 2 {
        return Err(Error::invalid("the hub links at least two domains"));
    }
    let samples: Vec<Vec<f64>> = domains
        .iter()
        .flat_map(|d| d.entries.iter().map(|e| e.features.general.to_vec()))
        .collect();
    let hub_som = Som::train(&samples, &cfg.som_config(cfg.hub_grid, 3, cfg.seed ^ 0x4855_4253))?;
    let mut unit_map = vec![Vec::new(); hub_som.units()];
    for d in domains {
        for e in &d.entries {
            let (u, _) = hub_som.bmu(&e.features.general.to_vec())?;
            unit_map[u].push(HubRef { domain: d.name.clone(), id: e.id });
        }
    }
    Ok(HubMemory { hub_som, unit_map })
}

/// A cross-domain candidate and the hub grid distance it was found at.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub entry: &'a PatchEntry,
    pub hub_distance: usize,
}

/// Every domain plus the hub built over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Memory {
    pub domains: BTreeMap<String, DomainMemory>,
    pub hub: HubMemory,
    pub metric: DetailMetric,
}

impl Memory {
    pub fn build(domains: Vec<DomainMemory>, cfg: &MemoryConfig) -> Result<Memory> {
        let hub = build_hub(&domains, cfg)?;
        let mut map = BTreeMap::new();
        for d in domains {
            if map.insert(d.name.clone(), d).is_some() {
                return Err(Error::invalid("duplicate domain name"));
            }
        }
        Ok(Memory { domains: map, hub, metric: cfg.metric })
    }

    pub fn domain(&self, name: &str) -> Result<&DomainMemory> {
        self.domains.get(name).ok_or_else(|| Error::NotFound(format!("domain `{name}`")))
    }

    pub fn entry(&self, r: &HubRef) -> Option<&PatchEntry> {
        self.domains.get(&r.domain)?.entry(r.id)
    }

    pub fn total_entries(&self) -> usize {
        self.domains.values().map(|d| d.entries.len()).sum()
    }

    /// Target-domain entries indexed at hub units within `radius` of the
    /// query's hub BMU, ordered by (hub grid distance, entry id).
    pub fn cross_domain_candidates(
        &self,
        query: &GeneralFeatures,
        target_domain: &str,
        radius: usize,
    ) -> Result<Vec<Candidate<'_>>> {
        let target = self.domain(target_domain)?;
        let som = &self.hub.hub_som;
        let (bmu, _) = som.bmu(&query.to_vec())?;
        let mut out = Vec::new();
        for u in som.neighborhood(bmu, radius)? {
            let dist = som.grid_distance(bmu, u);
            for r in self.hub.unit_map[u].iter().filter(|r| r.domain == target_domain) {
                if let Some(entry) = target.entry(r.id) {
                    out.push(Candidate { entry, hub_distance: dist });
                }
            }
        }
        out.sort_by_key(|c| (c.hub_distance, c.entry.id));
        if out.is_empty() {
            return Err(Error::EmptyCandidates { domain: target_domain.to_string(), radius });
        }
        Ok(out)
    }

    /// Same as [`Memory::cross_domain_candidates`] with a stored entry as the
    /// source.
    pub fn candidates_for_entry(&self, source: &PatchEntry, target_domain: &str, radius: usize) -> Result<Vec<Candidate<'_>>> {
        self.cross_domain_candidates(&source.features.general, target_domain, radius)
    }

    pub fn select_substitute<'a>(&self, candidates: &[&'a PatchEntry], reference: &FeatureBundle) -> Result<(&'a PatchEntry, f64)> {
        select_substitute(candidates, reference, &self.metric)
    }
}

/// The candidate most similar to `reference` on the detail vector.
pub fn select_substitute<'a>(
    candidates: &[&'a PatchEntry],
    reference: &FeatureBundle,
    metric: &DetailMetric,
) -> Result<(&'a PatchEntry, f64)> {
    nearest(candidates.iter().copied(), reference, metric)
}
