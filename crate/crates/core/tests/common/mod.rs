#![allow(dead_code)]

use arcimboldo::config::EngineConfig;
use arcimboldo::engine::build_snapshot;
use arcimboldo::fixtures;
use arcimboldo::memory::{ingest_domain, CropPolicy, DomainMemory, Memory, MemoryConfig, SourceImage};
use arcimboldo::raster::RasterImage;
use arcimboldo::render::{build_face_template, FaceTemplate};
use arcimboldo::store::Snapshot;

pub use arcimboldo::engine::Dataset;

pub fn dataset(corpus: Vec<(&str, Vec<RasterImage>)>) -> Dataset {
    corpus
        .into_iter()
        .map(|(d, imgs)| (d.to_string(), imgs.into_iter().enumerate().map(|(i, im)| (format!("{d}_{i:03}.png"), im)).collect()))
        .collect()
}

/// Snapshot trained on the default generated corpus.
pub fn corpus_snapshot(seed: u64) -> Snapshot {
    build_snapshot(&dataset(fixtures::sample_corpus(seed)), &EngineConfig::default()).expect("training").0
}

fn sources(name: &str, imgs: &[RasterImage], policy: CropPolicy) -> Vec<SourceImage> {
    imgs.iter().enumerate().map(|(i, im)| SourceImage::new(format!("{name}_{i:03}.png"), im.clone(), policy.clone())).collect()
}

pub struct TacFixture {
    pub memory: Memory,
    pub template: FaceTemplate,
    pub input: RasterImage,
}

/// The world where every region of the input has an identical stored crop.
pub fn tac_fixture(seed: u64) -> TacFixture {
    let w = fixtures::tac_world(seed);
    let cfg = MemoryConfig::default();
    let faces = ingest_domain("faces", &sources("faces", &w.faces, CropPolicy::Whole), &cfg).unwrap();
    let flowers = ingest_domain("flowers", &sources("flowers", &w.flowers, CropPolicy::default()), &cfg).unwrap();
    let template = build_face_template(&faces).unwrap();
    TacFixture { memory: Memory::build(vec![faces, flowers], &cfg).unwrap(), template, input: w.input }
}

/// Faces plus `empty` registered domains that hold nothing.
pub fn empty_target_fixture(seed: u64, empty: &[&str]) -> (Memory, FaceTemplate) {
    let cfg = MemoryConfig::default();
    let faces = ingest_domain("faces", &sources("faces", &fixtures::faces(24, seed), CropPolicy::Whole), &cfg).unwrap();
    let template = build_face_template(&faces).unwrap();
    let mut domains = vec![faces];
    domains.extend(empty.iter().map(|n| DomainMemory::empty(*n)));
    (Memory::build(domains, &cfg).unwrap(), template)
}
