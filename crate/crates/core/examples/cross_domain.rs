//! Completion outside the domain: for one quarter of a face, list the
//! flower patches the hub offers at growing radii and the one chosen.

use arcimboldo::config::EngineConfig;
use arcimboldo::engine::build_snapshot;
use arcimboldo::error::Error;
use arcimboldo::fixtures;
use arcimboldo::imagefeat::FeatureBundle;
use arcimboldo::memory::PatchEntry;
use arcimboldo::raster::Rect;

fn main() -> arcimboldo::Result<()> {
    let corpus: Vec<_> = fixtures::sample_corpus(7)
        .into_iter()
        .map(|(d, imgs)| (d.to_string(), imgs.into_iter().enumerate().map(|(i, im)| (format!("{d}_{i:03}.png"), im)).collect()))
        .collect();
    let (snap, _) = build_snapshot(&corpus, &EngineConfig::default())?;
    let mem = &snap.memory;
    let face = fixtures::faces(1, 12).remove(0);
    let quarter = FeatureBundle::extract(&face.crop(Rect::new(0, 32, 32, 32))?, face.width(), face.height())?;
    println!("source: lower-left quarter, general {:?}", quarter.general);
    for radius in [0, 1, 2, 4, mem.hub.hub_som.diameter()] {
        match mem.cross_domain_candidates(&quarter.general, "flowers", radius) {
            Ok(c) => {
                let pool: Vec<&PatchEntry> = c.iter().map(|c| c.entry).collect();
                let (best, d) = mem.select_substitute(&pool, &quarter)?;
                println!("radius {radius:>2}: {:>3} candidates, best {} at {d:.4}", pool.len(), best.source);
            }
            Err(Error::EmptyCandidates { .. }) => println!("radius {radius:>2}: no candidates"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
