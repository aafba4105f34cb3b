//! Trains on the generated corpus and paints one portrait by association.
//!
//! `cargo run --release --example portrait [seed] [out_dir]`

use std::time::Instant;

use arcimboldo::config::EngineConfig;
use arcimboldo::creative::{check_provenance, Action, ArtworkStatus};
use arcimboldo::engine::{build_snapshot, sample_input, Engine};
use arcimboldo::fixtures;
use arcimboldo::store::Store;

fn main() -> arcimboldo::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let out = args.next().map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("arcimboldo-portrait"));

    let t = Instant::now();
    let corpus: Vec<_> = fixtures::sample_corpus(seed)
        .into_iter()
        .map(|(d, imgs)| (d.to_string(), imgs.into_iter().enumerate().map(|(i, im)| (format!("{d}_{i:03}.png"), im)).collect()))
        .collect();
    let (snapshot, reports) = build_snapshot(&corpus, &EngineConfig::default())?;
    for r in &reports {
        println!("{:<8} {:>4} patches", r.name, r.entries);
    }
    println!("trained in {:.1}s", t.elapsed().as_secs_f64());

    let _ = std::fs::remove_dir_all(&out);
    let store = Store::open(&out)?;
    store.save_snapshot(&snapshot)?;
    let engine = Engine::open(store, false)?;

    let t = Instant::now();
    let art = engine.create_from_image(&sample_input(seed), format!("sample:{seed}"), seed, "2024-01-01T00:00:00Z")?;
    let rec = &art.record;
    println!("session in {:.1}s", t.elapsed().as_secs_f64());
    println!("target domain: {}", rec.task.target_domain);
    println!("status: {:?}", rec.status);
    println!("regions substituted: {}/{}", rec.substitutions.len(), rec.regions.len());
    println!("analytic checks: {}", rec.analytic_checks);
    for step in &rec.provenance {
        match &step.action {
            Action::MentalCheck { check, substituted } => println!(
                "  {} face {:.3} (tau {:.3}) expectation {:.3} substituted {}",
                step.quadrant, check.face_score, check.tau_face, check.expectation_score, substituted
            ),
            Action::Reflect { decision } => println!("  {} {:?}", step.quadrant, decision),
            Action::ExecutionCheck { config, eval } => println!("  {} {:?} score {:.3}", step.quadrant, config.brush, eval.score),
            _ => {}
        }
    }
    assert!(check_provenance(&rec.provenance).is_ok());
    if rec.status == ArtworkStatus::Accepted {
        println!("images under {}", engine.store().artworks_dir().display());
    }
    println!("agent after session: {:?}", engine.status().development_state);
    Ok(())
}
