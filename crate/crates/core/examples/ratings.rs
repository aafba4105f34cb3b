//! A judge rates a few sessions through the store; the next session's
//! exploration radius follows the updated agent.

use arcimboldo::creative::Action;
use arcimboldo::engine::{build_snapshot, Engine, InputSource};
use arcimboldo::{config::EngineConfig, fixtures, store::Store};

fn main() -> arcimboldo::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus: Vec<_> = fixtures::sample_corpus(7)
        .into_iter()
        .map(|(d, imgs)| (d.to_string(), imgs.into_iter().enumerate().map(|(i, im)| (format!("{d}_{i:03}.png"), im)).collect()))
        .collect();
    let (snap, _) = build_snapshot(&corpus, &EngineConfig::default())?;
    let store = Store::open(dir.path())?;
    store.save_snapshot(&snap)?;
    let engine = Engine::open(store.clone(), false)?;

    for seed in 1..=4 {
        let art = engine.create(&InputSource::Sample, seed)?;
        let radius = art.record.provenance.iter().find_map(|p| match p.action {
            Action::Explore { base_radius, .. } => Some(base_radius),
            _ => None,
        });
        let status = engine.rate(&art.record.id, 5, "judge")?;
        println!(
            "{} {:?} explored at {:?}; after 5 stars certainty {:.3}, next radius {}, {}",
            art.record.id, art.record.status, radius, status.urges.certainty, status.exploration_radius, status.development_state
        );
    }
    let replayed = store.replay_agent(&snap.initial_agent)?;
    println!("ledger replay matches live agent: {}", replayed.equivalent(&engine.agent().state));
    Ok(())
}
