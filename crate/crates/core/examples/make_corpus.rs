//! Writes the generated training corpus as PNG folders.
//!
//! `cargo run --example make_corpus -- datasets [seed]`, then
//! `arcimboldo --store store train datasets`.

use std::path::PathBuf;

use arcimboldo::fixtures::{sample_corpus, write_corpus};

fn main() -> arcimboldo::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "datasets".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let corpus = sample_corpus(seed);
    write_corpus(&dir, &corpus)?;
    for (domain, images) in &corpus {
        println!("{}/{domain}: {} images", dir.display(), images.len());
    }
    Ok(())
}
