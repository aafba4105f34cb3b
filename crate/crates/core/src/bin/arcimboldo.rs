use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use arcimboldo::config::EngineConfig;
use arcimboldo::creative::{ArtworkStatus, Quadrant};
use arcimboldo::engine::{self, Engine, InputSource};
use arcimboldo::server::{serve, ServeConfig};
use arcimboldo::store::Store;
use arcimboldo::Error;
use clap::{Parser, Subcommand};

/// Dual-process creative painter.
#[derive(Parser)]
#[command(name = "arcimboldo", version)]
struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "ARCIMBOLDO_STORE", default_value = "store")]
    store: PathBuf,
    /// TOML engine configuration (used by `train`).
    #[arg(long, global = true, env = "ARCIMBOLDO_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for training or for the creative session.
    #[arg(long, global = true, env = "ARCIMBOLDO_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the domain memories from `<datasets>/<domain>/*.png`.
    Train { datasets: PathBuf },
    /// Paint a portrait by association from an input face.
    Create {
        /// Input image; omit to use the built-in sample face.
        input: Option<PathBuf>,
    },
    /// Rate an artwork from 1 to 5.
    Rate {
        artwork_id: String,
        #[arg(allow_negative_numbers = true)]
        rating: i64,
        #[arg(long, default_value = "cli")]
        rater: String,
    },
    /// Print the agent's urges and development state.
    Status,
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "ARCIMBOLDO_BIND", default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, env = "ARCIMBOLDO_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "ARCIMBOLDO_READ_ONLY")]
        read_only: bool,
    },
}

const EXIT_USAGE: u8 = 2;
const EXIT_ABANDONED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<Error>().is_some_and(|e| {
                matches!(e, Error::InvalidInput(_) | Error::Decode(_) | Error::NotFound(_) | Error::InsufficientData { .. })
                    || matches!(e, Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound)
            });
            ExitCode::from(if usage { EXIT_USAGE } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Train { datasets } => {
            let mut cfg = match &cli.config {
                Some(p) => EngineConfig::load(p)?,
                None => EngineConfig::default(),
            };
            if let Some(seed) = cli.seed {
                cfg.memory.seed = seed;
            }
            let store = Store::open(&cli.store)?;
            let report = engine::train(&datasets, &cfg, &store)?;
            for d in &report.domains {
                let qe: Vec<String> = d.final_qe.iter().map(|(k, q)| format!("{k}={q:.4}")).collect();
                println!("{:<12} images={:<4} entries={:<5} qe: {}", d.name, d.images, d.entries, qe.join(" "));
            }
            println!("hub assignments: {} (qe {:.4})", report.hub_assignments, report.hub_qe);
            println!("snapshot: {}", report.snapshot_id);
            Ok(0)
        }
        Command::Create { input } => {
            let engine = Engine::open(Store::open_existing(&cli.store)?, false)?;
            let source = input.map_or(InputSource::Sample, InputSource::File);
            let art = engine.create(&source, cli.seed.unwrap_or(0))?;
            let r = &art.record;
            let count = |q: Quadrant| r.substitutions.iter().filter(|s| s.quadrant == q).count();
            println!("artwork: {}", r.id);
            println!("status: {:?}", r.status);
            println!("target domain: {}", r.task.target_domain);
            println!(
                "regions: {} substituted ({} TAC, {} EXP) of {}",
                r.substitutions.len(),
                count(Quadrant::Tac),
                count(Quadrant::Exp),
                r.regions.len()
            );
            println!("analytic checks: {}", r.analytic_checks);
            for d in &r.decisions {
                println!("  REF {d:?}");
            }
            if let Some(e) = r.internal_eval {
                println!("internal evaluation: {:.3} ({})", e.score, if e.pass { "pass" } else { "fail" });
            }
            Ok(if r.status == ArtworkStatus::Abandoned { EXIT_ABANDONED } else { 0 })
        }
        Command::Rate { artwork_id, rating, rater } => {
            let engine = Engine::open(Store::open_existing(&cli.store)?, false)?;
            let rating = u8::try_from(rating).map_err(|_| Error::InvalidInput(format!("rating {rating} outside 1..=5")))?;
            let s = engine.rate(&artwork_id, rating, &rater)?;
            println!("certainty: {:.6}", s.urges.certainty);
            println!("state: {}", s.development_state);
            Ok(0)
        }
        Command::Status => {
            let engine = Engine::open(Store::open_existing(&cli.store)?, true)?;
            let s = engine.status();
            println!("competence: {:.6}", s.urges.competence);
            println!("certainty: {:.6}", s.urges.certainty);
            println!("activation: {:.6}", s.activation);
            println!("resolution level: {:.6}", s.resolution_level);
            println!("exploration radius: {}", s.exploration_radius);
            println!("face threshold: {:.6}", s.check_strictness);
            println!("artworks: {}", s.artworks_made);
            println!("ratings: {}", s.ratings_applied);
            println!("state: {}", s.development_state);
            Ok(0)
        }
        Command::Serve { bind, port, read_only } => {
            let cfg = ServeConfig { bind, port, store: cli.store, read_only };
            let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
            println!("listening on {}", cfg.addr()?);
            rt.block_on(serve(&cfg))?;
            Ok(0)
        }
    }
}
