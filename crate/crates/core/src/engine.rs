//! Operations shared by the command line and the HTTP service.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, MutexGuard};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::agent::{AgentState, DevelopmentState, Urges};
use crate::config::EngineConfig;
use crate::creative::{choose_target_domain, Artwork, ArtworkRecord, ArtworkStatus, CreativeTask, SessionMeta, Studio, SOURCE_DOMAIN};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::imagefeat::DescriptorKind;
use crate::memory::{ingest_domain, Memory, SourceImage};
use crate::raster::RasterImage;
use crate::render::build_face_template;
use crate::store::{AgentFile, CatalogEntry, RatingEvent, Snapshot, Store};

/// Domain name with its `(file name, image)` pairs.
pub type Dataset = Vec<(String, Vec<(String, RasterImage)>)>;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Reads `datasets/<domain>/*` into per-domain image lists, sorted by name.
pub fn read_datasets(dir: &Path) -> Result<Dataset> {
    let mut domains = Vec::new();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for d in dirs {
        let name = d.file_name().and_then(|n| n.to_str()).ok_or_else(|| Error::invalid("non-UTF-8 domain name"))?.to_string();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&d)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| IMAGE_EXTENSIONS.contains(&x.to_ascii_lowercase().as_str()))
            })
            .collect();
        files.sort();
        let mut images = Vec::with_capacity(files.len());
        for f in files {
            let file = f.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            images.push((file, RasterImage::open(&f)?));
        }
        domains.push((name, images));
    }
    Ok(domains)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainReport {
    pub name: String,
    pub images: usize,
    pub entries: usize,
    /// Final quantization error per descriptor map, in `DescriptorKind::ALL` order.
    pub final_qe: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub snapshot_id: String,
    pub domains: Vec<DomainReport>,
    pub hub_assignments: usize,
    pub hub_qe: f64,
}

/// Builds memories, the hub and the face template from in-memory images.
pub fn build_snapshot(datasets: &Dataset, cfg: &EngineConfig) -> Result<(Snapshot, Vec<DomainReport>)> {
    if !datasets.iter().any(|(n, _)| n == SOURCE_DOMAIN) {
        return Err(Error::invalid(format!("dataset has no `{SOURCE_DOMAIN}` domain")));
    }
    if datasets.len() < 2 {
        return Err(Error::invalid("need at least two domains"));
    }
    let mut domains = Vec::new();
    let mut reports = Vec::new();
    for (name, images) in datasets {
        let policy = if name == SOURCE_DOMAIN { &cfg.training.face_policy } else { &cfg.training.domain_policy };
        let sources: Vec<SourceImage> =
            images.iter().map(|(file, img)| SourceImage::new(file.clone(), img.clone(), policy.clone())).collect();
        let dm = ingest_domain(name, &sources, &cfg.memory)?;
        reports.push(DomainReport {
            name: name.clone(),
            images: images.len(),
            entries: dm.entries.len(),
            final_qe: DescriptorKind::ALL.iter().zip(&dm.feature_soms).map(|(k, s)| (k.name().to_string(), s.final_qe)).collect(),
        });
        domains.push(dm);
    }
    let memory = Memory::build(domains, &cfg.memory)?;
    let template = build_face_template(memory.domain(SOURCE_DOMAIN)?)?;
    let snapshot = Snapshot {
        memory,
        template,
        config: cfg.clone(),
        initial_agent: AgentState::new(cfg.agent),
        catalog: Vec::new(),
    };
    Ok((snapshot, reports))
}

/// `train`: ingest a dataset directory and save a snapshot into the store.
pub fn train(datasets_dir: &Path, cfg: &EngineConfig, store: &Store) -> Result<TrainReport> {
    let datasets = read_datasets(datasets_dir)?;
    let (mut snapshot, domains) = build_snapshot(&datasets, cfg)?;
    snapshot.catalog = store.catalog()?.into_iter().map(|c| c.id).collect();
    let snapshot_id = store.save_snapshot(&snapshot)?;
    Ok(TrainReport {
        snapshot_id,
        hub_assignments: snapshot.memory.hub.unit_map.iter().map(Vec::len).sum(),
        hub_qe: snapshot.memory.hub.hub_som.final_qe,
        domains,
    })
}

/// Where the inspiration image comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputSource {
    File(PathBuf),
    /// A generated face, seeded with the session seed.
    Sample,
}

impl InputSource {
    pub fn load(&self, seed: u64) -> Result<(String, RasterImage)> {
        match self {
            InputSource::File(p) => Ok((p.display().to_string(), RasterImage::open(p)?)),
            InputSource::Sample => Ok((format!("sample:{seed}"), sample_input(seed))),
        }
    }
}

/// The built-in inspiration face for `seed`.
pub fn sample_input(seed: u64) -> RasterImage {
    fixtures::faces(1, seed ^ 0x5a17).remove(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStatus {
    pub urges: Urges,
    pub activation: f64,
    pub resolution_level: f64,
    pub exploration_radius: usize,
    pub check_strictness: f64,
    pub development_state: DevelopmentState,
    pub artworks_made: u64,
    pub ratings_applied: usize,
}

impl AgentStatus {
    pub fn of(a: &AgentFile, r_max: usize) -> Self {
        AgentStatus {
            urges: a.state.urges,
            activation: a.state.activation,
            resolution_level: a.state.resolution_level,
            exploration_radius: a.state.exploration_radius(r_max),
            check_strictness: a.state.check_strictness(),
            development_state: a.state.development_state(),
            artworks_made: a.state.artworks_made,
            ratings_applied: a.ratings_applied,
        }
    }
}

/// Held while a creative session runs.
pub struct SessionGuard<'a>(&'a AtomicBool);

impl Drop for SessionGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

/// A loaded store: snapshot in memory, live agent behind a lock.
///
/// Ratings may arrive while a session runs. The session works on a copy of
/// the agent that is refreshed from the live one before every analytic
/// check; when it ends, its outcome is applied to the live agent.
pub struct Engine {
    store: Store,
    snapshot: Snapshot,
    agent: Mutex<AgentFile>,
    session: AtomicBool,
    read_only: bool,
}

impl Engine {
    pub fn open(store: Store, read_only: bool) -> Result<Engine> {
        let snapshot = store.load_current()?;
        let agent = store.load_agent(&snapshot.initial_agent)?;
        Ok(Engine { store, snapshot, agent: Mutex::new(agent), session: AtomicBool::new(false), read_only })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn read_only(&self) -> bool {
        self.read_only
    }

    fn agent_lock(&self) -> MutexGuard<'_, AgentFile> {
        self.agent.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn agent(&self) -> AgentFile {
        self.agent_lock().clone()
    }

    pub fn status(&self) -> AgentStatus {
        AgentStatus::of(&self.agent_lock(), self.snapshot.config.creative.r_max)
    }

    fn writable(&self) -> Result<()> {
        if self.read_only {
            Err(Error::ReadOnly)
        } else {
            Ok(())
        }
    }

    /// Claims the single session slot.
    pub fn try_begin_session(&self) -> Result<SessionGuard<'_>> {
        self.session.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).map_err(|_| Error::SessionBusy)?;
        Ok(SessionGuard(&self.session))
    }

    pub fn session_running(&self) -> bool {
        self.session.load(Ordering::Acquire)
    }

    pub fn rate(&self, artwork_id: &str, rating: u8, rater: &str) -> Result<AgentStatus> {
        self.writable()?;
        let ev = RatingEvent { artwork_id: artwork_id.to_string(), rating, rater: rater.to_string(), time: Utc::now() };
        let mut agent = self.agent_lock();
        self.store.append_rating(&mut agent, &ev)?;
        Ok(AgentStatus::of(&agent, self.snapshot.config.creative.r_max))
    }

    /// Runs a portrait session on `input` and stores the result.
    pub fn create(&self, input: &InputSource, seed: u64) -> Result<Artwork> {
        self.writable()?;
        let _guard = self.try_begin_session()?;
        let (input_ref, image) = input.load(seed)?;
        self.create_from_image(&image, input_ref, seed, &Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    /// Session body; the caller holds the session slot.
    pub fn create_from_image(&self, image: &RasterImage, input_ref: String, seed: u64, created_at: &str) -> Result<Artwork> {
        let memory = &self.snapshot.memory;
        let target = choose_target_domain(memory, image, &[])?;
        let task = CreativeTask::portrait(target);
        let studio = Studio { memory, template: &self.snapshot.template, config: &self.snapshot.config.creative };
        let meta = SessionMeta { artwork_id: self.store.next_artwork_id()?, input_ref, seed, created_at: created_at.to_string() };
        let mut state = self.agent().state;
        let art = studio.run_task(&task, image, &mut state, &meta, &mut |s: &mut AgentState| *s = self.agent().state)?;
        let mut agent = self.agent_lock();
        let mut next = agent.clone();
        apply_outcome(&mut next.state, &art.record);
        self.store.save_artwork(&art, &next)?;
        *agent = next;
        Ok(art)
    }

    pub fn catalog(&self) -> Result<Vec<CatalogEntry>> {
        self.store.catalog()
    }

    pub fn artwork(&self, id: &str) -> Result<ArtworkRecord> {
        self.store.artwork(id)
    }
}

/// The urge update a finished session implies.
pub fn apply_outcome(state: &mut AgentState, record: &ArtworkRecord) {
    match (record.status, record.internal_eval) {
        (ArtworkStatus::Accepted, Some(eval)) => {
            state.update_competence(eval.pass);
            state.artworks_made += 1;
        }
        _ => state.update_competence(false),
    }
}
