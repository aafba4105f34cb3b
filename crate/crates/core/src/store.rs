//! On-disk store.
//!
//! ```text
//! store/
//!   snapshots/<id>.snap   trained memories, face template, config, initial agent
//!   snapshots/CURRENT     id of the snapshot in use
//!   agent.json            live agent state
//!   ratings.log           append-only rating ledger
//!   catalog.json          artwork index
//!   artworks/<id>.json    full record with provenance
//!   artworks/<id>.png     executed artwork
//!   artworks/<id>-mental.png
//! ```
//!
//! A snapshot file is `ARCSNAP\0`, a little-endian `u32` format version, an
//! `i64` creation time (unix seconds), a `u32` section count, then sections
//! of `tag: [u8; 4]`, `len: u64`, `crc32: u32` and `len` payload bytes
//! (bincode). The snapshot id is the SHA-256 of the tagged payloads, so it
//! does not depend on when the snapshot was written.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{validate_rating, AgentState};
use crate::config::EngineConfig;
use crate::creative::{Artwork, ArtworkRecord, ArtworkStatus};
use crate::error::{Error, Result};
use crate::memory::Memory;
use crate::render::FaceTemplate;

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"ARCSNAP\0";
pub const SNAPSHOT_VERSION: u32 = 1;

const TAG_MEMORY: [u8; 4] = *b"MEMO";
const TAG_TEMPLATE: [u8; 4] = *b"FACE";
const TAG_CONFIG: [u8; 4] = *b"CONF";
const TAG_AGENT: [u8; 4] = *b"AGNT";
const TAG_CATALOG: [u8; 4] = *b"CATL";
const SECTION_TAGS: [[u8; 4]; 5] = [TAG_MEMORY, TAG_TEMPLATE, TAG_CONFIG, TAG_AGENT, TAG_CATALOG];

/// Everything `train` produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub memory: Memory,
    pub template: FaceTemplate,
    pub config: EngineConfig,
    /// Agent state before any session or rating; the ledger replays onto it.
    pub initial_agent: AgentState,
    /// Artwork ids known when the snapshot was taken.
    pub catalog: Vec<String>,
}

fn encode_section<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    bincode::serialize(value).map_err(|e| Error::invalid(format!("serialize: {e}")))
}

fn decode_section<T: for<'de> Deserialize<'de>>(tag: [u8; 4], bytes: &[u8]) -> Result<T> {
    bincode::deserialize(bytes)
        .map_err(|e| Error::CorruptSnapshot(format!("section {}: {e}", String::from_utf8_lossy(&tag))))
}

fn snapshot_sections(s: &Snapshot) -> Result<Vec<([u8; 4], Vec<u8>)>> {
    Ok(vec![
        (TAG_MEMORY, encode_section(&s.memory)?),
        (TAG_TEMPLATE, encode_section(&s.template)?),
        (TAG_CONFIG, encode_section(&s.config)?),
        (TAG_AGENT, encode_section(&s.initial_agent)?),
        (TAG_CATALOG, encode_section(&s.catalog)?),
    ])
}

fn content_id(sections: &[([u8; 4], Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    for (tag, payload) in sections {
        h.update(tag);
        h.update((payload.len() as u64).to_le_bytes());
        h.update(payload);
    }
    h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
}

/// Content id of a snapshot, as `encode_snapshot` would report it.
pub fn snapshot_id(s: &Snapshot) -> Result<String> {
    Ok(content_id(&snapshot_sections(s)?))
}

/// Serializes a snapshot; returns its id and the file bytes.
pub fn encode_snapshot(s: &Snapshot, created_at: i64) -> Result<(String, Vec<u8>)> {
    let sections = snapshot_sections(s)?;
    let mut out = Vec::new();
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&created_at.to_le_bytes());
    out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
    for (tag, payload) in &sections {
        out.extend_from_slice(tag);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
        out.extend_from_slice(payload);
    }
    Ok((content_id(&sections), out))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::CorruptSnapshot(format!("truncated while reading {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("slice length"))
    }
}

/// Header of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub created_at: i64,
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(SnapshotHeader, Snapshot)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.array::<8>("magic")? != SNAPSHOT_MAGIC {
        return Err(Error::CorruptSnapshot("not a snapshot file".into()));
    }
    let version = u32::from_le_bytes(r.array("version")?);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Version { found: version, expected: SNAPSHOT_VERSION });
    }
    let created_at = i64::from_le_bytes(r.array("header")?);
    let count = u32::from_le_bytes(r.array("section count")?) as usize;
    let mut payloads: Vec<([u8; 4], &[u8])> = Vec::with_capacity(count.min(16));
    for _ in 0..count {
        let tag = r.array::<4>("section tag")?;
        let len = u64::from_le_bytes(r.array("section length")?);
        let crc = u32::from_le_bytes(r.array("section checksum")?);
        let len = usize::try_from(len).map_err(|_| Error::CorruptSnapshot("section too large".into()))?;
        let payload = r.take(len, "section payload")?;
        if crc32fast::hash(payload) != crc {
            return Err(Error::CorruptSnapshot(format!("checksum mismatch in {}", String::from_utf8_lossy(&tag))));
        }
        payloads.push((tag, payload));
    }
    if r.pos != bytes.len() {
        return Err(Error::CorruptSnapshot("trailing bytes".into()));
    }
    let find = |tag: [u8; 4]| -> Result<&[u8]> {
        payloads
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::CorruptSnapshot(format!("missing section {}", String::from_utf8_lossy(&tag))))
    };
    for (tag, _) in &payloads {
        if !SECTION_TAGS.contains(tag) {
            return Err(Error::CorruptSnapshot(format!("unknown section {}", String::from_utf8_lossy(tag))));
        }
    }
    let snap = Snapshot {
        memory: decode_section(TAG_MEMORY, find(TAG_MEMORY)?)?,
        template: decode_section(TAG_TEMPLATE, find(TAG_TEMPLATE)?)?,
        config: decode_section(TAG_CONFIG, find(TAG_CONFIG)?)?,
        initial_agent: decode_section(TAG_AGENT, find(TAG_AGENT)?)?,
        catalog: decode_section(TAG_CATALOG, find(TAG_CATALOG)?)?,
    };
    Ok((SnapshotHeader { version, created_at }, snap))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers see either the old content or the new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::invalid("path has no parent"))?;
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub artwork_id: String,
    pub rating: u8,
    pub rater: String,
    pub time: DateTime<Utc>,
}

impl RatingEvent {
    pub fn to_line(&self) -> String {
        format!("{},{},{},{}", self.artwork_id, self.rating, self.rater, self.time.to_rfc3339_opts(SecondsFormat::Micros, true))
    }

    pub fn parse_line(line: &str) -> Result<RatingEvent> {
        let bad = || Error::invalid(format!("malformed ledger line `{line}`"));
        let mut it = line.splitn(4, ',');
        let artwork_id = it.next().ok_or_else(bad)?.to_string();
        let rating = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let rater = it.next().ok_or_else(bad)?.to_string();
        let time = DateTime::parse_from_rfc3339(it.next().ok_or_else(bad)?).map_err(|_| bad())?.with_timezone(&Utc);
        Ok(RatingEvent { artwork_id, rating, rater, time })
    }
}

/// Rater ids are opaque but must fit in one ledger field.
pub fn validate_rater(rater: &str) -> Result<()> {
    if rater.is_empty() || rater.contains([',', '\n', '\r']) {
        return Err(Error::invalid("rater id must be non-empty without commas or newlines"));
    }
    Ok(())
}

/// One line of the catalog manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub status: ArtworkStatus,
    pub created_at: String,
    pub thumbnail_ref: Option<String>,
    pub target_domain: String,
    /// Internal evaluation passed (None when abandoned).
    pub eval_passed: Option<bool>,
}

impl CatalogEntry {
    pub fn from_record(r: &ArtworkRecord) -> Self {
        CatalogEntry {
            id: r.id.clone(),
            status: r.status,
            created_at: r.created_at.clone(),
            thumbnail_ref: r.executed_ref.clone(),
            target_domain: r.task.target_domain.clone(),
            eval_passed: r.internal_eval.map(|e| e.pass),
        }
    }
}

/// Persisted agent plus how much of the ledger it already contains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentFile {
    pub state: AgentState,
    pub ratings_applied: usize,
}

/// Handle on a store directory. Writers must be serialized by the caller.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store> {
        let root = root.into();
        fs::create_dir_all(root.join("snapshots"))?;
        fs::create_dir_all(root.join("artworks"))?;
        Ok(Store { root })
    }

    /// Opens an existing store without creating anything.
    pub fn open_existing(root: impl Into<PathBuf>) -> Result<Store> {
        let root = root.into();
        if !root.join("snapshots").is_dir() {
            return Err(Error::NotFound(format!("store at {}", root.display())));
        }
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshot_path(&self, id: &str) -> PathBuf {
        self.root.join("snapshots").join(format!("{id}.snap"))
    }

    pub fn artworks_dir(&self) -> PathBuf {
        self.root.join("artworks")
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.root.join("ratings.log")
    }

    fn agent_path(&self) -> PathBuf {
        self.root.join("agent.json")
    }

    fn catalog_path(&self) -> PathBuf {
        self.root.join("catalog.json")
    }

    /// Writes the snapshot and makes it current. Resets the live agent to the
    /// snapshot's initial agent when no agent file exists yet.
    pub fn save_snapshot(&self, snap: &Snapshot) -> Result<String> {
        let (id, bytes) = encode_snapshot(snap, Utc::now().timestamp())?;
        write_atomic(&self.snapshot_path(&id), &bytes)?;
        write_atomic(&self.root.join("snapshots").join("CURRENT"), id.as_bytes())?;
        if !self.agent_path().exists() {
            self.save_agent(&AgentFile { state: snap.initial_agent.clone(), ratings_applied: self.ratings()?.len() })?;
        }
        Ok(id)
    }

    pub fn current_snapshot_id(&self) -> Result<String> {
        let p = self.root.join("snapshots").join("CURRENT");
        match fs::read_to_string(&p) {
            Ok(s) => Ok(s.trim().to_string()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound("no snapshot; run train first".into())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn load_snapshot(&self, id: &str) -> Result<Snapshot> {
        let bytes = fs::read(self.snapshot_path(id)).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("snapshot {id}")),
            _ => e.into(),
        })?;
        Ok(decode_snapshot(&bytes)?.1)
    }

    pub fn load_current(&self) -> Result<Snapshot> {
        self.load_snapshot(&self.current_snapshot_id()?)
    }

    pub fn save_agent(&self, a: &AgentFile) -> Result<()> {
        let json = serde_json::to_vec_pretty(a).map_err(|e| Error::invalid(e.to_string()))?;
        write_atomic(&self.agent_path(), &json)
    }

    /// Live agent state. Ledger lines beyond `ratings_applied` (a crash
    /// between the ledger append and the agent write) are applied on load.
    pub fn load_agent(&self, initial: &AgentState) -> Result<AgentFile> {
        let mut file = match fs::read(self.agent_path()) {
            Ok(b) => serde_json::from_slice(&b).map_err(|e| Error::invalid(format!("agent.json: {e}")))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => AgentFile { state: initial.clone(), ratings_applied: 0 },
            Err(e) => return Err(e.into()),
        };
        let ledger = self.ratings()?;
        for ev in ledger.iter().skip(file.ratings_applied) {
            file.state.update_certainty(ev.rating)?;
        }
        file.ratings_applied = ledger.len();
        Ok(file)
    }

    pub fn ratings(&self) -> Result<Vec<RatingEvent>> {
        match fs::read_to_string(self.ledger_path()) {
            Ok(s) => s.lines().filter(|l| !l.trim().is_empty()).map(RatingEvent::parse_line).collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Validates the event, appends it to the ledger, applies it to `agent`
    /// and persists the agent. On error nothing is written.
    pub fn append_rating(&self, agent: &mut AgentFile, event: &RatingEvent) -> Result<()> {
        validate_rating(event.rating)?;
        validate_rater(&event.rater)?;
        self.artwork(&event.artwork_id)?;
        let mut next = agent.clone();
        next.state.update_certainty(event.rating)?;
        next.ratings_applied += 1;
        let mut f = OpenOptions::new().create(true).append(true).open(self.ledger_path())?;
        writeln!(f, "{}", event.to_line())?;
        f.sync_all()?;
        self.save_agent(&next)?;
        *agent = next;
        Ok(())
    }

    pub fn catalog(&self) -> Result<Vec<CatalogEntry>> {
        match fs::read(self.catalog_path()) {
            Ok(b) => serde_json::from_slice(&b).map_err(|e| Error::invalid(format!("catalog.json: {e}"))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn next_artwork_id(&self) -> Result<String> {
        Ok(format!("art-{:04}", self.catalog()?.len() + 1))
    }

    /// Writes images, the record and the catalog line, then the agent file.
    pub fn save_artwork(&self, art: &Artwork, agent: &AgentFile) -> Result<()> {
        let dir = self.artworks_dir();
        let id = &art.record.id;
        if let Some(m) = &art.mental {
            write_atomic(&dir.join(format!("{id}-mental.png")), &m.encode_png()?)?;
        }
        if let Some(e) = &art.executed {
            write_atomic(&dir.join(format!("{id}.png")), &e.encode_png()?)?;
        }
        let json = serde_json::to_vec_pretty(&art.record).map_err(|e| Error::invalid(e.to_string()))?;
        write_atomic(&dir.join(format!("{id}.json")), &json)?;
        let mut catalog = self.catalog()?;
        catalog.retain(|c| &c.id != id);
        catalog.push(CatalogEntry::from_record(&art.record));
        let json = serde_json::to_vec_pretty(&catalog).map_err(|e| Error::invalid(e.to_string()))?;
        write_atomic(&self.catalog_path(), &json)?;
        self.save_agent(agent)
    }

    pub fn artwork(&self, id: &str) -> Result<ArtworkRecord> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(Error::NotFound(format!("artwork `{id}`")));
        }
        let bytes = fs::read(self.artworks_dir().join(format!("{id}.json"))).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("artwork `{id}`")),
            _ => e.into(),
        })?;
        serde_json::from_slice(&bytes).map_err(|e| Error::invalid(format!("artwork `{id}`: {e}")))
    }

    /// Rebuilds the agent from the initial state: competence from the
    /// recorded outcome of every catalogued session, then certainty from the
    /// rating ledger.
    pub fn replay_agent(&self, initial: &AgentState) -> Result<AgentState> {
        let mut s = initial.clone();
        for c in self.catalog()? {
            match (c.status, c.eval_passed) {
                (ArtworkStatus::Accepted, Some(pass)) => {
                    s.update_competence(pass);
                    s.artworks_made += 1;
                }
                _ => s.update_competence(false),
            }
        }
        for ev in self.ratings()? {
            s.update_certainty(ev.rating)?;
        }
        Ok(s)
    }
}
