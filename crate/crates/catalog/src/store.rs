//! The on-disk catalog.
//!
//! ```text
//! <root>/index.json
//! <root>/players/<player>/<exercise>/<YYYYMMDDTHHMMSSZ>.mid
//! <root>/players/<player>/<exercise>/<YYYYMMDDTHHMMSSZ>.json   metadata sidecar
//! <root>/scores/<exercise>.json | <exercise>.mid
//! <root>/scales/<exercise>.json                                 optional
//! ```
//!
//! Every file is published by writing a temporary sibling and renaming it
//! into place. The index is renamed last, so a reader never sees an index
//! entry whose files are missing.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SecondsFormat, Utc};
use practice_scope::midi::{read_notes, ChannelMap, IngestDiagnostics};
use practice_scope::score::{load_score, ScoreOptions};
use practice_scope::{Fretboard, Recording, RecordingMeta, ReferenceScore, ScaleSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CatalogError, Result};

pub const INDEX_FILE: &str = "index.json";
const INDEX_VERSION: u32 = 1;
const CACHE_CAPACITY: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub id: String,
    pub meta: RecordingMeta,
    /// Path of the `.mid` file relative to the root, `/`-separated.
    pub path: String,
    /// Hex SHA-256 of the `.mid` file.
    pub digest: String,
    pub note_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    recordings: Vec<IndexEntry>,
}

/// Metadata stored next to each recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Sidecar {
    #[serde(flatten)]
    pub meta: RecordingMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_map: Option<ChannelMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordingSummary {
    pub id: String,
    #[serde(flatten)]
    pub meta: RecordingMeta,
    pub note_count: usize,
}

impl From<&IndexEntry> for RecordingSummary {
    fn from(e: &IndexEntry) -> Self {
        Self { id: e.id.clone(), meta: e.meta.clone(), note_count: e.note_count }
    }
}

/// Conjunctive filter; `since` and `until` are inclusive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingFilter {
    pub player: Option<String>,
    pub exercise: Option<String>,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
}

impl RecordingFilter {
    pub fn matches(&self, meta: &RecordingMeta) -> bool {
        self.player.as_ref().map_or(true, |p| *p == meta.player)
            && self.exercise.as_ref().map_or(true, |e| *e == meta.exercise)
            && self.since.map_or(true, |s| meta.recorded_at >= s)
            && self.until.map_or(true, |u| meta.recorded_at <= u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub id: String,
    pub diagnostics: IngestDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRecording {
    pub recording: Recording,
    pub digest: String,
    pub diagnostics: IngestDiagnostics,
}

/// Steps of an ingest after which a crash can be simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    AfterRecordingFile,
    AfterSidecar,
    BeforeIndexRename,
}

pub struct Catalog {
    root: PathBuf,
    board: Fretboard,
    entries: RwLock<Vec<IndexEntry>>,
    writer: Mutex<()>,
    crash_point: Mutex<Option<CrashPoint>>,
    cache: Mutex<HashMap<String, Arc<Vec<u8>>>>,
}

pub fn recording_id(meta: &RecordingMeta) -> String {
    let mut h = Sha256::new();
    h.update(meta.player.as_bytes());
    h.update([0]);
    h.update(meta.exercise.as_bytes());
    h.update([0]);
    h.update(meta.recorded_at.to_rfc3339_opts(SecondsFormat::Secs, true).as_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_stem(recorded_at: &DateTime<Utc>) -> String {
    recorded_at.format("%Y%m%dT%H%M%SZ").to_string()
}

/// Rejects names that would escape their directory or be awkward on disk.
pub fn validate_name(kind: &str, name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name == "."
        || name == ".."
        || name.starts_with('.')
        || name.chars().any(|c| matches!(c, '/' | '\\' | '\0' | ':') || c.is_control());
    if bad {
        Err(CatalogError::BadRequest(format!("invalid {kind} name `{name}`")))
    } else {
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = tmp_path(path);
    fs::write(&tmp, bytes).map_err(|e| CatalogError::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| CatalogError::io(format!("publishing {}", path.display()), e))
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().expect("file path").to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CatalogError::io(format!("reading {}", path.display()), e))
}

fn sort_entries(entries: &mut [IndexEntry]) {
    entries.sort_by(|a, b| a.meta.recorded_at.cmp(&b.meta.recorded_at).then(a.id.cmp(&b.id)));
}

impl Catalog {
    /// Opens the catalog at `root`, creating an empty one when the directory
    /// does not exist. Index entries whose files vanished are dropped; a
    /// missing index is rebuilt by scanning the recording tree.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CatalogError::io(format!("creating {}", root.display()), e))?;
        let catalog = Self {
            root,
            board: Fretboard::default(),
            entries: RwLock::new(Vec::new()),
            writer: Mutex::new(()),
            crash_point: Mutex::new(None),
            cache: Mutex::new(HashMap::new()),
        };
        let index_path = catalog.root.join(INDEX_FILE);
        if !index_path.exists() {
            catalog.rebuild_index()?;
            return Ok(catalog);
        }
        let file: IndexFile = serde_json::from_slice(&read(&index_path)?)
            .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", index_path.display())))?;
        let mut kept = Vec::with_capacity(file.recordings.len());
        let mut changed = false;
        for mut entry in file.recordings {
            let mid = catalog.root.join(&entry.path);
            let sidecar = mid.with_extension("json");
            if !mid.is_file() || !sidecar.is_file() {
                tracing::warn!(id = %entry.id, path = %entry.path, "dropping index entry with missing files");
                changed = true;
                continue;
            }
            let bytes = read(&mid)?;
            let actual = digest(&bytes);
            if actual != entry.digest {
                tracing::warn!(id = %entry.id, "recording changed on disk; re-parsing");
                entry.note_count = catalog.parse_file(&bytes, &sidecar)?.0.len();
                entry.digest = actual;
                changed = true;
            }
            kept.push(entry);
        }
        sort_entries(&mut kept);
        *catalog.entries.write().expect("index lock") = kept;
        if changed {
            let _guard = catalog.writer.lock().expect("writer lock");
            catalog.publish_index()?;
        }
        Ok(catalog)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn fretboard(&self) -> &Fretboard {
        &self.board
    }

    /// Rescans `players/` and rewrites the index from what is found. Files
    /// without a sidecar belong to an interrupted ingest and are ignored.
    pub fn rebuild_index(&self) -> Result<()> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut found = Vec::new();
        let players = self.root.join("players");
        for player_dir in sorted_dirs(&players)? {
            for exercise_dir in sorted_dirs(&player_dir)? {
                let mut files: Vec<PathBuf> = list(&exercise_dir)?
                    .into_iter()
                    .filter(|p| p.extension().is_some_and(|e| e == "mid"))
                    .collect();
                files.sort();
                for mid in files {
                    let sidecar_path = mid.with_extension("json");
                    if !sidecar_path.is_file() {
                        continue;
                    }
                    let bytes = read(&mid)?;
                    let (notes, sidecar) = self.parse_file(&bytes, &sidecar_path)?;
                    let rel = mid.strip_prefix(&self.root).expect("under root");
                    let path = rel.iter().map(|c| c.to_string_lossy()).collect::<Vec<_>>().join("/");
                    found.push(IndexEntry {
                        id: recording_id(&sidecar.meta),
                        meta: sidecar.meta,
                        path,
                        digest: digest(&bytes),
                        note_count: notes.len(),
                    });
                }
            }
        }
        sort_entries(&mut found);
        *self.entries.write().expect("index lock") = found;
        self.publish_index()
    }

    fn parse_file(&self, bytes: &[u8], sidecar_path: &Path) -> Result<(Vec<practice_scope::NoteEvent>, Sidecar)> {
        let sidecar: Sidecar = serde_json::from_slice(&read(sidecar_path)?)
            .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", sidecar_path.display())))?;
        let map = sidecar.channel_map.clone().unwrap_or_else(|| ChannelMap::hexaphonic(self.board.strings()));
        let (notes, _) = read_notes(bytes, Some(&map), &self.board)
            .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", sidecar_path.with_extension("mid").display())))?;
        Ok((notes, sidecar))
    }

    fn publish_index(&self) -> Result<()> {
        let file = IndexFile { version: INDEX_VERSION, recordings: self.entries.read().expect("index lock").clone() };
        let mut bytes = serde_json::to_vec_pretty(&file).expect("index serialises");
        bytes.push(b'\n');
        let path = self.root.join(INDEX_FILE);
        if self.take_crash(CrashPoint::BeforeIndexRename) {
            fs::write(tmp_path(&path), &bytes).map_err(|e| CatalogError::io("writing index", e))?;
            return Err(CatalogError::SimulatedCrash(CrashPoint::BeforeIndexRename));
        }
        write_atomic(&path, &bytes)
    }

    #[doc(hidden)]
    pub fn inject_crash(&self, point: Option<CrashPoint>) {
        *self.crash_point.lock().expect("crash lock") = point;
    }

    fn take_crash(&self, point: CrashPoint) -> bool {
        let mut slot = self.crash_point.lock().expect("crash lock");
        if *slot == Some(point) {
            *slot = None;
            true
        } else {
            false
        }
    }

    /// Validates and stores one recording. Nothing is written unless the
    /// file parses and the `(player, exercise, recordedAt)` triple is new.
    pub fn ingest(&self, bytes: &[u8], meta: RecordingMeta, channel_map: Option<ChannelMap>) -> Result<IngestOutcome> {
        validate_name("player", &meta.player)?;
        validate_name("exercise", &meta.exercise)?;
        let map = channel_map.clone().unwrap_or_else(|| ChannelMap::hexaphonic(self.board.strings()));
        let (notes, diagnostics) = read_notes(bytes, Some(&map), &self.board)
            .map_err(|e| CatalogError::Parse { message: e.to_string(), offset: Some(e.offset) })?;

        let _guard = self.writer.lock().expect("writer lock");
        let id = recording_id(&meta);
        if self.entries.read().expect("index lock").iter().any(|e| e.id == id) {
            return Err(CatalogError::Conflict(format!(
                "a recording of {} by {} at {} already exists",
                meta.exercise,
                meta.player,
                meta.recorded_at.to_rfc3339_opts(SecondsFormat::Secs, true)
            )));
        }
        let dir = self.root.join("players").join(&meta.player).join(&meta.exercise);
        fs::create_dir_all(&dir).map_err(|e| CatalogError::io(format!("creating {}", dir.display()), e))?;
        let stem = file_stem(&meta.recorded_at);
        let mid = dir.join(format!("{stem}.mid"));
        write_atomic(&mid, bytes)?;
        if self.take_crash(CrashPoint::AfterRecordingFile) {
            return Err(CatalogError::SimulatedCrash(CrashPoint::AfterRecordingFile));
        }
        let sidecar = Sidecar { meta: meta.clone(), channel_map };
        let mut sidecar_bytes = serde_json::to_vec_pretty(&sidecar).expect("sidecar serialises");
        sidecar_bytes.push(b'\n');
        write_atomic(&mid.with_extension("json"), &sidecar_bytes)?;
        if self.take_crash(CrashPoint::AfterSidecar) {
            return Err(CatalogError::SimulatedCrash(CrashPoint::AfterSidecar));
        }

        let entry = IndexEntry {
            id: id.clone(),
            meta,
            path: format!("players/{}/{}/{stem}.mid", sidecar.meta.player, sidecar.meta.exercise),
            digest: digest(bytes),
            note_count: notes.len(),
        };
        let previous = self.entries.read().expect("index lock").clone();
        {
            let mut entries = self.entries.write().expect("index lock");
            entries.push(entry);
            sort_entries(&mut entries);
        }
        if let Err(e) = self.publish_index() {
            *self.entries.write().expect("index lock") = previous;
            return Err(e);
        }
        tracing::info!(%id, "ingested recording");
        Ok(IngestOutcome { id, diagnostics })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("index lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matching entries in chronological order.
    pub fn entries(&self, filter: &RecordingFilter) -> Vec<IndexEntry> {
        self.entries.read().expect("index lock").iter().filter(|e| filter.matches(&e.meta)).cloned().collect()
    }

    pub fn query(&self, filter: &RecordingFilter) -> Vec<RecordingSummary> {
        self.entries(filter).iter().map(RecordingSummary::from).collect()
    }

    pub fn entry(&self, id: &str) -> Result<IndexEntry> {
        self.entries
            .read()
            .expect("index lock")
            .iter()
            .find(|e| e.id == id)
            .cloned()
            .ok_or_else(|| CatalogError::NotFound(format!("no recording with id `{id}`")))
    }

    pub fn players(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.entries.read().expect("index lock").iter().map(|e| e.meta.player.clone()).collect();
        set.into_iter().collect()
    }

    /// Exercises with recordings or a stored score.
    pub fn exercises(&self) -> Result<Vec<String>> {
        let mut set: BTreeSet<String> =
            self.entries.read().expect("index lock").iter().map(|e| e.meta.exercise.clone()).collect();
        for path in list(&self.root.join("scores"))? {
            let is_score = path.extension().is_some_and(|e| e == "json" || e == "mid");
            if let (true, Some(stem)) = (is_score, path.file_stem()) {
                set.insert(stem.to_string_lossy().into_owned());
            }
        }
        Ok(set.into_iter().collect())
    }

    /// Absolute path of a recording's `.mid` file.
    pub fn recording_path(&self, id: &str) -> Result<PathBuf> {
        Ok(self.root.join(self.entry(id)?.path))
    }

    /// Reads and parses one recording. A file whose digest no longer
    /// matches the index is re-parsed and the index refreshed.
    pub fn load(&self, id: &str) -> Result<LoadedRecording> {
        let entry = self.entry(id)?;
        let mid = self.root.join(&entry.path);
        let bytes = read(&mid)?;
        let sidecar_path = mid.with_extension("json");
        let sidecar: Sidecar = serde_json::from_slice(&read(&sidecar_path)?)
            .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", sidecar_path.display())))?;
        let map = sidecar.channel_map.unwrap_or_else(|| ChannelMap::hexaphonic(self.board.strings()));
        let (notes, diagnostics) = read_notes(&bytes, Some(&map), &self.board)
            .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", mid.display())))?;
        let actual = digest(&bytes);
        if actual != entry.digest {
            tracing::warn!(%id, "recording changed on disk; refreshing index");
            let _guard = self.writer.lock().expect("writer lock");
            if let Some(e) = self.entries.write().expect("index lock").iter_mut().find(|e| e.id == id) {
                e.digest = actual.clone();
                e.note_count = notes.len();
            }
            self.publish_index()?;
        }
        Ok(LoadedRecording { recording: Recording::new(entry.id, entry.meta, notes), digest: actual, diagnostics })
    }

    /// The reference score of an exercise and the digest of its file.
    pub fn score(&self, exercise: &str) -> Result<(ReferenceScore, String)> {
        validate_name("exercise", exercise)?;
        for ext in ["json", "mid"] {
            let path = self.root.join("scores").join(format!("{exercise}.{ext}"));
            if path.is_file() {
                let bytes = read(&path)?;
                let score = load_score(&bytes, exercise, ScoreOptions::default())
                    .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", path.display())))?;
                return Ok((score, digest(&bytes)));
            }
        }
        Err(CatalogError::NotFound(format!("no reference score for exercise `{exercise}`")))
    }

    pub fn put_score(&self, score: &ReferenceScore) -> Result<()> {
        validate_name("exercise", &score.exercise)?;
        let dir = self.root.join("scores");
        fs::create_dir_all(&dir).map_err(|e| CatalogError::io("creating scores directory", e))?;
        let mut bytes = score.to_json().into_bytes();
        bytes.push(b'\n');
        write_atomic(&dir.join(format!("{}.json", score.exercise)), &bytes)
    }

    /// The scale used for role analysis of an exercise; A minor pentatonic
    /// blues unless `scales/<exercise>.json` exists.
    pub fn scale(&self, exercise: &str) -> Result<(ScaleSpec, String)> {
        validate_name("exercise", exercise)?;
        let path = self.root.join("scales").join(format!("{exercise}.json"));
        if path.is_file() {
            let bytes = read(&path)?;
            let spec = serde_json::from_slice(&bytes)
                .map_err(|e| CatalogError::Corrupt(format!("{}: {e}", path.display())))?;
            return Ok((spec, digest(&bytes)));
        }
        Ok((ScaleSpec::a_minor_pentatonic_blues(), "builtin".to_string()))
    }

    pub fn put_scale(&self, exercise: &str, spec: &ScaleSpec) -> Result<()> {
        validate_name("exercise", exercise)?;
        let dir = self.root.join("scales");
        fs::create_dir_all(&dir).map_err(|e| CatalogError::io("creating scales directory", e))?;
        let mut bytes = serde_json::to_vec_pretty(spec).expect("scale serialises");
        bytes.push(b'\n');
        write_atomic(&dir.join(format!("{exercise}.json")), &bytes)
    }

    /// Memoised response body. Keys must name every input, including
    /// content digests, so stale entries are never served.
    pub fn cached(&self, key: String, compute: impl FnOnce() -> Result<Vec<u8>>) -> Result<Arc<Vec<u8>>> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let body = Arc::new(compute()?);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&body));
        Ok(body)
    }
}

fn list(dir: &Path) -> Result<Vec<PathBuf>> {
    match fs::read_dir(dir) {
        Ok(rd) => rd
            .map(|e| e.map(|e| e.path()).map_err(|e| CatalogError::io(format!("listing {}", dir.display()), e)))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(CatalogError::io(format!("listing {}", dir.display()), e)),
    }
}

fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = list(dir)?.into_iter().filter(|p| p.is_dir()).collect();
    dirs.sort();
    Ok(dirs)
}
