//! File-per-level store: `levels/{id}.xml` plus `levels/{id}.json`.
//!
//! Every write goes to a temporary file in the same directory and is then
//! renamed over the target, so readers never see partial files. The XML is
//! written before its metadata; a level exists once both files do.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sketchlevel_core::levelgen::{GenerationConfig, LevelSpec};
use sketchlevel_core::recognizer::RecognitionResult;
use sketchlevel_core::stability::{DifficultyStats, StabilityReport};
use sketchlevel_core::therapy::{FeedbackSession, GameplayOutcome};
use thiserror::Error;

/// Store failures.
#[derive(Debug, Error)]
pub enum StoreError {
    /// Filesystem error.
    #[error("{path}: {source}")]
    Io {
        /// Path involved.
        path: String,
        /// Cause.
        source: io::Error,
    },
    /// Metadata file is not valid JSON.
    #[error("{path}: corrupt metadata: {message}")]
    Corrupt {
        /// Path involved.
        path: String,
        /// Details.
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Metadata stored next to each level file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMeta {
    /// Level id.
    pub id: String,
    /// Creation time.
    pub created_at: DateTime<Utc>,
    /// Level on the grid, including per-block kind and origin.
    pub spec: LevelSpec,
    /// Recognition of the drawing.
    pub recognition: RecognitionResult,
    /// Counts and score.
    pub stats: DifficultyStats,
    /// Support check.
    pub stability: StabilityReport,
    /// Latest reported outcome.
    pub outcome: Option<GameplayOutcome>,
    /// Feedback rotation state for this level's session.
    #[serde(default)]
    pub feedback_session: FeedbackSession,
    /// Generation settings used.
    pub config: GenerationConfig,
}

/// A stored level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    /// Metadata.
    pub meta: LevelMeta,
    /// Level file text.
    pub xml: String,
}

/// Level store rooted at a directory.
#[derive(Debug)]
pub struct Store {
    levels: PathBuf,
    writes: Mutex<()>,
}

/// Fresh 128-bit random id, 32 lowercase hex digits.
pub fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

/// True for ids this store could have issued.
pub fn is_valid_id(id: &str) -> bool {
    id.len() == 32 && id.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io {
        path: path.display().to_string(),
        source: e.error,
    })?;
    Ok(())
}

impl Store {
    /// Opens (and creates) `root/levels`.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let levels = root.as_ref().join("levels");
        fs::create_dir_all(&levels).map_err(io_err(&levels))?;
        Ok(Self {
            levels,
            writes: Mutex::new(()),
        })
    }

    /// Directory holding the level files.
    pub fn levels_dir(&self) -> &Path {
        &self.levels
    }

    fn xml_path(&self, id: &str) -> PathBuf {
        self.levels.join(format!("{id}.xml"))
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.levels.join(format!("{id}.json"))
    }

    fn write_meta(&self, meta: &LevelMeta) -> Result<(), StoreError> {
        let mut json = serde_json::to_vec_pretty(meta).expect("metadata serializes");
        json.push(b'\n');
        atomic_write(&self.meta_path(&meta.id), &json)
    }

    /// Saves a new level.
    pub fn put(&self, record: &LevelRecord) -> Result<(), StoreError> {
        assert!(is_valid_id(&record.meta.id), "store ids come from new_id");
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        atomic_write(&self.xml_path(&record.meta.id), record.xml.as_bytes())?;
        self.write_meta(&record.meta)
    }

    fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, StoreError> {
        match fs::read(path) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(path)(e)),
        }
    }

    /// Level file bytes exactly as stored.
    pub fn xml(&self, id: &str) -> Result<Option<Vec<u8>>, StoreError> {
        if !is_valid_id(id) || !self.meta_path(id).exists() {
            return Ok(None);
        }
        Self::read_optional(&self.xml_path(id))
    }

    /// Metadata file bytes exactly as stored.
    pub fn meta_bytes(&self, id: &str) -> Result<Option<Vec<u8>>, StoreError> {
        if !is_valid_id(id) {
            return Ok(None);
        }
        Self::read_optional(&self.meta_path(id))
    }

    /// Metadata of a level.
    pub fn meta(&self, id: &str) -> Result<Option<LevelMeta>, StoreError> {
        if !is_valid_id(id) {
            return Ok(None);
        }
        let path = self.meta_path(id);
        let Some(bytes) = Self::read_optional(&path)? else {
            return Ok(None);
        };
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| StoreError::Corrupt {
                path: path.display().to_string(),
                message: e.to_string(),
            })
    }

    /// Read-modify-write of a level's metadata under the store's write lock.
    pub fn update_meta<T>(
        &self,
        id: &str,
        change: impl FnOnce(&mut LevelMeta) -> T,
    ) -> Result<Option<T>, StoreError> {
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        let Some(mut meta) = self.meta(id)? else {
            return Ok(None);
        };
        let out = change(&mut meta);
        self.write_meta(&meta)?;
        Ok(Some(out))
    }
}
