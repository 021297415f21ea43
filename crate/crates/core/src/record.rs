//! Persisted game records. One [`GameRecord`] is one JSON document; batches
//! are stored as JSON Lines. The field layout is documented in
//! `docs/schema.md` and versioned by [`SCHEMA_VERSION`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{GameConfig, PlayerId, PlayerState, RoundRecord};

pub const SCHEMA_VERSION: u32 = 1;

/// Where a game came from inside an experiment batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTag {
    pub setting_id: u32,
    pub repetition: u32,
    pub agents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<RunTag>,
    pub config: GameConfig,
    pub rounds: Vec<RoundRecord>,
    pub final_states: BTreeMap<PlayerId, PlayerState>,
}

impl GameRecord {
    pub fn survivors(&self) -> impl Iterator<Item = &PlayerId> {
        self.config
            .roster
            .iter()
            .map(|p| &p.id)
            .filter(|id| self.final_states.get(*id).is_some_and(|s| s.alive))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("GameRecord always serializes")
    }

    /// Parses one record, rejecting documents written under another schema.
    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        #[derive(Deserialize)]
        struct Probe {
            schema_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(RecordError::SchemaVersion {
                found: probe.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}:{line}: {source}")]
    Line {
        path: String,
        line: usize,
        #[source]
        source: Box<RecordError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads every record in a JSON Lines file. Blank lines are skipped.
pub fn read_jsonl(path: &Path) -> Result<Vec<GameRecord>, RecordError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = GameRecord::from_json(&line).map_err(|e| RecordError::Line {
            path: path.display().to_string(),
            line: i + 1,
            source: Box::new(e),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a GameRecord>,
) -> std::io::Result<()> {
    for r in records {
        w.write_all(r.to_json().as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
