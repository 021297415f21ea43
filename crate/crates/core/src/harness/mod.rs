//! Batch runner for the six standard experiment settings: seeds, on-disk
//! records and manifests, and resuming interrupted batches.

mod run;
mod setting;

pub use run::{
    default_out_root, load_results, run_experiment, setting_dir, AgentFactory,
    ExperimentOutcome, Manifest, ManifestEntry, RunOptions, RunStatus, StandardFactory,
    DEFAULT_LLM_PARALLELISM, MANIFEST_FILE, OUT_ENV, RECORDS_FILE,
};
pub use setting::{Abundance, AgentKind, ExperimentSetting, SeatKind};

use std::path::PathBuf;

use thiserror::Error;

use crate::agents::AgentError;
use crate::play::PlayError;
use crate::record::RecordError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Setting(String),
    #[error("output directory {} is not writable: {source}", path.display())]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("corrupt records file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Play(#[from] PlayError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
