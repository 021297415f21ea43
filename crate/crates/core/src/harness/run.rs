use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::setting::{ExperimentSetting, SeatKind};
use super::HarnessError;
use crate::agents::{
    attach_personas, bundled_personas, Agent, LlmAgent, LlmSettings, ScriptedAgent,
};
use crate::chat::ChatCompleter;
use crate::engine::{PersonaText, PlayerId};
use crate::play::play_game;
use crate::record::{write_jsonl, GameRecord, RunTag, SCHEMA_VERSION};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "WATERBID_OUT";
/// Default concurrency for games with LLM seats, matching the gateway's
/// in-flight request limit.
pub const DEFAULT_LLM_PARALLELISM: usize = 5;

pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

pub fn setting_dir(out_root: &Path, setting_id: u32) -> PathBuf {
    out_root.join(format!("setting-{setting_id}"))
}

/// Builds the agent for one seat of one repetition.
pub trait AgentFactory: Sync {
    fn build(
        &self,
        seat: SeatKind,
        setting: &ExperimentSetting,
        repetition: u32,
    ) -> Result<Box<dyn Agent>, HarnessError>;
}

/// Scripted seats need nothing; LLM seats need a completer.
#[derive(Clone, Default)]
pub struct StandardFactory {
    completer: Option<Arc<dyn ChatCompleter>>,
    llm: LlmSettings,
}

impl StandardFactory {
    pub fn scripted_only() -> Self {
        Self::default()
    }

    pub fn with_llm(completer: Arc<dyn ChatCompleter>, llm: LlmSettings) -> Self {
        Self {
            completer: Some(completer),
            llm,
        }
    }
}

impl AgentFactory for StandardFactory {
    fn build(
        &self,
        seat: SeatKind,
        setting: &ExperimentSetting,
        _repetition: u32,
    ) -> Result<Box<dyn Agent>, HarnessError> {
        match seat {
            SeatKind::Scripted(kind) => Ok(Box::new(ScriptedAgent::new(kind))),
            SeatKind::Llm => {
                let completer = self.completer.clone().ok_or_else(|| {
                    HarnessError::Setting("LLM seats need a configured gateway".into())
                })?;
                let mut settings = self.llm.clone();
                if settings.experiment.is_empty() {
                    settings.experiment = format!("setting-{}", setting.setting_id);
                }
                Ok(Box::new(LlmAgent::new(completer, settings)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pending,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub repetition: u32,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Progress of one setting's batch. Holds no timestamps so reruns produce
/// the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub setting: ExperimentSetting,
    pub runs: Vec<ManifestEntry>,
}

impl Manifest {
    fn fresh(setting: &ExperimentSetting) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            setting: setting.clone(),
            runs: (0..setting.repetitions)
                .map(|rep| ManifestEntry {
                    repetition: rep,
                    seed: setting.seed_for(rep),
                    status: RunStatus::Pending,
                    error: None,
                })
                .collect(),
        }
    }

    pub fn failed_count(&self) -> u64 {
        self.runs
            .iter()
            .filter(|e| e.status == RunStatus::Failed)
            .count() as u64
    }

    fn set(&mut self, rep: u32, status: RunStatus, error: Option<String>) {
        if let Some(e) = self.runs.iter_mut().find(|e| e.repetition == rep) {
            e.status = status;
            e.error = error;
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Manifest(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Manifest(format!(
                "{}: schema version {} (expected {SCHEMA_VERSION})",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }

    fn store(&self, path: &Path) -> std::io::Result<()> {
        let mut body = serde_json::to_string_pretty(self).expect("manifest serializes");
        body.push('\n');
        write_atomic(path, body.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Games played at once; 0 picks a default from the agent kind.
    pub parallelism: usize,
    /// Stop after this many new games. Used to simulate interrupted batches.
    pub max_new_games: Option<usize>,
    pub personas: BTreeMap<PlayerId, PersonaText>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            parallelism: 0,
            max_new_games: None,
            personas: bundled_personas(),
        }
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    /// Completed games sorted by repetition, including earlier sessions.
    pub records: Vec<GameRecord>,
    /// Repetitions that failed in this session, with the error.
    pub failed: Vec<(u32, String)>,
    /// Repetitions already complete before this session.
    pub resumed: usize,
    pub manifest: Manifest,
}

/// Reads back the records file, tolerating a torn final line left by an
/// interrupted append.
fn load_existing(path: &Path, setting: &ExperimentSetting) -> Result<BTreeMap<u32, GameRecord>, HarnessError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut out = BTreeMap::new();
    for (idx, (lineno, line)) in lines.iter().enumerate() {
        let rec = match GameRecord::from_json(line) {
            Ok(r) => r,
            Err(e) if idx + 1 == lines.len() => {
                tracing::warn!("{}:{}: dropping torn last line ({e})", path.display(), lineno + 1);
                continue;
            }
            Err(e) => {
                return Err(HarnessError::Corrupt(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        let rep = match &rec.tag {
            Some(t) if t.setting_id == setting.setting_id && t.repetition < setting.repetitions => {
                t.repetition
            }
            _ => {
                return Err(HarnessError::Corrupt(format!(
                    "{}:{}: record does not belong to setting {} with {} repetitions",
                    path.display(),
                    lineno + 1,
                    setting.setting_id,
                    setting.repetitions
                )))
            }
        };
        if rec.config.seed != setting.seed_for(rep) {
            return Err(HarnessError::Corrupt(format!(
                "{}:{}: repetition {rep} has seed {}, expected {}",
                path.display(),
                lineno + 1,
                rec.config.seed,
                setting.seed_for(rep)
            )));
        }
        out.entry(rep).or_insert(rec);
    }
    Ok(out)
}

fn play_one(
    setting: &ExperimentSetting,
    rep: u32,
    factory: &dyn AgentFactory,
    personas: &BTreeMap<PlayerId, PersonaText>,
) -> Result<GameRecord, HarnessError> {
    let mut config = setting.config_for(rep);
    if setting.persona {
        attach_personas(&mut config.roster, personas)?;
    }
    let mut agents = setting
        .agents
        .seats(config.roster.len())?
        .into_iter()
        .map(|seat| factory.build(seat, setting, rep))
        .collect::<Result<Vec<_>, _>>()?;
    let tag = RunTag {
        setting_id: setting.setting_id,
        repetition: rep,
        agents: setting.agents.to_string(),
    };
    Ok(play_game(config, &mut agents, Some(tag))?)
}

struct Sink {
    file: File,
    manifest: Manifest,
    manifest_path: PathBuf,
}

/// Runs (or resumes) one setting's batch under `out_root/setting-<id>/`.
///
/// Each finished game is appended to `records.jsonl` and marked in
/// `manifest.json` before the next one is persisted. A failed game is
/// marked failed and the batch continues; it is retried on the next resume.
/// When the batch ends the records file is rewritten sorted by repetition.
pub fn run_experiment(
    setting: &ExperimentSetting,
    out_root: &Path,
    factory: &dyn AgentFactory,
    opts: &RunOptions,
) -> Result<ExperimentOutcome, HarnessError> {
    setting.agents.seats(setting.config_for(0).roster.len())?;
    let dir = setting_dir(out_root, setting.setting_id);
    let unwritable = |source| HarnessError::Unwritable {
        path: dir.clone(),
        source,
    };
    fs::create_dir_all(&dir).map_err(unwritable)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let records_path = dir.join(RECORDS_FILE);

    let mut manifest = if manifest_path.exists() {
        let old = Manifest::load(&manifest_path)?;
        let same = ExperimentSetting {
            repetitions: setting.repetitions,
            ..old.setting.clone()
        };
        if &same != setting {
            return Err(HarnessError::Mismatch(format!(
                "{} was written for a different setting",
                manifest_path.display()
            )));
        }
        let mut m = Manifest::fresh(setting);
        for e in old.runs {
            if e.repetition < setting.repetitions && e.status == RunStatus::Failed {
                m.set(e.repetition, e.status, e.error);
            }
        }
        m
    } else {
        Manifest::fresh(setting)
    };

    let mut done = load_existing(&records_path, setting)?;
    for rep in done.keys() {
        manifest.set(*rep, RunStatus::Completed, None);
    }
    let resumed = done.len();

    // Compacting up front drops any torn line so appends start clean. This
    // is also the write probe: nothing is played if it fails.
    let mut buf = Vec::new();
    write_jsonl(&mut buf, done.values())?;
    write_atomic(&records_path, &buf).map_err(unwritable)?;
    manifest.store(&manifest_path).map_err(unwritable)?;

    let mut pending: Vec<u32> = (0..setting.repetitions)
        .filter(|r| !done.contains_key(r))
        .collect();
    if let Some(limit) = opts.max_new_games {
        pending.truncate(limit);
    }

    let file = OpenOptions::new().append(true).open(&records_path)?;
    let sink = Mutex::new(Sink {
        file,
        manifest,
        manifest_path,
    });
    let parallelism = match opts.parallelism {
        0 if setting.agents.uses_llm() => DEFAULT_LLM_PARALLELISM,
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| HarnessError::Setting(format!("thread pool: {e}")))?;

    let results: Vec<(u32, Result<GameRecord, String>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&rep| -> Result<_, HarnessError> {
                let played = play_one(setting, rep, factory, &opts.personas);
                let mut s = sink.lock().expect("sink lock");
                let outcome = match played {
                    Ok(rec) => {
                        let mut line = rec.to_json();
                        line.push('\n');
                        s.file.write_all(line.as_bytes())?;
                        s.file.flush()?;
                        s.manifest.set(rep, RunStatus::Completed, None);
                        Ok(rec)
                    }
                    Err(e) => {
                        tracing::warn!("setting {} repetition {rep} failed: {e}", setting.setting_id);
                        s.manifest.set(rep, RunStatus::Failed, Some(e.to_string()));
                        Err(e.to_string())
                    }
                };
                let path = s.manifest_path.clone();
                s.manifest.store(&path)?;
                Ok((rep, outcome))
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;

    let mut failed = Vec::new();
    for (rep, outcome) in results {
        match outcome {
            Ok(rec) => {
                done.insert(rep, rec);
            }
            Err(e) => failed.push((rep, e)),
        }
    }
    failed.sort();
    let Sink { file, manifest, .. } = sink.into_inner().expect("sink lock");
    drop(file);
    let mut buf = Vec::new();
    write_jsonl(&mut buf, done.values())?;
    write_atomic(&records_path, &buf)?;

    Ok(ExperimentOutcome {
        dir,
        records: done.into_values().collect(),
        failed,
        resumed,
        manifest,
    })
}

/// Collects records and failed-run counts for analysis. `path` may be a
/// JSON Lines file, one setting directory, or an output root holding
/// `setting-*` directories.
pub fn load_results(path: &Path) -> Result<(Vec<GameRecord>, BTreeMap<u32, u64>), HarnessError> {
    let mut records = Vec::new();
    let mut failed = BTreeMap::new();
    if path.is_file() {
        records = crate::record::read_jsonl(path)?;
        return Ok((records, failed));
    }
    let mut dirs = Vec::new();
    if path.join(RECORDS_FILE).is_file() {
        dirs.push(path.to_path_buf());
    } else {
        for entry in fs::read_dir(path)? {
            let p = entry?.path();
            let is_setting = p
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("setting-"));
            if is_setting && p.join(RECORDS_FILE).is_file() {
                dirs.push(p);
            }
        }
        dirs.sort();
    }
    if dirs.is_empty() {
        return Err(HarnessError::Setting(format!(
            "no {RECORDS_FILE} found under {}",
            path.display()
        )));
    }
    for dir in dirs {
        let manifest_path = dir.join(MANIFEST_FILE);
        if manifest_path.is_file() {
            let m = Manifest::load(&manifest_path)?;
            *failed.entry(m.setting.setting_id).or_insert(0) += m.failed_count();
        }
        records.extend(crate::record::read_jsonl(&dir.join(RECORDS_FILE))?);
    }
    Ok((records, failed))
}
