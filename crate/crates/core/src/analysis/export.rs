//! Report files written by `analyze`:
//!
//! - `survival.csv`: one row per setting and player.
//! - `runs.csv`: one row per setting and run.
//! - `summary.txt`: survival grid per setting, as a fixed-width table.
//! - `plot_data.json`: box-plot data, distributions and per-run curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::aggregate::SettingSummary;
use super::quantile::{QUANTILE_METHOD, WHISKER_METHOD};
use super::rsr::round_ratio;
use super::AnalysisError;
use crate::record::SCHEMA_VERSION;

pub const SURVIVAL_CSV: &str = "survival.csv";
pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const PLOT_JSON: &str = "plot_data.json";

pub fn survival_csv(summaries: &[SettingSummary]) -> Result<String, AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["setting_id", "label", "player", "runs", "survived", "survival_rate"])?;
    for s in summaries {
        for p in &s.players {
            w.write_record([
                s.setting_id.to_string(),
                s.label.clone(),
                p.player.to_string(),
                p.runs.to_string(),
                p.survived.to_string(),
                p.rate_display(),
            ])?;
        }
    }
    finish(w)
}

pub fn runs_csv(summaries: &[SettingSummary]) -> Result<String, AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "setting_id",
        "repetition",
        "seed",
        "days_played",
        "rsr_s",
        "rsr_e",
        "n_survivor",
        "survivors",
    ])?;
    for s in summaries {
        for r in &s.runs {
            let survivors: Vec<&str> = r
                .indicators
                .survival
                .iter()
                .filter(|(_, &alive)| alive)
                .map(|(id, _)| id.as_str())
                .collect();
            w.write_record([
                s.setting_id.to_string(),
                r.repetition.to_string(),
                r.seed.to_string(),
                r.days_played.to_string(),
                r.indicators.rsr_s.to_string(),
                r.indicators.rsr_e.to_string(),
                r.indicators.n_survivor.to_string(),
                survivors.join(";"),
            ])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, AnalysisError> {
    let bytes = w
        .into_inner()
        .map_err(|e| AnalysisError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8"))
}

/// One block per setting: a row per player with a mark per run and the
/// survival rate, then RSR_S, RSR_E and survivor counts per run.
pub fn summary_table(summaries: &[SettingSummary]) -> String {
    let mut out = String::new();
    for s in summaries {
        let n = s.runs.len();
        let _ = writeln!(
            out,
            "Setting {}: {} ({} runs, {} failed runs excluded)",
            s.setting_id, s.label, n, s.failed_runs
        );
        let mut header = format!("{:<8}", "");
        for r in &s.runs {
            let _ = write!(header, "{:>6}", r.repetition + 1);
        }
        let _ = writeln!(out, "{header}{:>7}", "Avg.");
        for p in &s.players {
            let mut line = format!("{:<8}", p.player.as_str());
            for r in &s.runs {
                let mark = if r.indicators.survival[&p.player] { "Y" } else { "x" };
                let _ = write!(line, "{mark:>6}");
            }
            let _ = writeln!(out, "{line}{:>7}", p.rate_display());
        }
        let mean = |m: Option<num_rational::Ratio<u64>>| {
            m.map_or_else(|| "n/a".to_string(), |r| round_ratio(r, 2))
        };
        let mut line = format!("{:<8}", "RSR_S");
        for r in &s.runs {
            let _ = write!(line, "{:>6}", r.indicators.rsr_s.to_string());
        }
        let _ = writeln!(out, "{line}{:>7}", mean(s.rsr_s_mean_exact));
        let mut line = format!("{:<8}", "RSR_E");
        for r in &s.runs {
            let v = r.indicators.rsr_e.to_string();
            let v = if v == "all-eliminated" { "-".to_string() } else { v };
            let _ = write!(line, "{v:>6}");
        }
        let _ = writeln!(out, "{line}{:>7}", mean(s.rsr_e_mean_exact));
        let mut line = format!("{:<8}", "N_surv");
        for r in &s.runs {
            let _ = write!(line, "{:>6}", r.indicators.n_survivor);
        }
        let avg = s.n_survivor.stats.as_ref().map_or(0.0, |b| b.mean);
        let _ = writeln!(out, "{line}{avg:>7.2}");
        out.push('\n');
    }
    out
}

pub fn plot_data(summaries: &[SettingSummary]) -> serde_json::Value {
    json!({
        "metadata": {
            "schema_version": SCHEMA_VERSION,
            "quantile_method": QUANTILE_METHOD,
            "whisker_method": WHISKER_METHOD,
            "missing_days": "days after a run ended, or with no winner, contribute no value",
        },
        "settings": summaries,
    })
}

/// Writes all report files into `dir` and returns their paths.
pub fn write_reports(summaries: &[SettingSummary], dir: &Path) -> Result<Vec<PathBuf>, AnalysisError> {
    fs::create_dir_all(dir)?;
    let files = [
        (SURVIVAL_CSV, survival_csv(summaries)?),
        (RUNS_CSV, runs_csv(summaries)?),
        (SUMMARY_TXT, summary_table(summaries)),
        (
            PLOT_JSON,
            serde_json::to_string_pretty(&plot_data(summaries)).expect("plot data serializes"),
        ),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
