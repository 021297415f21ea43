use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use super::indicators::{compute_indicators, IndicatorSet};
use super::quantile::BoxStats;
use super::rsr::{compute_rsr, mean_rsr, round_ratio, Rsr};
use super::AnalysisError;
use crate::engine::{GameConfig, PlayerId};
use crate::record::GameRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerSurvival {
    pub player: PlayerId,
    pub runs: u64,
    pub survived: u64,
}

impl PlayerSurvival {
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.survived, self.runs.max(1))
    }

    pub fn rate_display(&self) -> String {
        round_ratio(self.rate(), 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub repetition: u32,
    pub seed: u64,
    pub days_played: u32,
    pub indicators: IndicatorSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DayBox {
    pub day: u32,
    pub values: Vec<f64>,
    pub stats: Option<BoxStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub values: Vec<f64>,
    pub stats: Option<BoxStats>,
}

impl Distribution {
    fn new(values: Vec<f64>) -> Self {
        let stats = BoxStats::from_values(&values);
        Self { values, stats }
    }
}

/// Per-day curves for one run: bids, health and balance per player, and the
/// satisfaction rate of the players alive after each day.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCurves {
    pub repetition: u32,
    pub days: Vec<u32>,
    pub bid: BTreeMap<PlayerId, Vec<Option<u64>>>,
    pub hp: BTreeMap<PlayerId, Vec<i64>>,
    pub balance: BTreeMap<PlayerId, Vec<u64>>,
    pub rsr: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingSummary {
    pub setting_id: u32,
    pub label: String,
    pub failed_runs: u64,
    pub players: Vec<PlayerSurvival>,
    pub runs: Vec<RunSummary>,
    pub rsr_s_mean: Option<f64>,
    pub rsr_e_mean: Option<f64>,
    #[serde(skip)]
    pub rsr_s_mean_exact: Option<Ratio<u64>>,
    #[serde(skip)]
    pub rsr_e_mean_exact: Option<Ratio<u64>>,
    pub min_bid_box: Vec<DayBox>,
    pub daily_median: Vec<(u32, Option<f64>)>,
    pub mean_of_daily_medians: Option<f64>,
    pub n_survivor: Distribution,
    pub rsr_e: Distribution,
    pub curves: Vec<RunCurves>,
}

pub fn abundance_label(cfg: &GameConfig) -> String {
    let level = match (cfg.supply_low, cfg.supply_high) {
        (10, 20) => "Low".to_string(),
        (15, 25) => "Medium".to_string(),
        (20, 30) => "High".to_string(),
        (lo, hi) => format!("Custom {lo}..{hi}"),
    };
    let persona = if cfg.persona_enabled { "with persona" } else { "without persona" };
    format!("{level} abundance ({}..{}), {persona}", cfg.supply_low, cfg.supply_high)
}

fn curves(record: &GameRecord, repetition: u32) -> RunCurves {
    let cfg = &record.config;
    let mut out = RunCurves {
        repetition,
        days: record.rounds.iter().map(|r| r.day).collect(),
        bid: BTreeMap::new(),
        hp: BTreeMap::new(),
        balance: BTreeMap::new(),
        rsr: Vec::new(),
    };
    for p in &cfg.roster {
        let id = &p.id;
        out.bid.insert(
            id.clone(),
            record
                .rounds
                .iter()
                .map(|r| r.bid_of(id).and_then(|b| b.amount))
                .collect(),
        );
        out.hp.insert(
            id.clone(),
            record.rounds.iter().map(|r| r.hp_after[id]).collect(),
        );
        out.balance.insert(
            id.clone(),
            record.rounds.iter().map(|r| r.balance_after[id]).collect(),
        );
    }
    out.rsr = record
        .rounds
        .iter()
        .map(|r| {
            let alive = cfg.roster.iter().filter(|p| r.hp_after[&p.id] > 0);
            compute_rsr(cfg.supply_low, cfg.supply_high, alive).as_f64()
        })
        .collect();
    out
}

fn median_of(values: &[f64]) -> Option<f64> {
    BoxStats::from_values(values).map(|b| b.median)
}

/// Summarizes the records of one setting.
pub fn summarize_setting(
    setting_id: u32,
    records: &[&GameRecord],
    failed_runs: u64,
) -> Result<SettingSummary, AnalysisError> {
    let first = records.first().ok_or(AnalysisError::EmptyGroup(setting_id))?;
    if let Some(other) = records
        .iter()
        .find(|r| r.schema_version != first.schema_version)
    {
        return Err(AnalysisError::MixedSchema {
            setting_id,
            a: first.schema_version,
            b: other.schema_version,
        });
    }
    let roster = &first.config.roster;

    let mut runs = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let repetition = rec.tag.as_ref().map_or(i as u32, |t| t.repetition);
        runs.push(RunSummary {
            repetition,
            seed: rec.config.seed,
            days_played: rec.rounds.len() as u32,
            indicators: compute_indicators(rec)?,
        });
    }

    let players = roster
        .iter()
        .map(|p| PlayerSurvival {
            player: p.id.clone(),
            runs: runs.len() as u64,
            survived: runs
                .iter()
                .filter(|r| r.indicators.survival.get(&p.id).copied().unwrap_or(false))
                .count() as u64,
        })
        .collect();

    let max_days = records.iter().map(|r| r.config.days).max().unwrap_or(0);
    let min_bid_box: Vec<DayBox> = (1..=max_days)
        .map(|day| {
            let values: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.indicators.min_bid_series.get(&day).copied().flatten())
                .map(|v| v as f64)
                .collect();
            DayBox {
                day,
                stats: BoxStats::from_values(&values),
                values,
            }
        })
        .collect();
    let daily_median: Vec<(u32, Option<f64>)> = min_bid_box
        .iter()
        .map(|b| (b.day, median_of(&b.values)))
        .collect();
    let medians: Vec<f64> = daily_median.iter().filter_map(|(_, m)| *m).collect();
    let mean_of_daily_medians =
        (!medians.is_empty()).then(|| medians.iter().sum::<f64>() / medians.len() as f64);

    let rsr_s: Vec<Rsr> = runs.iter().map(|r| r.indicators.rsr_s).collect();
    let rsr_e: Vec<Rsr> = runs.iter().map(|r| r.indicators.rsr_e).collect();
    let rsr_s_mean_exact = mean_rsr(&rsr_s);
    let rsr_e_mean_exact = mean_rsr(&rsr_e);
    let to_f64 = |r: Option<Ratio<u64>>| r.map(|r| *r.numer() as f64 / *r.denom() as f64);

    Ok(SettingSummary {
        setting_id,
        label: abundance_label(&first.config),
        failed_runs,
        players,
        rsr_s_mean: to_f64(rsr_s_mean_exact),
        rsr_e_mean: to_f64(rsr_e_mean_exact),
        rsr_s_mean_exact,
        rsr_e_mean_exact,
        min_bid_box,
        daily_median,
        mean_of_daily_medians,
        n_survivor: Distribution::new(
            runs.iter().map(|r| r.indicators.n_survivor as f64).collect(),
        ),
        rsr_e: Distribution::new(rsr_e.iter().filter_map(Rsr::as_f64).collect()),
        curves: records
            .iter()
            .zip(&runs)
            .map(|(rec, run)| curves(rec, run.repetition))
            .collect(),
        runs,
    })
}

/// Groups records by setting (untagged records form setting 0) and
/// summarizes each group. `failed` gives the number of failed runs per
/// setting, which were excluded from the records.
pub fn aggregate(
    records: &[GameRecord],
    failed: &BTreeMap<u32, u64>,
) -> Result<Vec<SettingSummary>, AnalysisError> {
    let mut groups: BTreeMap<u32, Vec<&GameRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry(r.tag.as_ref().map_or(0, |t| t.setting_id))
            .or_default()
            .push(r);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|r| (r.tag.as_ref().map(|t| t.repetition), r.config.seed));
    }
    groups
        .into_iter()
        .map(|(id, recs)| summarize_setting(id, &recs, failed.get(&id).copied().unwrap_or(0)))
        .collect()
}
