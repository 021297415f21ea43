use std::collections::BTreeMap;

use serde::Serialize;

use super::rsr::{compute_rsr, Rsr};
use super::AnalysisError;
use crate::engine::PlayerId;
use crate::record::{GameRecord, SCHEMA_VERSION};

/// Per-game indicators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSet {
    /// Rate at the start of the game (whole roster).
    pub rsr_s: Rsr,
    /// Rate at the end of the game (survivors only).
    pub rsr_e: Rsr,
    pub n_survivor: usize,
    pub survival: BTreeMap<PlayerId, bool>,
    /// Smallest winning bid for each played day; `None` when nobody won.
    /// Days after an early end are absent.
    pub min_bid_series: BTreeMap<u32, Option<u64>>,
}

pub fn compute_indicators(record: &GameRecord) -> Result<IndicatorSet, AnalysisError> {
    if record.schema_version != SCHEMA_VERSION {
        return Err(AnalysisError::SchemaVersion(record.schema_version));
    }
    let cfg = &record.config;
    let survival: BTreeMap<PlayerId, bool> = cfg
        .roster
        .iter()
        .map(|p| {
            let alive = record.final_states.get(&p.id).is_some_and(|s| s.alive);
            (p.id.clone(), alive)
        })
        .collect();
    let survivors = cfg.roster.iter().filter(|p| survival[&p.id]);
    Ok(IndicatorSet {
        rsr_s: compute_rsr(cfg.supply_low, cfg.supply_high, &cfg.roster),
        rsr_e: compute_rsr(cfg.supply_low, cfg.supply_high, survivors),
        n_survivor: survival.values().filter(|&&s| s).count(),
        min_bid_series: record
            .rounds
            .iter()
            .map(|r| (r.day, r.min_successful_bid))
            .collect(),
        survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Agent, ScriptedAgent, StrategyKind};
    use crate::engine::GameConfig;
    use crate::play::play_game;

    #[test]
    fn everyone_survives_means_equal_rates() {
        // Supply far above demand: everyone always wins.
        let mut cfg = GameConfig::standard(60, 60, 1);
        cfg.days = 5;
        let mut agents: Vec<Box<dyn Agent>> = (0..5)
            .map(|_| Box::new(ScriptedAgent::new(StrategyKind::Constant { amount: 10 })) as _)
            .collect();
        let rec = play_game(cfg, &mut agents, None).unwrap();
        let ind = compute_indicators(&rec).unwrap();
        assert_eq!(ind.n_survivor, 5);
        assert_eq!(ind.rsr_e, ind.rsr_s);
        assert_eq!(ind.min_bid_series.len(), 5);
        assert!(ind.min_bid_series.values().all(|v| *v == Some(10)));
    }
}
