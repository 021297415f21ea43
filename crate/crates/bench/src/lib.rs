//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use waterbid_core::agents::{Agent, ScriptedAgent, StrategyKind};
use waterbid_core::engine::{Bid, GameConfig, PlayerId};
use waterbid_core::play::play_game;
use waterbid_core::rng::SplitMix64;
use waterbid_core::{GameRecord, RunTag};

/// `n` sealed offers with requirements 1..=15 and bids 1..=500.
pub fn offers(n: usize, seed: u64) -> (Vec<Bid>, BTreeMap<PlayerId, u64>) {
    let mut rng = SplitMix64::new(seed);
    let bids = (0..n)
        .map(|i| Bid::offer(format!("p{i}").as_str(), rng.uniform_inclusive(1, 500), ""))
        .collect();
    let reqs = (0..n)
        .map(|i| (PlayerId::new(format!("p{i}")), rng.uniform_inclusive(1, 15)))
        .collect();
    (bids, reqs)
}

pub fn strategies() -> Vec<StrategyKind> {
    vec![
        StrategyKind::Desperation,
        StrategyKind::FractionOfBalance { fraction: 0.4 },
        StrategyKind::Random { seed: 9 },
        StrategyKind::Constant { amount: 45 },
        StrategyKind::Desperation,
    ]
}

/// A full-length scripted game under low abundance.
pub fn scripted_game(seed: u64) -> GameRecord {
    let cfg = GameConfig::standard(10, 20, seed);
    let mut agents: Vec<Box<dyn Agent>> = strategies()
        .into_iter()
        .map(|k| Box::new(ScriptedAgent::new(k)) as _)
        .collect();
    play_game(cfg, &mut agents, None).expect("scripted game")
}

/// Six settings of `reps` tagged scripted games each.
pub fn corpus(reps: u32) -> Vec<GameRecord> {
    let mut out = Vec::new();
    for setting_id in 1..=6u32 {
        let (lo, hi) = [(10, 20), (15, 25), (20, 30)][(setting_id as usize - 1) % 3];
        for rep in 0..reps {
            let cfg = GameConfig::standard(lo, hi, u64::from(setting_id * 1000 + rep));
            let mut agents: Vec<Box<dyn Agent>> = strategies()
                .into_iter()
                .map(|k| Box::new(ScriptedAgent::new(k)) as _)
                .collect();
            let tag = RunTag {
                setting_id,
                repetition: rep,
                agents: "mixed".into(),
            };
            out.push(play_game(cfg, &mut agents, Some(tag)).expect("scripted game"));
        }
    }
    out
}
