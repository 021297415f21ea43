//! Whole-game properties over many randomized scripted games. Each check
//! recomputes the expected value from the round log by hand instead of
//! calling the engine.

use num_rational::Ratio;
use proptest::prelude::*;
use waterbid_core::agents::{Agent, ScriptedAgent, StrategyKind};
use waterbid_core::analysis::{compute_indicators, Rsr};
use waterbid_core::engine::{replay, GameConfig};
use waterbid_core::play::play_game;
use waterbid_core::rng::SplitMix64;
use waterbid_core::GameRecord;

fn strategy(rng: &mut SplitMix64) -> StrategyKind {
    match rng.uniform_inclusive(0, 3) {
        0 => StrategyKind::Constant {
            amount: rng.uniform_inclusive(0, 400),
        },
        1 => StrategyKind::FractionOfBalance {
            fraction: rng.uniform_inclusive(0, 100) as f64 / 100.0,
        },
        2 => StrategyKind::Desperation,
        _ => StrategyKind::Random {
            seed: rng.next_u64(),
        },
    }
}

fn random_game(seed: u64) -> GameRecord {
    let mut rng = SplitMix64::new(seed);
    let (lo, hi) = [(10, 20), (15, 25), (20, 30)][rng.uniform_inclusive(0, 2) as usize];
    let cfg = GameConfig::standard(lo, hi, rng.next_u64());
    let mut agents: Vec<Box<dyn Agent>> = (0..cfg.roster.len())
        .map(|_| Box::new(ScriptedAgent::new(strategy(&mut rng))) as _)
        .collect();
    play_game(cfg, &mut agents, None).unwrap()
}

fn games() -> impl Iterator<Item = GameRecord> {
    (0..500).map(|i| random_game(0xC0FFEE + i))
}

#[test]
fn hp_follows_the_daily_rules() {
    let mut violations = Vec::new();
    for (g, rec) in games().enumerate() {
        let cfg = &rec.config;
        for p in &cfg.roster {
            let (mut hp, mut nwd, mut alive) = (cfg.hp_start, 0u64, true);
            for r in &rec.rounds {
                if !alive {
                    if r.bid_of(&p.id).is_some() {
                        violations.push(format!("game {g}: {} bid after death", p.id));
                    }
                    continue;
                }
                if r.winners.iter().any(|w| w.player_id == p.id) {
                    hp = (hp + cfg.water_gain).min(cfg.hp_max);
                    nwd = 0;
                } else {
                    nwd += 1;
                    hp -= nwd as i64;
                }
                if r.hp_after[&p.id] != hp || r.nwd_after[&p.id] != nwd {
                    violations.push(format!(
                        "game {g} day {}: {} hp {} nwd {} expected {hp} {nwd}",
                        r.day, p.id, r.hp_after[&p.id], r.nwd_after[&p.id]
                    ));
                }
                if hp <= 0 {
                    alive = false;
                    if !r.eliminated.contains(&p.id) {
                        violations.push(format!("game {g} day {}: {} not eliminated", r.day, p.id));
                    }
                }
            }
            if rec.final_states[&p.id].alive != alive {
                violations.push(format!("game {g}: final alive flag of {}", p.id));
            }
        }
    }
    assert!(violations.is_empty(), "{} violations, first: {:?}", violations.len(), &violations[..violations.len().min(5)]);
}

#[test]
fn end_rate_never_below_start_rate() {
    for (g, rec) in games().enumerate() {
        let ind = compute_indicators(&rec).unwrap();
        match (ind.rsr_s, ind.rsr_e) {
            (Rsr::Ratio(s), Rsr::Ratio(e)) => assert!(e >= s, "game {g}: {e} < {s}"),
            (Rsr::Ratio(_), Rsr::AllEliminated) => assert_eq!(ind.n_survivor, 0),
            other => panic!("game {g}: {other:?}"),
        }
        let demand: u64 = rec
            .config
            .roster
            .iter()
            .filter(|p| ind.survival[&p.id])
            .map(|p| p.requirement)
            .sum();
        if demand > 0 {
            let expect = Ratio::new(rec.config.supply_low + rec.config.supply_high, 2 * demand);
            assert_eq!(ind.rsr_e, Rsr::Ratio(expect));
        }
    }
}

#[test]
fn money_and_water_are_conserved() {
    for (g, rec) in games().enumerate() {
        let cfg = &rec.config;
        let mut balance: std::collections::BTreeMap<_, u64> =
            cfg.roster.iter().map(|p| (p.id.clone(), 0)).collect();
        for r in &rec.rounds {
            assert!((cfg.supply_low..=cfg.supply_high).contains(&r.supply));
            let units: u64 = r.winners.iter().map(|w| w.units).sum();
            assert!(units <= r.supply, "game {g} day {}: overallocated", r.day);
            for p in &cfg.roster {
                if r.bid_of(&p.id).is_none() {
                    continue;
                }
                let mut b = balance[&p.id] + p.salary;
                if let Some(w) = r.winners.iter().find(|w| w.player_id == p.id) {
                    let bid = r.bid_of(&p.id).unwrap().amount.unwrap();
                    assert_eq!(w.payment, bid, "first price");
                    assert_eq!(w.units, p.requirement);
                    b -= w.payment;
                }
                if r.eliminated.contains(&p.id) {
                    b = 0;
                }
                assert_eq!(r.balance_after[&p.id], b, "game {g} day {} {}", r.day, p.id);
                balance.insert(p.id.clone(), b);
            }
            let min = r.winners.iter().map(|w| w.payment).min();
            assert_eq!(r.min_successful_bid, min);
        }
    }
}

#[test]
fn every_game_replays_to_itself() {
    for (g, rec) in games().take(100).enumerate() {
        assert_eq!(replay(&rec).unwrap(), rec, "game {g}");
    }
}

proptest! {
    #[test]
    fn record_json_round_trip(seed in any::<u64>()) {
        let rec = random_game(seed);
        let back = GameRecord::from_json(&rec.to_json()).unwrap();
        prop_assert_eq!(back, rec);
    }
}
