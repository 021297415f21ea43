use std::collections::BTreeMap;

use super::types::{Allocation, GameConfig, PlayerId, PlayerSpec, PlayerState};
use super::EngineError;

/// Credits each living player's daily salary. Eliminated players earn nothing.
pub fn credit_salaries(states: &mut BTreeMap<PlayerId, PlayerState>, roster: &[PlayerSpec]) {
    for spec in roster {
        if let Some(state) = states.get_mut(&spec.id) {
            if state.alive {
                state.balance += spec.salary;
            }
        }
    }
}

/// Applies one day's auction outcome to the player states.
///
/// Winners pay their bid, gain `water_gain` HP (capped at `hp_max`) and
/// reset their No-Water Days. Every other living player's No-Water Days
/// increments and they lose that many HP. Deaths are settled after all HP
/// changes, so several players can be eliminated on the same day; their
/// balance is forfeited.
///
/// Returns the eliminated players in roster order.
pub fn settle_round(
    states: &mut BTreeMap<PlayerId, PlayerState>,
    winners: &[Allocation],
    config: &GameConfig,
) -> Result<Vec<PlayerId>, EngineError> {
    for w in winners {
        let state = states
            .get_mut(&w.player_id)
            .ok_or_else(|| EngineError::UnknownPlayer(w.player_id.clone()))?;
        if !state.alive {
            return Err(EngineError::Invariant(format!(
                "eliminated player `{}` won an allocation",
                w.player_id
            )));
        }
        state.balance = state.balance.checked_sub(w.payment).ok_or_else(|| {
            EngineError::Invariant(format!(
                "winner `{}` cannot pay {} from balance {}",
                w.player_id, w.payment, state.balance
            ))
        })?;
        state.hp = (state.hp + config.water_gain).min(config.hp_max);
        state.no_water_days = 0;
    }

    for (id, state) in states.iter_mut() {
        if !state.alive || winners.iter().any(|w| &w.player_id == id) {
            continue;
        }
        state.no_water_days += 1;
        state.hp -= state.no_water_days as i64;
    }

    let mut eliminated = Vec::new();
    for spec in &config.roster {
        let Some(state) = states.get_mut(&spec.id) else {
            continue;
        };
        if state.alive && state.hp <= 0 {
            state.alive = false;
            state.balance = 0;
            eliminated.push(spec.id.clone());
        }
    }
    Ok(eliminated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_player(hp: i64, nwd: u64, balance: u64) -> (GameConfig, BTreeMap<PlayerId, PlayerState>) {
        let mut cfg = GameConfig::standard(10, 20, 0);
        cfg.roster.truncate(1);
        let mut states = BTreeMap::new();
        states.insert(
            PlayerId::new("Alex"),
            PlayerState {
                hp,
                balance,
                no_water_days: nwd,
                alive: true,
            },
        );
        (cfg, states)
    }

    fn win(payment: u64) -> Vec<Allocation> {
        vec![Allocation {
            player_id: PlayerId::new("Alex"),
            units: 8,
            payment,
        }]
    }

    #[test]
    fn winner_gains_two_hp_and_resets_nwd() {
        let (cfg, mut s) = one_player(8, 2, 100);
        settle_round(&mut s, &win(40), &cfg).unwrap();
        let a = s[&PlayerId::new("Alex")];
        assert_eq!((a.hp, a.no_water_days, a.balance), (10, 0, 60));
    }

    #[test]
    fn winner_hp_is_capped() {
        let (cfg, mut s) = one_player(10, 0, 100);
        settle_round(&mut s, &win(1), &cfg).unwrap();
        assert_eq!(s[&PlayerId::new("Alex")].hp, 10);
    }

    #[test]
    fn four_misses_from_eight_hp() {
        // hp_k = hp_{k-1} - k
        let (cfg, mut s) = one_player(8, 0, 0);
        let mut trace = vec![];
        let mut died_on = None;
        for day in 1..=4 {
            let out = settle_round(&mut s, &[], &cfg).unwrap();
            trace.push(s[&PlayerId::new("Alex")].hp);
            if !out.is_empty() {
                died_on = Some(day);
            }
        }
        assert_eq!(trace, [7, 5, 2, -2]);
        assert_eq!(died_on, Some(4));
        assert!(!s[&PlayerId::new("Alex")].alive);
    }

    #[test]
    fn death_forfeits_balance() {
        let (cfg, mut s) = one_player(1, 0, 500);
        let out = settle_round(&mut s, &[], &cfg).unwrap();
        assert_eq!(out, [PlayerId::new("Alex")]);
        assert_eq!(s[&PlayerId::new("Alex")].balance, 0);
    }

    #[test]
    fn overdrawn_winner_is_invariant_violation() {
        let (cfg, mut s) = one_player(8, 0, 10);
        assert!(matches!(
            settle_round(&mut s, &win(11), &cfg),
            Err(EngineError::Invariant(_))
        ));
    }

    #[test]
    fn salaries_only_for_the_living() {
        let cfg = GameConfig::standard(10, 20, 0);
        let mut s: BTreeMap<_, _> = cfg
            .roster
            .iter()
            .map(|p| (p.id.clone(), PlayerState::initial(8)))
            .collect();
        s.get_mut(&PlayerId::new("Bob")).unwrap().alive = false;
        credit_salaries(&mut s, &cfg.roster);
        assert_eq!(s[&PlayerId::new("Alex")].balance, 70);
        assert_eq!(s[&PlayerId::new("Bob")].balance, 0);
        credit_salaries(&mut s, &cfg.roster);
        credit_salaries(&mut s, &cfg.roster);
        assert_eq!(s[&PlayerId::new("Eric")].balance, 360);
    }
}
