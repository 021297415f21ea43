use std::collections::{BTreeMap, BTreeSet};

use super::allocate::allocate;
use super::settle::{credit_salaries, settle_round};
use super::types::{Bid, GameConfig, PlayerId, PlayerState, RoundRecord};
use super::EngineError;
use crate::record::{GameRecord, RunTag, SCHEMA_VERSION};
use crate::rng::SplitMix64;

/// Draws one day's supply from the configured discrete uniform range.
pub fn sample_supply(rng: &mut SplitMix64, config: &GameConfig) -> u64 {
    rng.uniform_inclusive(config.supply_low, config.supply_high)
}

/// The public facts of a day once salaries are paid and supply announced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenDay {
    pub day: u32,
    pub supply: u64,
}

/// One game in progress.
///
/// Each day runs in two phases: [`Game::open_day`] pays salaries and
/// announces the supply, then [`Game::step_day`] takes the sealed bids,
/// runs the auction and settles health.
#[derive(Debug, Clone)]
pub struct Game {
    config: GameConfig,
    rng: SplitMix64,
    states: BTreeMap<PlayerId, PlayerState>,
    rounds: Vec<RoundRecord>,
    open: Option<OpenDay>,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let states = config
            .roster
            .iter()
            .map(|p| (p.id.clone(), PlayerState::initial(config.hp_start)))
            .collect();
        Ok(Self {
            rng: SplitMix64::new(config.seed),
            config,
            states,
            rounds: Vec::new(),
            open: None,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn states(&self) -> &BTreeMap<PlayerId, PlayerState> {
        &self.states
    }

    pub fn state(&self, id: &PlayerId) -> Option<&PlayerState> {
        self.states.get(id)
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn current_day(&self) -> Option<OpenDay> {
        self.open
    }

    pub fn living(&self) -> impl Iterator<Item = &PlayerId> {
        self.config
            .roster
            .iter()
            .map(|p| &p.id)
            .filter(|id| self.states[*id].alive)
    }

    pub fn is_finished(&self) -> bool {
        self.rounds.len() as u32 >= self.config.days || self.states.values().all(|s| !s.alive)
    }

    /// Credits salaries and draws the day's supply.
    pub fn open_day(&mut self) -> Result<OpenDay, EngineError> {
        if self.is_finished() {
            return Err(EngineError::GameFinished);
        }
        if let Some(open) = self.open {
            return Err(EngineError::DayAlreadyOpen(open.day));
        }
        credit_salaries(&mut self.states, &self.config.roster);
        let supply = sample_supply(&mut self.rng, &self.config);
        let open = OpenDay {
            day: self.rounds.len() as u32 + 1,
            supply,
        };
        self.open = Some(open);
        Ok(open)
    }

    /// Resolves the open day. Living players without a bid are recorded as
    /// abstaining. On error the day stays open and no state changes.
    pub fn step_day(&mut self, bids: Vec<Bid>) -> Result<&RoundRecord, EngineError> {
        let open = self.open.ok_or(EngineError::NoOpenDay)?;
        let bids = self.validate_bids(bids)?;

        let requirements = self.config.requirements();
        let winners = allocate(&bids, &requirements, open.supply, self.config.allocation_rule)?;
        let mut next = self.states.clone();
        let eliminated = settle_round(&mut next, &winners, &self.config)?;
        self.states = next;
        self.open = None;

        let record = RoundRecord {
            day: open.day,
            supply: open.supply,
            min_successful_bid: winners.iter().map(|w| w.payment).min(),
            bids,
            winners,
            hp_after: self.states.iter().map(|(k, s)| (k.clone(), s.hp)).collect(),
            nwd_after: self
                .states
                .iter()
                .map(|(k, s)| (k.clone(), s.no_water_days))
                .collect(),
            balance_after: self
                .states
                .iter()
                .map(|(k, s)| (k.clone(), s.balance))
                .collect(),
            eliminated,
        };
        self.rounds.push(record);
        Ok(self.rounds.last().expect("just pushed"))
    }

    fn validate_bids(&self, bids: Vec<Bid>) -> Result<Vec<Bid>, EngineError> {
        let mut by_player: BTreeMap<PlayerId, Bid> = BTreeMap::new();
        for bid in bids {
            let state = self
                .states
                .get(&bid.player_id)
                .ok_or_else(|| EngineError::UnknownPlayer(bid.player_id.clone()))?;
            if !state.alive {
                return Err(EngineError::EliminatedBidder(bid.player_id));
            }
            if let Some(amount) = bid.amount {
                if amount == 0 {
                    return Err(EngineError::ZeroBid(bid.player_id));
                }
                if amount > state.balance {
                    return Err(EngineError::InsufficientBalance {
                        player: bid.player_id,
                        amount,
                        balance: state.balance,
                    });
                }
            }
            if by_player.contains_key(&bid.player_id) {
                return Err(EngineError::DuplicateBid(bid.player_id));
            }
            by_player.insert(bid.player_id.clone(), bid);
        }
        Ok(self
            .living()
            .map(|id| {
                by_player
                    .remove(id)
                    .unwrap_or_else(|| Bid::abstain(id.clone(), ""))
            })
            .collect())
    }

    pub fn into_record(self, tag: Option<RunTag>) -> GameRecord {
        GameRecord {
            schema_version: SCHEMA_VERSION,
            tag,
            config: self.config,
            rounds: self.rounds,
            final_states: self.states,
        }
    }
}

/// Re-simulates a recorded game from its config and recorded bids.
///
/// Returns the freshly produced record; it equals the input exactly when
/// the input was produced by this engine.
pub fn replay(record: &GameRecord) -> Result<GameRecord, EngineError> {
    let mut game = Game::new(record.config.clone())?;
    for round in &record.rounds {
        let open = game.open_day()?;
        if open.supply != round.supply || open.day != round.day {
            return Err(EngineError::ReplayDivergence {
                day: round.day,
                detail: format!(
                    "recorded supply {} on day {}, engine drew {} on day {}",
                    round.supply, round.day, open.supply, open.day
                ),
            });
        }
        let recorded_ids: BTreeSet<_> = round.bids.iter().map(|b| &b.player_id).collect();
        let living: BTreeSet<_> = game.living().collect();
        if recorded_ids != living {
            return Err(EngineError::ReplayDivergence {
                day: round.day,
                detail: "recorded bidders differ from the living players".into(),
            });
        }
        game.step_day(round.bids.clone())?;
    }
    Ok(game.into_record(record.tag.clone()))
}
