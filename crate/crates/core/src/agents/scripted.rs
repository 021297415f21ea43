//! Deterministic baseline strategies.
//!
//! Each strategy is a pure function of the player's current status (and,
//! for `Random`, its seed), never bids above the balance, and abstains when
//! the computed amount is zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentDecision, AgentError, DecisionInput};
use crate::rng::{mix_seed, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Always offer `amount`, clamped to the balance.
    Constant { amount: u64 },
    /// Offer `floor(balance * fraction)`.
    FractionOfBalance { fraction: f64 },
    /// Offer a quarter of the balance per No-Water Day plus one quarter,
    /// i.e. `floor(balance * min(nwd + 1, 4) / 4)`.
    Desperation,
    /// Offer a uniformly random share of the balance, derived from
    /// `(seed, day, player)` only.
    Random { seed: u64 },
}

/// The inputs a scripted strategy may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusSummary {
    pub day: u32,
    pub supply: u64,
    pub requirement: u64,
    pub hp: i64,
    pub balance: u64,
    pub no_water_days: u64,
    /// Stable per-player salt for randomized strategies.
    pub player_salt: u64,
}

pub fn scripted_strategy(kind: StrategyKind, s: &StatusSummary) -> AgentDecision {
    let (amount, why) = match kind {
        StrategyKind::Constant { amount } => (amount, format!("constant offer of ${amount}")),
        StrategyKind::FractionOfBalance { fraction } => {
            let f = fraction.clamp(0.0, 1.0);
            (
                (s.balance as f64 * f).floor() as u64,
                format!("{:.0}% of balance", f * 100.0),
            )
        }
        StrategyKind::Desperation => {
            let quarters = (s.no_water_days + 1).min(4);
            (
                (s.balance as u128 * quarters as u128 / 4) as u64,
                format!("{quarters}/4 of balance after {} dry days", s.no_water_days),
            )
        }
        StrategyKind::Random { seed } => {
            let mut rng = SplitMix64::new(mix_seed(&[seed, s.day as u64, s.player_salt]));
            let amount = rng.uniform_inclusive(0, s.balance);
            (amount, format!("random draw (seed {seed})"))
        }
    };
    let amount = amount.min(s.balance);
    let bid = (amount > 0).then_some(amount);
    let reason = match bid {
        Some(a) => format!("scripted: {why}; bidding ${a}"),
        None => format!("scripted: {why}; nothing to offer"),
    };
    AgentDecision {
        bid,
        raw_response: reason.clone(),
        reason,
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Constant { amount } => write!(f, "constant:{amount}"),
            StrategyKind::FractionOfBalance { fraction } => write!(f, "fraction:{fraction}"),
            StrategyKind::Desperation => f.write_str("desperation"),
            StrategyKind::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    /// Parses `constant:<n>`, `fraction:<f>`, `desperation` or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| format!("strategy `{name}` needs a {what} argument");
        match (name, arg) {
            ("constant", Some(a)) => a
                .parse()
                .map(|amount| StrategyKind::Constant { amount })
                .map_err(|e| format!("bad constant amount `{a}`: {e}")),
            ("constant", None) => Err(need("dollar")),
            ("fraction", Some(a)) => match a.parse::<f64>() {
                Ok(fraction) if (0.0..=1.0).contains(&fraction) => {
                    Ok(StrategyKind::FractionOfBalance { fraction })
                }
                _ => Err(format!("fraction `{a}` must be a number in [0, 1]")),
            },
            ("fraction", None) => Err(need("fraction")),
            ("desperation", None) => Ok(StrategyKind::Desperation),
            ("random", Some(a)) => a
                .parse()
                .map(|seed| StrategyKind::Random { seed })
                .map_err(|e| format!("bad random seed `{a}`: {e}")),
            ("random", None) => Err(need("seed")),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

/// An [`Agent`] driven by a fixed [`StrategyKind`].
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    kind: StrategyKind,
}

impl ScriptedAgent {
    pub fn new(kind: StrategyKind) -> Self {
        Self { kind }
    }
}

pub(crate) fn salt_for(id: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

impl Agent for ScriptedAgent {
    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<AgentDecision, AgentError> {
        let summary = StatusSummary {
            day: input.day,
            supply: input.supply,
            requirement: input.player.requirement,
            hp: input.state.hp,
            balance: input.state.balance,
            no_water_days: input.state.no_water_days,
            player_salt: salt_for(input.player.id.as_str()),
        };
        Ok(scripted_strategy(self.kind, &summary))
    }

    fn label(&self) -> String {
        format!("scripted:{}", self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn status(balance: u64, nwd: u64) -> StatusSummary {
        StatusSummary {
            day: 3,
            supply: 15,
            requirement: 8,
            hp: 6,
            balance,
            no_water_days: nwd,
            player_salt: 1,
        }
    }

    #[test]
    fn constant_is_clamped() {
        let d = scripted_strategy(StrategyKind::Constant { amount: 100 }, &status(70, 0));
        assert_eq!(d.bid, Some(70));
    }

    #[test]
    fn half_of_balance() {
        let d = scripted_strategy(
            StrategyKind::FractionOfBalance { fraction: 0.5 },
            &status(240, 0),
        );
        assert_eq!(d.bid, Some(120));
    }

    #[test]
    fn broke_players_abstain() {
        for kind in [
            StrategyKind::Constant { amount: 5 },
            StrategyKind::Desperation,
            StrategyKind::Random { seed: 1 },
        ] {
            assert_eq!(scripted_strategy(kind, &status(0, 2)).bid, None);
        }
    }

    #[test]
    fn parse_and_display_agree() {
        for s in ["constant:100", "fraction:0.25", "desperation", "random:7"] {
            assert_eq!(s.parse::<StrategyKind>().unwrap().to_string(), s);
        }
        assert!("fraction:1.5".parse::<StrategyKind>().is_err());
        assert!("greedy".parse::<StrategyKind>().is_err());
    }

    proptest! {
        #[test]
        fn desperation_grows_with_dry_days(balance in 1u64..100_000) {
            let calm = scripted_strategy(StrategyKind::Desperation, &status(balance, 0)).bid.unwrap_or(0);
            let dry = scripted_strategy(StrategyKind::Desperation, &status(balance, 3)).bid.unwrap_or(0);
            prop_assert!(dry > calm);
        }

        #[test]
        fn never_bids_above_balance(balance in 0u64..10_000, nwd in 0u64..8, seed in any::<u64>(), k in 0u64..20_000) {
            for kind in [
                StrategyKind::Constant { amount: k },
                StrategyKind::FractionOfBalance { fraction: 0.9 },
                StrategyKind::Desperation,
                StrategyKind::Random { seed },
            ] {
                let d = scripted_strategy(kind, &status(balance, nwd));
                prop_assert!(d.bid.is_none_or(|b| b >= 1 && b <= balance));
                prop_assert_eq!(d.clone(), scripted_strategy(kind, &status(balance, nwd)));
            }
        }
    }
}
