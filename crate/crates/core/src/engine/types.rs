use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Stable player identifier. Ordering on ids is the last tie-break level of
/// the auction, so it must be total and stable across runs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Three-part persona appended to an agent's rules prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaText {
    pub profession: String,
    pub personality: String,
    pub background: String,
}

impl PersonaText {
    pub fn validate(&self) -> Result<(), EngineError> {
        for (field, value) in [
            ("profession", &self.profession),
            ("personality", &self.personality),
            ("background", &self.background),
        ] {
            if value.trim().is_empty() {
                return Err(EngineError::InvalidConfig(format!(
                    "persona section `{field}` is empty"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: PlayerId,
    pub name: String,
    /// Water units needed per day; bids are all-or-nothing for this amount.
    pub requirement: u64,
    /// Currency credited at the start of each day while alive.
    pub salary: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona: Option<PersonaText>,
}

impl PlayerSpec {
    pub fn new(name: &str, requirement: u64, salary: u64) -> Self {
        Self {
            id: PlayerId::new(name),
            name: name.to_string(),
            requirement,
            salary,
            persona: None,
        }
    }

    pub fn with_persona(mut self, persona: PersonaText) -> Self {
        self.persona = Some(persona);
        self
    }
}

/// The five W-Town residents: (name, requirement, salary).
pub const STANDARD_ROSTER: [(&str, u64, u64); 5] = [
    ("Alex", 8, 70),
    ("Bob", 9, 75),
    ("Cindy", 10, 100),
    ("David", 11, 120),
    ("Eric", 12, 120),
];

pub fn standard_roster() -> Vec<PlayerSpec> {
    STANDARD_ROSTER
        .iter()
        .map(|&(name, req, salary)| PlayerSpec::new(name, req, salary))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    /// May be negative on the day of elimination.
    pub hp: i64,
    pub balance: u64,
    pub no_water_days: u64,
    pub alive: bool,
}

impl PlayerState {
    pub fn initial(hp_start: i64) -> Self {
        Self {
            hp: hp_start,
            balance: 0,
            no_water_days: 0,
            alive: true,
        }
    }
}

/// How the allocation walk treats a bidder whose requirement no longer fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationRule {
    /// Skip the misfit and keep walking; lower bidders may still win.
    #[default]
    SkipAndContinue,
    /// End the auction at the first bidder that does not fit.
    StopAtFirstMisfit,
}

/// When salaries are paid. Only one schedule exists; it is recorded so that
/// a record states its own assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SalaryTiming {
    #[default]
    CreditBeforeAuction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub days: u32,
    pub hp_start: i64,
    pub hp_max: i64,
    pub water_gain: i64,
    pub supply_low: u64,
    pub supply_high: u64,
    pub roster: Vec<PlayerSpec>,
    pub seed: u64,
    #[serde(default)]
    pub salary_timing: SalaryTiming,
    #[serde(default)]
    pub allocation_rule: AllocationRule,
    /// Whether agents receive their persona text in the rules prompt.
    #[serde(default)]
    pub persona_enabled: bool,
}

impl GameConfig {
    /// Standard 20-day game with the five-resident roster.
    pub fn standard(supply_low: u64, supply_high: u64, seed: u64) -> Self {
        Self {
            days: 20,
            hp_start: 8,
            hp_max: 10,
            water_gain: 2,
            supply_low,
            supply_high,
            roster: standard_roster(),
            seed,
            salary_timing: SalaryTiming::CreditBeforeAuction,
            allocation_rule: AllocationRule::SkipAndContinue,
            persona_enabled: false,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidConfig(msg));
        if self.days == 0 {
            return bad("days must be at least 1".into());
        }
        if self.supply_low == 0 || self.supply_low > self.supply_high {
            return bad(format!(
                "supply bounds must satisfy 1 <= low <= high, got {}..={}",
                self.supply_low, self.supply_high
            ));
        }
        if self.roster.is_empty() {
            return bad("roster is empty".into());
        }
        if self.hp_start <= 0 || self.hp_start > self.hp_max {
            return bad(format!(
                "hp_start {} must be in 1..={}",
                self.hp_start, self.hp_max
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.roster {
            if !seen.insert(&p.id) {
                return bad(format!("duplicate player id `{}`", p.id));
            }
            if p.requirement == 0 || p.salary == 0 {
                return bad(format!(
                    "player `{}` needs requirement >= 1 and salary >= 1",
                    p.id
                ));
            }
            if let Some(persona) = &p.persona {
                persona.validate()?;
            }
        }
        Ok(())
    }

    pub fn player(&self, id: &PlayerId) -> Option<&PlayerSpec> {
        self.roster.iter().find(|p| &p.id == id)
    }

    pub fn requirements(&self) -> BTreeMap<PlayerId, u64> {
        self.roster
            .iter()
            .map(|p| (p.id.clone(), p.requirement))
            .collect()
    }

    pub fn total_requirement(&self) -> u64 {
        self.roster.iter().map(|p| p.requirement).sum()
    }
}

/// A sealed bid. `amount == None` means the player sat the auction out,
/// which is distinct from any positive offer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub player_id: PlayerId,
    pub amount: Option<u64>,
    #[serde(default)]
    pub reason: String,
}

impl Bid {
    pub fn offer(player_id: impl Into<PlayerId>, amount: u64, reason: impl Into<String>) -> Self {
        Self {
            player_id: player_id.into(),
            amount: Some(amount),
            reason: reason.into(),
        }
    }

    pub fn abstain(player_id: impl Into<PlayerId>, reason: impl Into<String>) -> Self {
        Self {
            player_id: player_id.into(),
            amount: None,
            reason: reason.into(),
        }
    }
}

impl From<String> for PlayerId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub player_id: PlayerId,
    pub units: u64,
    pub payment: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub day: u32,
    pub supply: u64,
    /// One entry per player alive at the start of the day, in roster order.
    pub bids: Vec<Bid>,
    /// In allocation order.
    pub winners: Vec<Allocation>,
    pub hp_after: BTreeMap<PlayerId, i64>,
    pub nwd_after: BTreeMap<PlayerId, u64>,
    pub balance_after: BTreeMap<PlayerId, u64>,
    pub eliminated: Vec<PlayerId>,
    pub min_successful_bid: Option<u64>,
}

impl RoundRecord {
    pub fn is_winner(&self, id: &PlayerId) -> bool {
        self.winners.iter().any(|w| &w.player_id == id)
    }

    pub fn bid_of(&self, id: &PlayerId) -> Option<&Bid> {
        self.bids.iter().find(|b| &b.player_id == id)
    }
}
