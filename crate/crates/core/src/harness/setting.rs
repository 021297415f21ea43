use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::StrategyKind;
use crate::engine::GameConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abundance {
    Low,
    Medium,
    High,
}

impl Abundance {
    /// Inclusive daily supply bounds.
    pub fn bounds(self) -> (u64, u64) {
        match self {
            Abundance::Low => (10, 20),
            Abundance::Medium => (15, 25),
            Abundance::High => (20, 30),
        }
    }
}

/// Who plays one seat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeatKind {
    Llm,
    Scripted(StrategyKind),
}

impl fmt::Display for SeatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeatKind::Llm => f.write_str("llm"),
            SeatKind::Scripted(k) => write!(f, "scripted:{k}"),
        }
    }
}

impl FromStr for SeatKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(SeatKind::Llm),
            _ => {
                let strategy = s.strip_prefix("scripted:").unwrap_or(s);
                strategy.parse().map(SeatKind::Scripted)
            }
        }
    }
}

/// Who plays a game: every seat an LLM, every seat the same strategy, or
/// one entry per roster seat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AgentKind {
    Llm,
    Scripted(StrategyKind),
    Mixed(Vec<SeatKind>),
}

impl AgentKind {
    pub fn seats(&self, roster_len: usize) -> Result<Vec<SeatKind>, HarnessError> {
        match self {
            AgentKind::Llm => Ok(vec![SeatKind::Llm; roster_len]),
            AgentKind::Scripted(k) => Ok(vec![SeatKind::Scripted(*k); roster_len]),
            AgentKind::Mixed(seats) if seats.len() == roster_len => Ok(seats.clone()),
            AgentKind::Mixed(seats) => Err(HarnessError::Setting(format!(
                "mixed agents name {} seats for a roster of {roster_len}",
                seats.len()
            ))),
        }
    }

    pub fn uses_llm(&self) -> bool {
        match self {
            AgentKind::Llm => true,
            AgentKind::Scripted(_) => false,
            AgentKind::Mixed(seats) => seats.contains(&SeatKind::Llm),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::Llm => f.write_str("llm"),
            AgentKind::Scripted(k) => write!(f, "scripted:{k}"),
            AgentKind::Mixed(seats) => {
                let parts: Vec<String> = seats.iter().map(ToString::to_string).collect();
                write!(f, "mixed:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for AgentKind {
    type Err = String;

    /// `llm`, `scripted:<strategy>`, or `mixed:<seat>,<seat>,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "llm" {
            return Ok(AgentKind::Llm);
        }
        if let Some(rest) = s.strip_prefix("scripted:") {
            return rest.parse().map(AgentKind::Scripted);
        }
        if let Some(rest) = s.strip_prefix("mixed:") {
            return rest
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<_>, _>>()
                .map(AgentKind::Mixed);
        }
        Err(format!(
            "unknown agent kind `{s}` (expected llm, scripted:<strategy> or mixed:<seats>)"
        ))
    }
}

impl From<AgentKind> for String {
    fn from(k: AgentKind) -> Self {
        k.to_string()
    }
}

impl TryFrom<String> for AgentKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetting {
    pub setting_id: u32,
    pub abundance: Abundance,
    pub persona: bool,
    pub repetitions: u32,
    pub agents: AgentKind,
    pub base_seed: u64,
    pub days: u32,
}

impl ExperimentSetting {
    /// The six standard settings: 1-3 are low/medium/high abundance without
    /// personas, 4-6 the same with personas.
    pub fn standard(
        setting_id: u32,
        repetitions: u32,
        agents: AgentKind,
        base_seed: u64,
    ) -> Result<Self, HarnessError> {
        let abundance = match setting_id {
            1 | 4 => Abundance::Low,
            2 | 5 => Abundance::Medium,
            3 | 6 => Abundance::High,
            _ => {
                return Err(HarnessError::Setting(format!(
                    "setting id must be 1..=6, got {setting_id}"
                )))
            }
        };
        Ok(Self {
            setting_id,
            abundance,
            persona: setting_id >= 4,
            repetitions,
            agents,
            base_seed,
            days: 20,
        })
    }

    pub fn seed_for(&self, repetition: u32) -> u64 {
        self.base_seed.wrapping_add(repetition as u64)
    }

    /// Game configuration for one repetition, before personas are attached.
    pub fn config_for(&self, repetition: u32) -> GameConfig {
        let (lo, hi) = self.abundance.bounds();
        let mut cfg = GameConfig::standard(lo, hi, self.seed_for(repetition));
        cfg.days = self.days;
        cfg.persona_enabled = self.persona;
        cfg
    }
}
