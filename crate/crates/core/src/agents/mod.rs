//! Players. Every agent turns the same view of the game into one sealed
//! decision per day; implementations differ only in where the decision
//! comes from (a fixed strategy, a chat model, a human at the live service).

mod context;
mod llm;
mod parse;
mod persona;
pub mod prompts;
mod scripted;

pub use context::{assemble_context, AgentContext, TranscriptEntry};
pub use llm::{LlmAgent, LlmSettings};
pub use parse::{parse_decision, ParseFailure};
pub use persona::{attach_personas, bundled_personas, load_persona_dir, parse_persona};
pub use prompts::{
    render_bid_call, render_participants_info, render_results_announcement, render_status,
    render_system_prompt,
};
pub use scripted::{scripted_strategy, ScriptedAgent, StatusSummary, StrategyKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chat::CompletionError;
use crate::engine::{Bid, GameConfig, PlayerId, PlayerSpec, PlayerState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDecision {
    /// `None` abstains.
    pub bid: Option<u64>,
    pub reason: String,
    pub raw_response: String,
}

impl AgentDecision {
    pub fn into_bid(self, player: PlayerId) -> Bid {
        Bid {
            player_id: player,
            amount: self.bid,
            reason: self.reason,
        }
    }
}

/// Everything an agent may see when deciding on `day`. It holds nothing
/// from other players' decisions for that day.
#[derive(Debug, Clone, Copy)]
pub struct DecisionInput<'a> {
    pub player: &'a PlayerSpec,
    pub config: &'a GameConfig,
    pub day: u32,
    pub supply: u64,
    /// After today's salary.
    pub state: &'a PlayerState,
    /// Days `1..day` for this player.
    pub transcript: &'a [TranscriptEntry],
}

pub trait Agent: Send {
    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<AgentDecision, AgentError>;

    /// Short description recorded in run tags, e.g. `scripted:desperation`.
    fn label(&self) -> String;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("persona required for `{0}` but none configured")]
    MissingPersona(PlayerId),
    #[error("persona file: {0}")]
    Persona(String),
    #[error("template: {0}")]
    Template(String),
    #[error("transcript corrupted: {0}")]
    Transcript(String),
    #[error(transparent)]
    Completion(#[from] CompletionError),
}
