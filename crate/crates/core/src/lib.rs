//! Core of the W-Town water auction arena.
//!
//! - [`engine`]: the deterministic game (supply, sealed-bid auction, health).
//! - [`agents`]: scripted, chat-model and externally driven players.
//! - [`play`]: runs a game with one agent per seat.
//! - [`analysis`]: satisfaction rates, survival, minimum winning bids.
//! - [`harness`]: batches of repeated games with resumable persistence.

pub mod agents;
pub mod analysis;
pub mod chat;
pub mod engine;
pub mod harness;
pub mod play;
pub mod record;
pub mod rng;

pub use engine::{
    Allocation, AllocationRule, Bid, EngineError, Game, GameConfig, PersonaText, PlayerId,
    PlayerSpec, PlayerState, RoundRecord,
};
pub use record::{GameRecord, RunTag, SCHEMA_VERSION};
