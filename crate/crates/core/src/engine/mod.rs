//! The game state machine: supply draws, the sealed-bid auction, and daily
//! health and balance bookkeeping. Everything here is a pure function of
//! its inputs; randomness comes only from the seeded supply stream.

mod allocate;
mod game;
mod settle;
mod types;

pub use allocate::allocate;
pub use game::{replay, sample_supply, Game, OpenDay};
pub use settle::{credit_salaries, settle_round};
pub use types::{
    standard_roster, Allocation, AllocationRule, Bid, GameConfig, PersonaText, PlayerId,
    PlayerSpec, PlayerState, RoundRecord, SalaryTiming, STANDARD_ROSTER,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid game config: {0}")]
    InvalidConfig(String),
    #[error("player `{0}` submitted more than one bid")]
    DuplicateBid(PlayerId),
    #[error("bid from unknown player `{0}`")]
    UnknownPlayer(PlayerId),
    #[error("bid from eliminated player `{0}`")]
    EliminatedBidder(PlayerId),
    #[error("player `{0}` bid zero; abstain instead")]
    ZeroBid(PlayerId),
    #[error("player `{player}` bid {amount} but holds {balance}")]
    InsufficientBalance {
        player: PlayerId,
        amount: u64,
        balance: u64,
    },
    #[error("no day is open for bidding")]
    NoOpenDay,
    #[error("day {0} is already open")]
    DayAlreadyOpen(u32),
    #[error("game is finished")]
    GameFinished,
    #[error("engine invariant violated: {0}")]
    Invariant(String),
    #[error("replay diverged on day {day}: {detail}")]
    ReplayDivergence { day: u32, detail: String },
}
