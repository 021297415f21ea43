//! JSON bodies of the HTTP API and the events pushed to clients.

use serde::{Deserialize, Serialize};
use waterbid_core::engine::{PlayerSpec, PlayerState};

/// `POST /sessions`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub supply_low: u64,
    pub supply_high: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub days: Option<u32>,
    #[serde(default)]
    pub persona: bool,
    /// Replaces the standard roster.
    #[serde(default)]
    pub roster: Option<Vec<PlayerSpec>>,
    /// One entry per roster player.
    pub seats: Vec<SeatPlan>,
    /// Length of each bidding window; defaults to the server setting.
    #[serde(default)]
    pub bid_window_secs: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeatPlan {
    pub player: String,
    /// `human`, `llm` or `scripted:<strategy>`.
    pub control: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub human_seats: Vec<String>,
}

/// `POST /sessions/{id}/join`. Without a player the first open human seat
/// is taken.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct JoinRequest {
    #[serde(default)]
    pub player: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Joined {
    pub player: String,
    pub token: String,
}

/// `POST /sessions/{id}/bids`. A null amount abstains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BidRequest {
    pub token: String,
    pub amount: Option<u64>,
    #[serde(default)]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BidAck {
    pub day: u32,
    pub amount: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Phase {
    Lobby,
    Bidding { day: u32 },
    Announcing { day: u32 },
    Finished,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicPlayer {
    pub player: String,
    pub requirement: u64,
    pub salary: u64,
    pub human: bool,
    pub joined: bool,
    pub state: PlayerState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayReport {
    pub day: u32,
    pub announcement: String,
    pub participants: String,
}

/// What a seat holder sees beyond the public view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrivateView {
    pub player: String,
    pub state: PlayerState,
    /// Today's call for bids, when bidding is open and the seat is alive.
    pub call: Option<String>,
    /// This seat's own sealed bid for today, if any.
    pub submitted: Option<BidAck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub phase: Phase,
    pub supply_low: u64,
    pub supply_high: u64,
    pub days: u32,
    /// Today's supply, announced before bidding.
    pub supply: Option<u64>,
    pub deadline_unix_ms: Option<u64>,
    pub remaining_ms: Option<u64>,
    pub players: Vec<PublicPlayer>,
    pub reports: Vec<DayReport>,
    pub you: Option<PrivateView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventBody {
    Phase { phase: Phase, supply: Option<u64>, deadline_unix_ms: Option<u64> },
    Results { report: DayReport },
    Finished { survivors: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}
