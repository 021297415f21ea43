//! Runs a whole game with one agent per roster seat.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{
    render_participants_info, render_results_announcement, Agent, AgentDecision, AgentError,
    DecisionInput, TranscriptEntry,
};
use crate::engine::{EngineError, Game, GameConfig, PlayerId, RoundRecord};
use crate::record::{GameRecord, RunTag};

#[derive(Debug, Error)]
pub enum PlayError {
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("agent for `{player}` on day {day}: {source}")]
    Agent {
        player: PlayerId,
        day: u32,
        #[source]
        source: AgentError,
    },
    #[error("{agents} agents supplied for a roster of {roster}")]
    SeatMismatch { agents: usize, roster: usize },
}

/// Per-player transcripts built as the game proceeds.
#[derive(Debug, Default, Clone)]
pub struct Transcripts {
    by_player: BTreeMap<PlayerId, Vec<TranscriptEntry>>,
}

impl Transcripts {
    pub fn get(&self, id: &PlayerId) -> &[TranscriptEntry] {
        self.by_player.get(id).map_or(&[], Vec::as_slice)
    }

    /// Appends the finished day for every player who bid on it.
    pub fn push_round(
        &mut self,
        round: &RoundRecord,
        config: &GameConfig,
        responses: &BTreeMap<PlayerId, String>,
    ) -> Result<(), AgentError> {
        let announcement = render_results_announcement(round, config)?;
        let participants = render_participants_info(round, config)?;
        for bid in &round.bids {
            self.by_player
                .entry(bid.player_id.clone())
                .or_default()
                .push(TranscriptEntry {
                    day: round.day,
                    response: responses.get(&bid.player_id).cloned().unwrap_or_default(),
                    announcement: announcement.clone(),
                    participants: participants.clone(),
                });
        }
        Ok(())
    }
}

/// Collects one decision from each living seat. Decisions are computed in
/// parallel; each agent sees only its own transcript.
pub fn collect_decisions(
    game: &Game,
    agents: &mut [Box<dyn Agent>],
    transcripts: &Transcripts,
) -> Result<Vec<(PlayerId, AgentDecision)>, PlayError> {
    let open = game.current_day().ok_or(EngineError::NoOpenDay)?;
    let config = game.config();
    agents
        .par_iter_mut()
        .zip(config.roster.par_iter())
        .filter(|(_, spec)| game.state(&spec.id).is_some_and(|s| s.alive))
        .map(|(agent, spec)| {
            let input = DecisionInput {
                player: spec,
                config,
                day: open.day,
                supply: open.supply,
                state: game.state(&spec.id).expect("roster player has state"),
                transcript: transcripts.get(&spec.id),
            };
            agent
                .decide(&input)
                .map(|d| (spec.id.clone(), d))
                .map_err(|source| PlayError::Agent {
                    player: spec.id.clone(),
                    day: open.day,
                    source,
                })
        })
        .collect()
}

/// Plays a game to completion. `agents[i]` controls `config.roster[i]`.
pub fn play_game(
    config: GameConfig,
    agents: &mut [Box<dyn Agent>],
    tag: Option<RunTag>,
) -> Result<GameRecord, PlayError> {
    if agents.len() != config.roster.len() {
        return Err(PlayError::SeatMismatch {
            agents: agents.len(),
            roster: config.roster.len(),
        });
    }
    let mut game = Game::new(config)?;
    let mut transcripts = Transcripts::default();
    while !game.is_finished() {
        game.open_day()?;
        let decisions = collect_decisions(&game, agents, &transcripts)?;
        let mut responses = BTreeMap::new();
        let bids = decisions
            .into_iter()
            .map(|(id, d)| {
                responses.insert(id.clone(), d.raw_response.clone());
                d.into_bid(id)
            })
            .collect();
        let round = game.step_day(bids)?.clone();
        let day = round.day;
        transcripts
            .push_round(&round, game.config(), &responses)
            .map_err(|source| PlayError::Agent {
                player: PlayerId::new("*"),
                day,
                source,
            })?;
    }
    Ok(game.into_record(tag))
}
