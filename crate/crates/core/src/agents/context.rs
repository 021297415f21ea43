use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::chat::ChatMessage;

/// What one player saw and said on a completed day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub day: u32,
    /// The player's own reply for that day.
    pub response: String,
    /// The public results announcement.
    pub announcement: String,
    /// Broadcast health, budget and No-Water Days of every resident.
    pub participants: String,
}

/// The model input for one player's decision on day `n`: the rules, then one
/// (own reply, announcement, participant info) triple per earlier day, then
/// today's call for bids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentContext {
    pub system_message: String,
    pub history: Vec<TranscriptEntry>,
    pub current_call: String,
}

impl AgentContext {
    /// Own replies are assistant turns; everything from the environment is a
    /// user turn.
    pub fn messages(&self) -> Vec<ChatMessage> {
        let mut out = Vec::with_capacity(2 + 3 * self.history.len());
        out.push(ChatMessage::system(&self.system_message));
        for h in &self.history {
            out.push(ChatMessage::assistant(&h.response));
            out.push(ChatMessage::user(&h.announcement));
            out.push(ChatMessage::user(&h.participants));
        }
        out.push(ChatMessage::user(&self.current_call));
        out
    }
}

/// Builds the context for `round`. The transcript must hold exactly days
/// `1..round` in order; anything else means it was corrupted.
pub fn assemble_context(
    system_message: &str,
    transcript: &[TranscriptEntry],
    round: u32,
    current_call: &str,
) -> Result<AgentContext, AgentError> {
    if round == 0 {
        return Err(AgentError::Transcript("days are numbered from 1".into()));
    }
    if transcript.len() != (round - 1) as usize {
        return Err(AgentError::Transcript(format!(
            "day {round} needs {} earlier entries, transcript has {}",
            round - 1,
            transcript.len()
        )));
    }
    for (i, entry) in transcript.iter().enumerate() {
        if entry.day != i as u32 + 1 {
            return Err(AgentError::Transcript(format!(
                "entry {} is for day {}, expected day {}",
                i,
                entry.day,
                i + 1
            )));
        }
    }
    Ok(AgentContext {
        system_message: system_message.to_string(),
        history: transcript.to_vec(),
        current_call: current_call.to_string(),
    })
}
