use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::context::assemble_context;
use super::parse::parse_decision;
use super::prompts::{render_bid_call, render_retry, render_system_prompt};
use super::{Agent, AgentDecision, AgentError, DecisionInput};
use crate::chat::{ChatCompleter, ChatMessage, ChatRequest, RequestTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmSettings {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Re-asks after an unparseable or over-budget reply.
    pub max_retries: u32,
    /// Label for request tags, e.g. `setting-1`.
    pub experiment: String,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            model: "gpt-4-32k".into(),
            temperature: 0.7,
            max_tokens: 1024,
            max_retries: 2,
            experiment: String::new(),
        }
    }
}

/// A player whose replies come from a chat model, given the rules, its own
/// earlier replies, every earlier announcement and participant broadcast,
/// and today's call for bids.
pub struct LlmAgent {
    completer: Arc<dyn ChatCompleter>,
    settings: LlmSettings,
    system_prompt: Option<String>,
}

impl LlmAgent {
    pub fn new(completer: Arc<dyn ChatCompleter>, settings: LlmSettings) -> Self {
        Self {
            completer,
            settings,
            system_prompt: None,
        }
    }

    fn request(&self, messages: Vec<ChatMessage>, input: &DecisionInput<'_>, attempt: u32) -> ChatRequest {
        ChatRequest {
            model: self.settings.model.clone(),
            messages,
            temperature: self.settings.temperature,
            max_tokens: self.settings.max_tokens,
            tag: RequestTag {
                experiment: self.settings.experiment.clone(),
                seed: input.config.seed,
                day: input.day,
                player: input.player.id.to_string(),
                attempt,
            },
        }
    }
}

impl Agent for LlmAgent {
    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<AgentDecision, AgentError> {
        let system = match &self.system_prompt {
            Some(s) => s.clone(),
            None => {
                let s = render_system_prompt(input.player, input.config, input.config.persona_enabled)?;
                self.system_prompt = Some(s.clone());
                s
            }
        };
        let call = render_bid_call(input.player, input.day, input.supply, input.state, input.config)?;
        let mut messages = assemble_context(&system, input.transcript, input.day, &call)?.messages();

        let balance = input.state.balance;
        let mut last_raw = String::new();
        for attempt in 0..=self.settings.max_retries {
            let request = self.request(messages.clone(), input, attempt);
            let raw = match self.completer.complete(&request) {
                Ok(text) => text,
                Err(e) if e.is_recoverable() => {
                    tracing::warn!(player = %input.player.id, day = input.day, error = %e, "abstaining after gateway failure");
                    return Ok(AgentDecision {
                        bid: None,
                        reason: "gateway failure".into(),
                        raw_response: String::new(),
                    });
                }
                Err(e) => return Err(AgentError::Completion(e)),
            };
            match parse_decision(&raw, balance) {
                Ok(decision) => return Ok(decision),
                Err(problem) => {
                    tracing::debug!(player = %input.player.id, day = input.day, %problem, "re-asking");
                    messages.push(ChatMessage::assistant(&raw));
                    messages.push(ChatMessage::user(render_retry(&problem.to_string(), balance)?));
                    last_raw = raw;
                }
            }
        }
        Ok(AgentDecision {
            bid: None,
            reason: "unparseable".into(),
            raw_response: last_raw,
        })
    }

    fn label(&self) -> String {
        format!("llm:{}", self.settings.model)
    }
}
