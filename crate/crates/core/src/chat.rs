//! Chat-completion request shape shared by the LLM agent and the gateway.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Coordinates of a request inside an experiment, for error messages and
/// cache bookkeeping. Not part of the cache key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestTag {
    pub experiment: String,
    pub seed: u64,
    pub day: u32,
    pub player: String,
    pub attempt: u32,
}

impl fmt::Display for RequestTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "experiment={} seed={} day={} player={} attempt={}",
            self.experiment, self.seed, self.day, self.player, self.attempt
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default)]
    pub tag: RequestTag,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), CompletionError> {
        match self.messages.first() {
            Some(m) if m.role == Role::System => {}
            _ => {
                return Err(CompletionError::InvalidRequest(
                    "first message must have the system role".into(),
                ))
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(CompletionError::InvalidRequest(format!(
                "temperature {} must be finite and non-negative",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(CompletionError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompletionError {
    /// Replay mode found no cached response; the experiment cannot continue.
    #[error("replay cache has no response for {0}")]
    ReplayMiss(RequestTag),
    /// The provider kept failing after every retry.
    #[error("gateway failure after {attempts} attempts: {last_error}")]
    Exhausted { attempts: u32, last_error: String },
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("cache error: {0}")]
    Cache(String),
}

impl CompletionError {
    /// Errors the agent absorbs by abstaining rather than failing the game.
    pub fn is_recoverable(&self) -> bool {
        matches!(self, CompletionError::Exhausted { .. })
    }
}

/// Anything that can turn a chat request into response text.
pub trait ChatCompleter: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, CompletionError>;
}

impl<T: ChatCompleter + ?Sized> ChatCompleter for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, CompletionError> {
        (**self).complete(request)
    }
}
