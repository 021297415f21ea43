//! Chat-completion gateway for LLM players.
//!
//! A [`Gateway`] answers [`ChatRequest`]s in one of three modes: `live`
//! calls the provider every time, `record` serves from the disk cache and
//! fills it on a miss, `replay` serves from the cache and never touches the
//! network. Provider calls go through a [`ChatTransport`] with exponential
//! backoff and a bounded number of requests in flight.
//!
//! [`ChatRequest`]: waterbid_core::chat::ChatRequest

mod backoff;
mod cache;
mod gateway;
mod http;

pub use backoff::{Backoff, Sleeper, ThreadSleeper};
pub use cache::{cache_key, CacheEntry, CachedRequest, DiskCache};
pub use gateway::{Gateway, Mode};
pub use http::{HttpTransport, ProviderConfig, ENV_API_KEY, ENV_API_VERSION, ENV_ENDPOINT, ENV_MODEL};

use thiserror::Error;
use waterbid_core::chat::ChatRequest;

/// How one provider call failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    /// HTTP 429; retried with backoff.
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// Network errors and 5xx responses; retried with backoff.
    #[error("transient failure: {0}")]
    Transient(String),
    /// Anything retrying cannot fix, such as bad credentials.
    #[error("{0}")]
    Fatal(String),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        !matches!(self, TransportError::Fatal(_))
    }
}

/// One provider endpoint.
pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("{0} mode needs a cache directory")]
    NoCache(Mode),
    #[error("{0} mode needs a provider; set {ENV_ENDPOINT} and {ENV_API_KEY}")]
    NoTransport(Mode),
    #[error("unknown gateway mode `{0}` (expected live, record or replay)")]
    UnknownMode(String),
    #[error("missing environment variable {0}")]
    MissingEnv(&'static str),
    #[error("http client: {0}")]
    Client(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
