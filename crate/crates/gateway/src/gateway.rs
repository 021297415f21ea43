use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use waterbid_core::chat::{ChatCompleter, ChatRequest, CompletionError};

use crate::backoff::{Backoff, Sleeper, ThreadSleeper};
use crate::cache::{cache_key, CacheEntry, DiskCache};
use crate::{ChatTransport, GatewayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Live,
    Record,
    Replay,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Live => "live",
            Mode::Record => "record",
            Mode::Replay => "replay",
        })
    }
}

impl FromStr for Mode {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            _ => Err(GatewayError::UnknownMode(s.to_string())),
        }
    }
}

/// Counting semaphore over provider calls.
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cv.notify_one();
    }
}

pub const DEFAULT_IN_FLIGHT: usize = 5;

pub struct Gateway {
    mode: Mode,
    cache: Option<DiskCache>,
    transport: Option<Arc<dyn ChatTransport>>,
    backoff: Backoff,
    sleeper: Arc<dyn Sleeper>,
    slots: Slots,
    network_calls: AtomicU64,
}

impl Gateway {
    /// Record and replay need a cache; live and record need a transport.
    pub fn new(
        mode: Mode,
        cache: Option<DiskCache>,
        transport: Option<Arc<dyn ChatTransport>>,
    ) -> Result<Self, GatewayError> {
        if mode != Mode::Live && cache.is_none() {
            return Err(GatewayError::NoCache(mode));
        }
        if mode != Mode::Replay && transport.is_none() {
            return Err(GatewayError::NoTransport(mode));
        }
        Ok(Self {
            mode,
            cache,
            transport,
            backoff: Backoff::default(),
            sleeper: Arc::new(ThreadSleeper),
            slots: Slots::new(DEFAULT_IN_FLIGHT),
            network_calls: AtomicU64::new(0),
        })
    }

    pub fn with_backoff(mut self, backoff: Backoff, sleeper: Arc<dyn Sleeper>) -> Self {
        self.backoff = backoff;
        self.sleeper = sleeper;
        self
    }

    pub fn with_in_flight_limit(mut self, n: usize) -> Self {
        self.slots = Slots::new(n);
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Provider calls made so far, retries included.
    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn call_provider(&self, request: &ChatRequest) -> Result<(String, u64), CompletionError> {
        let transport = self.transport.as_ref().expect("checked in Gateway::new");
        let _slot = self.slots.acquire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            let started = Instant::now();
            match transport.send(request) {
                Ok(text) => return Ok((text, started.elapsed().as_millis() as u64)),
                Err(e) if e.is_retryable() && attempt < self.backoff.max_attempts => {
                    let delay = self.backoff.delay_after(attempt);
                    tracing::warn!("{} attempt {attempt}: {e}; retrying in {delay:?}", request.tag);
                    self.sleeper.sleep(delay);
                }
                Err(e) => {
                    return Err(CompletionError::Exhausted {
                        attempts: attempt,
                        last_error: e.to_string(),
                    })
                }
            }
        }
    }

    fn cached(&self, key: &str) -> Result<Option<CacheEntry>, CompletionError> {
        let cache = self.cache.as_ref().expect("checked in Gateway::new");
        cache.get(key).map_err(CompletionError::Cache)
    }
}

impl ChatCompleter for Gateway {
    fn complete(&self, request: &ChatRequest) -> Result<String, CompletionError> {
        request.validate()?;
        match self.mode {
            Mode::Live => self.call_provider(request).map(|(text, _)| text),
            Mode::Replay => {
                let key = cache_key(request);
                match self.cached(&key)? {
                    Some(entry) => Ok(entry.response_text),
                    None => Err(CompletionError::ReplayMiss(request.tag.clone())),
                }
            }
            Mode::Record => {
                let key = cache_key(request);
                if let Some(entry) = self.cached(&key)? {
                    return Ok(entry.response_text);
                }
                let (text, latency_ms) = self.call_provider(request)?;
                let entry = CacheEntry {
                    key,
                    request: request.into(),
                    tag: request.tag.clone(),
                    response_text: text.clone(),
                    latency_ms,
                    timestamp: SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map_or(0, |d| d.as_secs()),
                };
                self.cache
                    .as_ref()
                    .expect("checked in Gateway::new")
                    .put(&entry)
                    .map_err(|e| CompletionError::Cache(e.to_string()))?;
                Ok(text)
            }
        }
    }
}
