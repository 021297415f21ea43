//! One task per session owns the game. Handlers talk to it over a channel,
//! so every mutation is serialized and sealed bids never leave the task
//! until the day settles.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::time::Instant;
use waterbid_core::agents::{
    render_bid_call, render_participants_info, render_results_announcement, Agent,
    DecisionInput,
};
use waterbid_core::engine::{Bid, Game, GameConfig, PlayerId, PlayerState};
use waterbid_core::play::Transcripts;
use waterbid_core::GameRecord;

use crate::model::{
    BidAck, DayReport, Event, EventBody, Joined, Phase, PrivateView, PublicPlayer, SessionView,
};
use crate::ApiError;

pub(crate) enum Command {
    Join {
        player: Option<String>,
        reply: oneshot::Sender<Result<Joined, ApiError>>,
    },
    Bid {
        token: String,
        amount: Option<u64>,
        reason: String,
        reply: oneshot::Sender<Result<BidAck, ApiError>>,
    },
    View {
        token: Option<String>,
        reply: oneshot::Sender<Result<SessionView, ApiError>>,
    },
    Record {
        reply: oneshot::Sender<Result<GameRecord, ApiError>>,
    },
}

/// A roster seat: a human (claimed by token on join) or an agent.
pub(crate) struct Seat {
    pub player: PlayerId,
    pub agent: Option<Box<dyn Agent>>,
    pub token: Option<String>,
    pub uses_llm: bool,
}

impl Seat {
    fn human(&self) -> bool {
        self.agent.is_none()
    }
}

/// Shared with handlers: the event log (for polling) and the live feed.
#[derive(Clone)]
pub struct SessionHandle {
    pub(crate) tx: mpsc::Sender<Command>,
    pub(crate) log: Arc<Mutex<Vec<Event>>>,
    pub(crate) feed: broadcast::Sender<Event>,
}

impl SessionHandle {
    pub(crate) async fn ask<T>(
        &self,
        make: impl FnOnce(oneshot::Sender<Result<T, ApiError>>) -> Command,
    ) -> Result<T, ApiError> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(make(reply)).await.map_err(|_| ApiError::Gone)?;
        rx.await.map_err(|_| ApiError::Gone)?
    }

    pub fn events_since(&self, since: u64) -> Vec<Event> {
        self.log
            .lock()
            .expect("event log lock")
            .iter()
            .filter(|e| e.seq >= since)
            .cloned()
            .collect()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.feed.subscribe()
    }
}

#[derive(Debug, Clone)]
pub struct Timing {
    pub bid_window: Duration,
    pub announce_pause: Duration,
}

/// Called once with the finished game's record.
pub(crate) type OnFinish = Box<dyn FnOnce(&GameRecord) + Send>;

pub(crate) struct Session {
    id: String,
    game: Game,
    seats: Vec<Seat>,
    timing: Timing,
    phase: Phase,
    deadline: Option<(Instant, u64)>,
    sealed: BTreeMap<PlayerId, Bid>,
    responses: BTreeMap<PlayerId, String>,
    transcripts: Transcripts,
    reports: Vec<DayReport>,
    log: Arc<Mutex<Vec<Event>>>,
    feed: broadcast::Sender<Event>,
    on_finish: Option<OnFinish>,
    record: Option<GameRecord>,
}

fn unix_ms_in(d: Duration) -> u64 {
    (SystemTime::now() + d)
        .duration_since(UNIX_EPOCH)
        .map_or(0, |t| t.as_millis() as u64)
}

impl Session {
    pub(crate) fn spawn(
        id: String,
        config: GameConfig,
        seats: Vec<Seat>,
        timing: Timing,
        on_finish: Option<OnFinish>,
    ) -> Result<SessionHandle, ApiError> {
        let game = Game::new(config).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let (tx, rx) = mpsc::channel(64);
        let (feed, _) = broadcast::channel(256);
        let log = Arc::new(Mutex::new(Vec::new()));
        let session = Session {
            id,
            game,
            seats,
            timing,
            phase: Phase::Lobby,
            deadline: None,
            sealed: BTreeMap::new(),
            responses: BTreeMap::new(),
            transcripts: Transcripts::default(),
            reports: Vec::new(),
            log: log.clone(),
            feed: feed.clone(),
            on_finish,
            record: None,
        };
        tokio::spawn(session.run(rx));
        Ok(SessionHandle { tx, log, feed })
    }

    fn emit(&self, body: EventBody) {
        let mut log = self.log.lock().expect("event log lock");
        let event = Event {
            seq: log.len() as u64,
            body,
        };
        log.push(event.clone());
        // No subscribers is fine; pollers read the log.
        let _ = self.feed.send(event);
    }

    fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
        let supply = match phase {
            Phase::Bidding { .. } => self.game.current_day().map(|d| d.supply),
            _ => None,
        };
        self.emit(EventBody::Phase {
            phase,
            supply,
            deadline_unix_ms: self.deadline.map(|(_, ms)| ms),
        });
    }

    async fn run(mut self, mut rx: mpsc::Receiver<Command>) {
        if self.seats.iter().all(|s| !s.human()) {
            self.open_day().await;
        }
        loop {
            let deadline = self.deadline.map(|(at, _)| at);
            let cmd = match deadline {
                Some(at) => tokio::select! {
                    cmd = rx.recv() => cmd,
                    _ = tokio::time::sleep_until(at) => {
                        self.on_deadline().await;
                        continue;
                    }
                },
                None => rx.recv().await,
            };
            let Some(cmd) = cmd else { break };
            match cmd {
                Command::Join { player, reply } => {
                    let r = self.join(player);
                    let start = r.is_ok()
                        && self.phase == Phase::Lobby
                        && self.seats.iter().all(|s| !s.human() || s.token.is_some());
                    let _ = reply.send(r);
                    if start {
                        self.open_day().await;
                    }
                }
                Command::Bid {
                    token,
                    amount,
                    reason,
                    reply,
                } => {
                    let _ = reply.send(self.bid(&token, amount, reason));
                }
                Command::View { token, reply } => {
                    let _ = reply.send(self.view(token.as_deref()));
                }
                Command::Record { reply } => {
                    let _ = reply.send(self.record.clone().ok_or_else(|| {
                        ApiError::WrongPhase("the record is available once the game has finished".into())
                    }));
                }
            }
        }
    }

    fn join(&mut self, player: Option<String>) -> Result<Joined, ApiError> {
        if self.phase != Phase::Lobby {
            return Err(ApiError::WrongPhase("the game has already started".into()));
        }
        let seat = match &player {
            Some(name) => {
                let seat = self
                    .seats
                    .iter_mut()
                    .find(|s| s.player.as_str() == name)
                    .ok_or_else(|| ApiError::NotFound(format!("no seat for `{name}`")))?;
                if !seat.human() {
                    return Err(ApiError::Forbidden(format!("`{name}` is not a human seat")));
                }
                if seat.token.is_some() {
                    return Err(ApiError::Conflict(format!("`{name}` is already taken")));
                }
                seat
            }
            None => self
                .seats
                .iter_mut()
                .find(|s| s.human() && s.token.is_none())
                .ok_or_else(|| ApiError::Conflict("no open human seat".into()))?,
        };
        let token = uuid::Uuid::new_v4().simple().to_string();
        seat.token = Some(token.clone());
        Ok(Joined {
            player: seat.player.to_string(),
            token,
        })
    }

    fn seat_by_token(&self, token: &str) -> Result<&Seat, ApiError> {
        self.seats
            .iter()
            .find(|s| s.token.as_deref() == Some(token))
            .ok_or_else(|| ApiError::Forbidden("unknown seat token".into()))
    }

    fn bid(&mut self, token: &str, amount: Option<u64>, reason: String) -> Result<BidAck, ApiError> {
        let player = self.seat_by_token(token)?.player.clone();
        let state = self.game.state(&player).expect("seat has state");
        if !state.alive {
            return Err(ApiError::Forbidden(format!("{player} has been eliminated")));
        }
        let Phase::Bidding { day } = self.phase else {
            return Err(ApiError::WrongPhase(format!(
                "bids are accepted only while bidding is open (phase is {:?})",
                self.phase
            )));
        };
        match amount {
            Some(0) => {
                return Err(ApiError::BadRequest(
                    "a bid must be at least $1; send a null amount to sit out".into(),
                ))
            }
            Some(a) if a > state.balance => {
                return Err(ApiError::BadRequest(format!(
                    "bid ${a} exceeds your balance of ${}",
                    state.balance
                )))
            }
            _ => {}
        }
        let bid = Bid {
            player_id: player.clone(),
            amount,
            reason,
        };
        self.sealed.insert(player, bid);
        Ok(BidAck { day, amount })
    }

    async fn open_day(&mut self) {
        let open = match self.game.open_day() {
            Ok(o) => o,
            Err(e) => {
                tracing::error!("session {}: {e}", self.id);
                return self.finish();
            }
        };
        self.sealed.clear();
        self.responses.clear();
        self.collect_agent_bids(open.day, open.supply).await;
        let humans_alive = self
            .seats
            .iter()
            .any(|s| s.human() && self.game.state(&s.player).is_some_and(|st| st.alive));
        if humans_alive {
            let window = self.timing.bid_window;
            self.deadline = Some((Instant::now() + window, unix_ms_in(window)));
            self.set_phase(Phase::Bidding { day: open.day });
        } else {
            self.deadline = None;
            self.set_phase(Phase::Bidding { day: open.day });
            self.settle().await;
        }
    }

    /// Agents decide as soon as the day opens; their bids stay sealed with
    /// the humans' until the deadline.
    async fn collect_agent_bids(&mut self, day: u32, supply: u64) {
        let config = self.game.config().clone();
        let states = self.game.states().clone();
        let mut seats: Vec<(usize, Box<dyn Agent>, Vec<_>)> = Vec::new();
        for (i, seat) in self.seats.iter_mut().enumerate() {
            if states.get(&seat.player).is_some_and(|s| s.alive) {
                if let Some(agent) = seat.agent.take() {
                    seats.push((i, agent, self.transcripts.get(&seat.player).to_vec()));
                }
            }
        }
        let work = move || {
            let mut out = Vec::new();
            for (i, mut agent, transcript) in seats {
                let spec = &config.roster[i];
                let input = DecisionInput {
                    player: spec,
                    config: &config,
                    day,
                    supply,
                    state: &states[&spec.id],
                    transcript: &transcript,
                };
                let decision = agent.decide(&input);
                out.push((i, agent, decision));
            }
            out
        };
        // LLM seats block on the network; scripted ones are instant.
        let decided = if self.seats.iter().any(|s| s.uses_llm) {
            tokio::task::spawn_blocking(work).await.expect("agent task panicked")
        } else {
            work()
        };
        for (i, agent, decision) in decided {
            let player = self.seats[i].player.clone();
            self.seats[i].agent = Some(agent);
            let bid = match decision {
                Ok(d) => {
                    self.responses.insert(player.clone(), d.raw_response.clone());
                    d.into_bid(player.clone())
                }
                Err(e) => {
                    tracing::warn!("session {}: agent for {player} failed: {e}", self.id);
                    Bid::abstain(player.clone(), format!("agent error: {e}"))
                }
            };
            self.sealed.insert(player, bid);
        }
    }

    async fn on_deadline(&mut self) {
        self.deadline = None;
        match self.phase {
            Phase::Bidding { .. } => self.settle().await,
            Phase::Announcing { .. } => self.open_day().await,
            _ => {}
        }
    }

    async fn settle(&mut self) {
        let living: Vec<PlayerId> = self.game.living().cloned().collect();
        let bids: Vec<Bid> = living
            .into_iter()
            .map(|p| {
                self.sealed
                    .remove(&p)
                    .unwrap_or_else(|| Bid::abstain(p, "missed the bidding deadline"))
            })
            .collect();
        let round = match self.game.step_day(bids) {
            Ok(r) => r.clone(),
            Err(e) => {
                tracing::error!("session {}: {e}", self.id);
                return self.finish();
            }
        };
        let config = self.game.config().clone();
        if let Err(e) = self.transcripts.push_round(&round, &config, &self.responses) {
            tracing::error!("session {}: {e}", self.id);
        }
        let report = DayReport {
            day: round.day,
            announcement: render_results_announcement(&round, &config).unwrap_or_default(),
            participants: render_participants_info(&round, &config).unwrap_or_default(),
        };
        self.reports.push(report.clone());
        self.set_phase(Phase::Announcing { day: round.day });
        self.emit(EventBody::Results { report });
        if self.game.is_finished() {
            return self.finish();
        }
        let humans_alive = self
            .seats
            .iter()
            .any(|s| s.human() && self.game.state(&s.player).is_some_and(|st| st.alive));
        if humans_alive && !self.timing.announce_pause.is_zero() {
            let pause = self.timing.announce_pause;
            self.deadline = Some((Instant::now() + pause, unix_ms_in(pause)));
        } else {
            Box::pin(self.open_day()).await;
        }
    }

    fn finish(&mut self) {
        self.deadline = None;
        let record = Game::clone(&self.game).into_record(None);
        let survivors = record.survivors().map(|p| p.to_string()).collect();
        if let Some(f) = self.on_finish.take() {
            f(&record);
        }
        self.record = Some(record);
        self.set_phase(Phase::Finished);
        self.emit(EventBody::Finished { survivors });
    }

    fn view(&self, token: Option<&str>) -> Result<SessionView, ApiError> {
        let you = match token {
            Some(t) => Some(self.private_view(self.seat_by_token(t)?)?),
            None => None,
        };
        let config = self.game.config();
        let supply = match self.phase {
            Phase::Bidding { .. } => self.game.current_day().map(|d| d.supply),
            _ => None,
        };
        Ok(SessionView {
            session_id: self.id.clone(),
            phase: self.phase,
            supply_low: config.supply_low,
            supply_high: config.supply_high,
            days: config.days,
            supply,
            deadline_unix_ms: self.deadline.map(|(_, ms)| ms),
            remaining_ms: self
                .deadline
                .map(|(at, _)| at.saturating_duration_since(Instant::now()).as_millis() as u64),
            players: self
                .seats
                .iter()
                .zip(&config.roster)
                .map(|(seat, spec)| PublicPlayer {
                    player: spec.id.to_string(),
                    requirement: spec.requirement,
                    salary: spec.salary,
                    human: seat.human(),
                    joined: !seat.human() || seat.token.is_some(),
                    state: *self.game.state(&spec.id).expect("roster player has state"),
                })
                .collect(),
            reports: self.reports.clone(),
            you,
        })
    }

    fn private_view(&self, seat: &Seat) -> Result<PrivateView, ApiError> {
        let config = self.game.config();
        let spec = config.player(&seat.player).expect("seat is on the roster");
        let state: PlayerState = *self.game.state(&seat.player).expect("seat has state");
        let (call, submitted) = match (self.phase, self.game.current_day()) {
            (Phase::Bidding { day }, Some(open)) if state.alive => (
                render_bid_call(spec, day, open.supply, &state, config).ok(),
                self.sealed.get(&seat.player).map(|b| BidAck {
                    day,
                    amount: b.amount,
                }),
            ),
            _ => (None, None),
        };
        Ok(PrivateView {
            player: seat.player.to_string(),
            state,
            call,
            submitted,
        })
    }
}
