//! Live sessions over HTTP.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/sessions` | create a session from a seat plan |
//! | POST | `/sessions/{id}/join` | claim a human seat, returns its token |
//! | GET | `/sessions/{id}/state?token=` | public view, plus the seat's own view with a token |
//! | POST | `/sessions/{id}/bids` | submit or replace today's sealed bid |
//! | GET | `/sessions/{id}/events?since=` | event log, for polling clients |
//! | GET | `/sessions/{id}/ws` | the same events pushed over a WebSocket; also takes bids |
//! | GET | `/sessions/{id}/record` | the finished game's record |

pub mod model;
mod session;

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use thiserror::Error;
use waterbid_core::agents::{attach_personas, bundled_personas, LlmAgent, LlmSettings, ScriptedAgent};
use waterbid_core::chat::ChatCompleter;
use waterbid_core::engine::GameConfig;
use waterbid_core::harness::SeatKind;
use waterbid_core::record::write_jsonl;
use waterbid_core::GameRecord;

pub use model::*;
pub use session::{SessionHandle, Timing};
use session::{Command, Seat, Session};

pub const DEFAULT_BID_WINDOW: Duration = Duration::from_secs(120);
pub const DEFAULT_ANNOUNCE_PAUSE: Duration = Duration::from_secs(5);

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    WrongPhase(String),
    #[error("session has shut down")]
    Gone,
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Forbidden(_) => StatusCode::FORBIDDEN,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) | ApiError::WrongPhase(_) => StatusCode::CONFLICT,
            ApiError::Gone => StatusCode::GONE,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

/// Server-wide settings and the session table.
#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, SessionHandle>>>,
    completer: Option<Arc<dyn ChatCompleter>>,
    llm: LlmSettings,
    timing: Timing,
    records: Option<Arc<Mutex<PathBuf>>>,
}

impl Default for AppState {
    fn default() -> Self {
        Self {
            sessions: Arc::default(),
            completer: None,
            llm: LlmSettings::default(),
            timing: Timing {
                bid_window: DEFAULT_BID_WINDOW,
                announce_pause: DEFAULT_ANNOUNCE_PAUSE,
            },
            records: None,
        }
    }
}

impl AppState {
    pub fn with_llm(mut self, completer: Arc<dyn ChatCompleter>, settings: LlmSettings) -> Self {
        self.completer = Some(completer);
        self.llm = settings;
        self
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = timing;
        self
    }

    /// Appends every finished session's record to this JSON Lines file.
    pub fn with_records_file(mut self, path: PathBuf) -> Self {
        self.records = Some(Arc::new(Mutex::new(path)));
        self
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session `{id}`")))
    }

    fn build_seats(&self, req: &CreateSession, config: &GameConfig) -> Result<Vec<Seat>, ApiError> {
        let mut plan: HashMap<&str, &str> = HashMap::new();
        for s in &req.seats {
            if plan.insert(s.player.as_str(), s.control.as_str()).is_some() {
                return Err(ApiError::BadRequest(format!("seat `{}` assigned twice", s.player)));
            }
            if config.player(&s.player.as_str().into()).is_none() {
                return Err(ApiError::BadRequest(format!("`{}` is not on the roster", s.player)));
            }
        }
        config
            .roster
            .iter()
            .map(|spec| {
                let control = plan.get(spec.id.as_str()).ok_or_else(|| {
                    ApiError::BadRequest(format!("no control assigned for `{}`", spec.id))
                })?;
                let (agent, uses_llm): (Option<Box<dyn waterbid_core::agents::Agent>>, bool) =
                    match *control {
                        "human" => (None, false),
                        other => match other.parse::<SeatKind>().map_err(ApiError::BadRequest)? {
                            SeatKind::Scripted(kind) => (Some(Box::new(ScriptedAgent::new(kind))), false),
                            SeatKind::Llm => {
                                let completer = self.completer.clone().ok_or_else(|| {
                                    ApiError::BadRequest("this server has no LLM gateway configured".into())
                                })?;
                                (Some(Box::new(LlmAgent::new(completer, self.llm.clone()))), true)
                            }
                        },
                    };
                Ok(Seat {
                    player: spec.id.clone(),
                    agent,
                    token: None,
                    uses_llm,
                })
            })
            .collect()
    }

    /// Creates and starts a session. One with no human seats runs to the
    /// end on its own.
    pub fn create(&self, req: CreateSession) -> Result<Created, ApiError> {
        let mut config = GameConfig::standard(req.supply_low, req.supply_high, req.seed);
        if let Some(days) = req.days {
            config.days = days;
        }
        if let Some(roster) = &req.roster {
            config.roster = roster.clone();
        }
        config.persona_enabled = req.persona;
        if req.persona {
            attach_personas(&mut config.roster, &bundled_personas())
                .map_err(|e| ApiError::BadRequest(e.to_string()))?;
        }
        config.validate().map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let seats = self.build_seats(&req, &config)?;
        let human_seats = seats
            .iter()
            .filter(|s| s.agent.is_none())
            .map(|s| s.player.to_string())
            .collect();
        let mut timing = self.timing.clone();
        if let Some(secs) = req.bid_window_secs {
            if secs == 0 {
                return Err(ApiError::BadRequest("bid_window_secs must be positive".into()));
            }
            timing.bid_window = Duration::from_secs(secs);
        }
        let on_finish = self.records.clone().map(|path| {
            Box::new(move |rec: &GameRecord| {
                let path = path.lock().expect("records path lock");
                let written = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&*path)
                    .and_then(|f| write_jsonl(f, [rec]));
                if let Err(e) = written {
                    tracing::error!("could not persist record to {}: {e}", path.display());
                }
            }) as Box<dyn FnOnce(&GameRecord) + Send>
        });
        let id = uuid::Uuid::new_v4().simple().to_string();
        let handle = Session::spawn(id.clone(), config, seats, timing, on_finish)?;
        self.sessions
            .write()
            .expect("session table lock")
            .insert(id.clone(), handle);
        Ok(Created {
            session_id: id,
            human_seats,
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/join", post(join))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/bids", post(submit_bid))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/ws", get(websocket))
        .route("/sessions/{id}/record", get(record))
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn create_session(
    State(app): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    app.create(req).map(|c| (StatusCode::CREATED, Json(c)))
}

async fn join(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Option<Json<JoinRequest>>,
) -> Result<Json<Joined>, ApiError> {
    let player = body.and_then(|Json(b)| b.player);
    let s = app.session(&id)?;
    s.ask(|reply| Command::Join { player, reply }).await.map(Json)
}

#[derive(Deserialize)]
struct TokenQuery {
    token: Option<String>,
}

async fn session_state(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TokenQuery>,
) -> Result<Json<SessionView>, ApiError> {
    let s = app.session(&id)?;
    s.ask(|reply| Command::View { token: q.token, reply }).await.map(Json)
}

async fn place_bid(s: &SessionHandle, req: BidRequest) -> Result<BidAck, ApiError> {
    s.ask(|reply| Command::Bid {
        token: req.token,
        amount: req.amount,
        reason: req.reason.unwrap_or_default(),
        reply,
    })
    .await
}

async fn submit_bid(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<BidRequest>,
) -> Result<Json<BidAck>, ApiError> {
    let s = app.session(&id)?;
    place_bid(&s, req).await.map(Json)
}

#[derive(Deserialize)]
struct SinceQuery {
    #[serde(default)]
    since: u64,
}

async fn events(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SinceQuery>,
) -> Result<Json<Vec<Event>>, ApiError> {
    Ok(Json(app.session(&id)?.events_since(q.since)))
}

async fn record(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<GameRecord>, ApiError> {
    let s = app.session(&id)?;
    s.ask(|reply| Command::Record { reply }).await.map(Json)
}

async fn websocket(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let s = app.session(&id)?;
    Ok(ws.on_upgrade(move |socket| push_events(socket, s)))
}

/// Replays the log, then forwards new events. Text frames from the client
/// are read as [`BidRequest`]s and answered with an ack or an error.
async fn push_events(socket: WebSocket, s: SessionHandle) {
    let (mut sink, mut stream) = socket.split();
    // Subscribe before reading the log so nothing falls in between.
    let mut feed = s.subscribe();
    let backlog = s.events_since(0);
    let mut next = backlog.len() as u64;
    for e in backlog {
        let text = serde_json::to_string(&e).expect("event serializes");
        if sink.send(Message::Text(text.into())).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            event = feed.recv() => match event {
                Ok(e) if e.seq < next => {}
                Ok(e) => {
                    next = e.seq + 1;
                    let text = serde_json::to_string(&e).expect("event serializes");
                    if sink.send(Message::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(tokio::sync::broadcast::error::RecvError::Lagged(_)) => {
                    for e in s.events_since(next) {
                        next = e.seq + 1;
                        let text = serde_json::to_string(&e).expect("event serializes");
                        if sink.send(Message::Text(text.into())).await.is_err() {
                            return;
                        }
                    }
                }
                Err(_) => return,
            },
            msg = stream.next() => match msg {
                Some(Ok(Message::Text(text))) => {
                    let reply = match serde_json::from_str::<BidRequest>(&text) {
                        Ok(req) => match place_bid(&s, req).await {
                            Ok(ack) => serde_json::json!({ "ack": ack }),
                            Err(e) => serde_json::json!({ "error": e.to_string() }),
                        },
                        Err(e) => serde_json::json!({ "error": format!("expected a bid: {e}") }),
                    };
                    if sink.send(Message::Text(reply.to_string().into())).await.is_err() {
                        return;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
