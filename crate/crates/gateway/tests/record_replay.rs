use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use waterbid_core::agents::{Agent, LlmAgent, LlmSettings};
use waterbid_core::chat::{ChatCompleter, ChatMessage, ChatRequest, CompletionError, RequestTag};
use waterbid_core::engine::{replay, GameConfig};
use waterbid_core::play::play_game;
use waterbid_gateway::{
    Backoff, ChatTransport, DiskCache, Gateway, HttpTransport, Mode, ProviderConfig, Sleeper,
    TransportError,
};

/// Answers with a bid that changes on every call, so a replay that
/// re-asked the provider could not reproduce the recording.
#[derive(Default)]
struct Drifting {
    calls: AtomicU64,
}

impl ChatTransport for Drifting {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        let day_hint = request.messages.len() as u64;
        // Salary is credited before every auction, so bids up to $70 are
        // always affordable.
        Ok(format!("Thinking about day {day_hint}. I will bid ${}.", 1 + (n * 37 + day_hint) % 70))
    }
}

/// Panics if called; stands in for "no network".
struct Offline;

impl ChatTransport for Offline {
    fn send(&self, _: &ChatRequest) -> Result<String, TransportError> {
        panic!("network used in replay mode");
    }
}

#[derive(Default)]
struct FakeClock {
    slept: Mutex<Vec<Duration>>,
}

impl Sleeper for FakeClock {
    fn sleep(&self, d: Duration) {
        self.slept.lock().unwrap().push(d);
    }
}

/// Fails with `err` for the first `failures` calls, then answers.
struct Flaky {
    failures: u64,
    err: TransportError,
    calls: AtomicU64,
}

impl ChatTransport for Flaky {
    fn send(&self, _: &ChatRequest) -> Result<String, TransportError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures {
            Err(self.err.clone())
        } else {
            Ok("I bid $10".into())
        }
    }
}

fn request(text: &str) -> ChatRequest {
    ChatRequest {
        model: "gpt-4-32k".into(),
        messages: vec![ChatMessage::system("rules"), ChatMessage::user(text)],
        temperature: 0.7,
        max_tokens: 64,
        tag: RequestTag {
            experiment: "t".into(),
            seed: 4,
            day: 2,
            player: "Bob".into(),
            attempt: 0,
        },
    }
}

fn llm_game(gateway: Arc<Gateway>, seed: u64) -> waterbid_core::GameRecord {
    let mut cfg = GameConfig::standard(10, 20, seed);
    cfg.days = 6;
    let mut agents: Vec<Box<dyn Agent>> = (0..5)
        .map(|_| Box::new(LlmAgent::new(gateway.clone(), LlmSettings::default())) as _)
        .collect();
    play_game(cfg, &mut agents, None).unwrap()
}

#[test]
fn replay_reproduces_recorded_game_without_network() {
    let dir = tempfile::tempdir().unwrap();
    let drifting = Arc::new(Drifting::default());
    let rec_gw = Arc::new(
        Gateway::new(Mode::Record, Some(DiskCache::open(dir.path()).unwrap()), Some(drifting.clone()))
            .unwrap(),
    );
    let recorded = llm_game(rec_gw.clone(), 21);
    assert!(rec_gw.network_calls() > 0);
    assert!(recorded.rounds.iter().any(|r| !r.winners.is_empty()));

    let replay_gw = Arc::new(
        Gateway::new(Mode::Replay, Some(DiskCache::open(dir.path()).unwrap()), Some(Arc::new(Offline)))
            .unwrap(),
    );
    let replayed = llm_game(replay_gw.clone(), 21);
    assert_eq!(replay_gw.network_calls(), 0);
    assert_eq!(replayed, recorded);
    assert_eq!(replay(&replayed).unwrap(), recorded);

    let no_transport = Arc::new(Gateway::new(Mode::Replay, Some(DiskCache::open(dir.path()).unwrap()), None).unwrap());
    assert_eq!(llm_game(no_transport, 21), recorded);
}

#[test]
fn record_mode_hits_cache_on_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let t = Arc::new(Drifting::default());
    let gw = Gateway::new(Mode::Record, Some(DiskCache::open(dir.path()).unwrap()), Some(t.clone()))
        .unwrap();
    let a = gw.complete(&request("bid?")).unwrap();
    let mut again = request("bid?");
    again.tag.player = "someone else".into();
    let b = gw.complete(&again).unwrap();
    assert_eq!(a, b);
    assert_eq!(t.calls.load(Ordering::SeqCst), 1);
}

#[test]
fn replay_miss_names_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(Mode::Replay, Some(DiskCache::open(dir.path()).unwrap()), None).unwrap();
    let err = gw.complete(&request("never recorded")).unwrap_err();
    assert_eq!(err, CompletionError::ReplayMiss(request("").tag));
    let msg = err.to_string();
    assert!(msg.contains("day=2") && msg.contains("player=Bob") && msg.contains("seed=4"), "{msg}");
}

#[test]
fn rate_limits_back_off_one_two_four() {
    let clock = Arc::new(FakeClock::default());
    let t = Arc::new(Flaky {
        failures: 3,
        err: TransportError::RateLimited("slow down".into()),
        calls: AtomicU64::new(0),
    });
    let gw = Gateway::new(Mode::Live, None, Some(t.clone()))
        .unwrap()
        .with_backoff(Backoff::default(), clock.clone());
    assert_eq!(gw.complete(&request("x")).unwrap(), "I bid $10");
    let secs: Vec<u64> = clock.slept.lock().unwrap().iter().map(Duration::as_secs).collect();
    assert_eq!(secs, [1, 2, 4]);
    assert_eq!(gw.network_calls(), 4);
}

#[test]
fn exhausted_retries_make_the_agent_abstain() {
    let clock = Arc::new(FakeClock::default());
    let t = Arc::new(Flaky {
        failures: u64::MAX,
        err: TransportError::Transient("503".into()),
        calls: AtomicU64::new(0),
    });
    let gw = Arc::new(
        Gateway::new(Mode::Live, None, Some(t.clone()))
            .unwrap()
            .with_backoff(Backoff::default(), clock.clone()),
    );
    let err = gw.complete(&request("x")).unwrap_err();
    assert!(matches!(err, CompletionError::Exhausted { attempts: 5, .. }), "{err}");
    let secs: Vec<u64> = clock.slept.lock().unwrap().iter().map(Duration::as_secs).collect();
    assert_eq!(secs, [1, 2, 4, 8]);

    let rec = llm_game(gw, 3);
    let day1 = &rec.rounds[0];
    assert!(day1.bids.iter().all(|b| b.amount.is_none() && b.reason == "gateway failure"));
}

#[test]
fn fatal_errors_are_not_retried() {
    let clock = Arc::new(FakeClock::default());
    let t = Arc::new(Flaky {
        failures: 1,
        err: TransportError::Fatal("401 unauthorized".into()),
        calls: AtomicU64::new(0),
    });
    let gw = Gateway::new(Mode::Live, None, Some(t.clone()))
        .unwrap()
        .with_backoff(Backoff::default(), clock.clone());
    assert!(matches!(
        gw.complete(&request("x")),
        Err(CompletionError::Exhausted { attempts: 1, .. })
    ));
    assert!(clock.slept.lock().unwrap().is_empty());
}

#[test]
fn modes_check_their_requirements() {
    assert!(Gateway::new(Mode::Record, None, Some(Arc::new(Offline))).is_err());
    assert!(Gateway::new(Mode::Live, None, None).is_err());
    assert!("bogus".parse::<Mode>().is_err());
    let gw = Gateway::new(Mode::Live, None, Some(Arc::new(Offline))).unwrap();
    let mut bad = request("x");
    bad.messages.remove(0);
    assert!(matches!(gw.complete(&bad), Err(CompletionError::InvalidRequest(_))));
}

struct Crowd {
    now: AtomicUsize,
    peak: AtomicUsize,
}

impl ChatTransport for Crowd {
    fn send(&self, _: &ChatRequest) -> Result<String, TransportError> {
        let n = self.now.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(n, Ordering::SeqCst);
        std::thread::sleep(Duration::from_millis(20));
        self.now.fetch_sub(1, Ordering::SeqCst);
        Ok("ok".into())
    }
}

#[test]
fn in_flight_requests_are_bounded() {
    let t = Arc::new(Crowd {
        now: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
    });
    let gw = Arc::new(Gateway::new(Mode::Live, None, Some(t.clone())).unwrap().with_in_flight_limit(2));
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let gw = gw.clone();
            std::thread::spawn(move || gw.complete(&request(&i.to_string())).unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(t.peak.load(Ordering::SeqCst), 2);
}

/// Serves one canned HTTP response per accepted connection and hands back
/// the request head and body it saw.
fn one_shot_server(status: &'static str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            if line == "\r\n" {
                break;
            }
            head.push_str(&line);
        }
        let mut buf = vec![0; len];
        reader.read_exact(&mut buf).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        head + &String::from_utf8(buf).unwrap()
    });
    (url, handle)
}

#[test]
fn http_transport_speaks_chat_completions() {
    let (url, server) = one_shot_server(
        "200 OK",
        r#"{"choices":[{"message":{"role":"assistant","content":"I bid $42"}}]}"#,
    );
    let t = HttpTransport::new(ProviderConfig {
        endpoint: url,
        api_key: "secret".into(),
        model: None,
        api_version: None,
    })
    .unwrap();
    assert_eq!(t.send(&request("bid?")).unwrap(), "I bid $42");
    let seen = server.join().unwrap();
    assert!(seen.starts_with("POST /v1/chat/completions"), "{seen}");
    assert!(seen.to_ascii_lowercase().contains("authorization: bearer secret"));
    assert!(seen.contains(r#""max_tokens":64"#) && seen.contains(r#""role":"system""#));
}

#[test]
fn http_429_is_rate_limited() {
    let (url, server) = one_shot_server("429 Too Many Requests", r#"{"error":"slow"}"#);
    let t = HttpTransport::new(ProviderConfig {
        endpoint: url,
        api_key: "k".into(),
        model: None,
        api_version: None,
    })
    .unwrap();
    assert!(matches!(t.send(&request("x")), Err(TransportError::RateLimited(_))));
    server.join().unwrap();
}
