//! HTTP session API consumed by the explorer front end.

use std::collections::HashMap;
use std::hash::{BuildHasher, RandomState};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use clusterkr_core::Quiver;

use crate::session::{preset, Session, SessionError};

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

pub struct AppState {
    sessions: std::sync::Mutex<HashMap<String, Entry>>,
    next_id: AtomicU64,
    salt: RandomState,
    idle: Duration,
}

impl AppState {
    pub fn new(idle: Duration) -> Arc<AppState> {
        Arc::new(AppState { sessions: std::sync::Mutex::new(HashMap::new()), next_id: AtomicU64::new(1), salt: RandomState::new(), idle })
    }

    fn insert(&self, s: Session) -> String {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n}-{:08x}", self.salt.hash_one(n) as u32);
        self.sessions.lock().unwrap().insert(id.clone(), Entry { session: Arc::new(Mutex::new(s)), last_used: Instant::now() });
        id
    }

    fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        let now = Instant::now();
        self.purge(now);
        let mut map = self.sessions.lock().unwrap();
        let e = map.get_mut(id)?;
        e.last_used = now;
        Some(e.session.clone())
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn purge(&self, now: Instant) -> usize {
        let mut map = self.sessions.lock().unwrap();
        let before = map.len();
        map.retain(|_, e| now.duration_since(e.last_used) <= self.idle);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn reject(status: StatusCode, e: SessionError) -> Response {
    (status, Json(e.to_json())).into_response()
}

fn missing(id: &str) -> Response {
    reject(StatusCode::NOT_FOUND, SessionError { kind: "not_found", message: format!("no session {id}"), hint: Some("sessions expire when idle; start a new one".into()) })
}

fn reply(id: &str, s: &Session) -> Response {
    match s.view(id) {
        Ok(v) => Json(v).into_response(),
        Err(e) => reject(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn create(State(st): State<Arc<AppState>>, Json(body): Json<Value>) -> Response {
    let q = match body.get("preset").and_then(Value::as_str) {
        Some(name) => preset(name),
        None => Quiver::from_json(body.get("quiver").unwrap_or(&body)).map_err(SessionError::from),
    };
    match q {
        Ok(q) => {
            let s = Session::new(q);
            let id = st.insert(s.clone());
            log::info!("session {id} started with {} vertices", s.current().n());
            reply(&id, &s)
        }
        Err(e) => reject(StatusCode::BAD_REQUEST, e),
    }
}

async fn show(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(s) = st.get(&id) else { return missing(&id) };
    let s = s.lock().await;
    reply(&id, &s)
}

async fn mutate(State(st): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<Value>) -> Response {
    let Some(s) = st.get(&id) else { return missing(&id) };
    let Some(vertex) = body.get("vertex").and_then(Value::as_str) else {
        return reject(StatusCode::BAD_REQUEST, SessionError { kind: "invalid_input", message: "body needs a `vertex` string".into(), hint: Some(r#"{"vertex":"v1.2"}"#.into()) });
    };
    let mut s = s.lock().await;
    match s.mutate(vertex) {
        Ok(()) => reply(&id, &s),
        Err(e) => reject(StatusCode::BAD_REQUEST, e),
    }
}

async fn undo(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(s) = st.get(&id) else { return missing(&id) };
    let mut s = s.lock().await;
    match s.undo() {
        Ok(()) => reply(&id, &s),
        Err(e) => reject(StatusCode::BAD_REQUEST, e),
    }
}

async fn report(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(s) = st.get(&id) else { return missing(&id) };
    let s = s.lock().await;
    match s.report() {
        Ok(r) => Json(r).into_response(),
        Err(e) => reject(StatusCode::BAD_REQUEST, e),
    }
}

async fn green(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(s) = st.get(&id) else { return missing(&id) };
    let s = s.lock().await;
    match s.green() {
        Ok(g) => Json(json!({"green": g.iter().map(|v| v.to_string()).collect::<Vec<_>>()})).into_response(),
        Err(e) => reject(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn index() -> Html<&'static str> {
    Html(INDEX)
}

const INDEX: &str = r#"<!doctype html>
<html><head><meta charset="utf-8"><title>clusterkr</title></head>
<body>
<h1>clusterkr session server</h1>
<p>The explorer bundle is not installed. The JSON API is live:</p>
<ul>
<li>POST /api/session with a quiver or {"preset": "A5-alternating"}</li>
<li>POST /api/session/{id}/mutate with {"vertex": "2"}</li>
<li>POST /api/session/{id}/undo</li>
<li>GET /api/session/{id}, /report, /green</li>
</ul>
</body></html>
"#;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/session", post(create))
        .route("/api/session/{id}", get(show))
        .route("/api/session/{id}/mutate", post(mutate))
        .route("/api/session/{id}/undo", post(undo))
        .route("/api/session/{id}/report", get(report))
        .route("/api/session/{id}/green", get(green))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(host: &str, port: u16, idle: Duration) -> std::io::Result<()> {
    let state = AppState::new(idle);
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(30).min(idle.max(Duration::from_secs(1))));
        loop {
            tick.tick().await;
            let n = sweeper.purge(Instant::now());
            if n > 0 {
                log::debug!("expired {n} idle sessions");
            }
        }
    });
    axum::serve(listener, router(state)).await
}
