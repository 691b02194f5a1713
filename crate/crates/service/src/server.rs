//! HTTP front end: JSON request/response endpoints plus a server-sent-event
//! telemetry stream per session.

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cinequad_core::{Scene, ShotSpec};
use futures::{Stream, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast;
use tokio::task::JoinHandle;
use tokio_stream::wrappers::BroadcastStream;

use crate::config::ServiceConfig;
use crate::error::SessionError;
use crate::schemas;
use crate::session::Session;
use crate::telemetry::Telemetry;

struct SessionHandle {
    session: Arc<Mutex<Session>>,
    telemetry: broadcast::Sender<Telemetry>,
    ticker: JoinHandle<()>,
}

impl Drop for SessionHandle {
    fn drop(&mut self) {
        // the ticker owns the other sender; stopping it ends every stream
        self.ticker.abort();
    }
}

pub struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<SessionHandle>>>,
    counter: AtomicU64,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<AppState> {
        Arc::new(AppState {
            config,
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
        })
    }

    fn get(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or(ApiError(SessionError::NotFound))
    }
}

pub struct ApiError(pub SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl From<cinequad_core::Error> for ApiError {
    fn from(e: cinequad_core::Error) -> Self {
        ApiError(SessionError::Planner(e))
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        use cinequad_core::Error as E;
        match &self.0 {
            SessionError::Busy => StatusCode::CONFLICT,
            SessionError::NotFound | SessionError::NoTrajectory => StatusCode::NOT_FOUND,
            SessionError::Planner(E::InvalidInput(_) | E::DegenerateScene(_) | E::TooFewSamples { .. }) => {
                StatusCode::BAD_REQUEST
            }
            SessionError::Planner(E::Solver(_)) => StatusCode::INTERNAL_SERVER_ERROR,
            SessionError::Planner(_) => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.0.code(), "message": self.0.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/schemas", get(list_schemas))
        .route("/schemas/{name}", get(get_schema))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state).delete(close_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/shots", post(command_shot))
        .route("/sessions/{id}/preview", post(preview_shot))
        .route("/sessions/{id}/telemetry", get(telemetry))
        .route("/sessions/{id}/trajectory", get(trajectory))
        .with_state(state)
}

async fn list_schemas() -> Json<Vec<&'static str>> {
    Json(schemas::ALL.iter().map(|(name, _)| *name).collect())
}

async fn get_schema(Path(name): Path<String>) -> Response {
    match schemas::get(name.trim_end_matches(".json")) {
        Some(text) => ([(header::CONTENT_TYPE, "application/schema+json")], text).into_response(),
        None => (StatusCode::NOT_FOUND, Json(json!({ "error": "not_found", "message": "unknown schema" }))).into_response(),
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(what: &str, body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body)
        .map_err(|e| ApiError(SessionError::Planner(cinequad_core::Error::InvalidInput(format!("{what} schema: {e}")))))
}

async fn create_session(State(app): State<Arc<AppState>>, body: String) -> Result<Response, ApiError> {
    let scene = Scene::from_json(&body)?;
    let n = app.counter.fetch_add(1, Ordering::Relaxed);
    let id = format!("s{n:04}-{:08x}", rand_token(n));
    let mut cfg = app.config.session.clone();
    cfg.seed = cfg.seed.wrapping_add(n);
    let session = Session::new(id.clone(), scene, cfg)?;
    let snapshot = session.snapshot();
    let session = Arc::new(Mutex::new(session));
    let (tx, _) = broadcast::channel(app.config.telemetry_buffer);
    let ticker = spawn_ticker(session.clone(), tx.clone(), app.config.speedup);
    let handle = Arc::new(SessionHandle {
        session,
        telemetry: tx,
        ticker,
    });
    app.sessions.lock().expect("session table poisoned").insert(id.clone(), handle);
    log::info!("session {id} created");
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": snapshot.state, "current_shot": snapshot.current_shot })))
        .into_response())
}

fn rand_token(n: u64) -> u32 {
    use std::hash::{BuildHasher, Hasher};
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u64(n);
    h.finish() as u32
}

fn spawn_ticker(session: Arc<Mutex<Session>>, tx: broadcast::Sender<Telemetry>, speedup: f64) -> JoinHandle<()> {
    let dt = session.lock().expect("session poisoned").tick_dt();
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(Duration::from_secs_f64(dt / speedup));
        loop {
            interval.tick().await;
            let msg = session.lock().expect("session poisoned").tick();
            // no subscribers is fine
            let _ = tx.send(msg);
        }
    })
}

async fn close_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let removed = app.sessions.lock().expect("session table poisoned").remove(&id);
    match removed {
        Some(_) => {
            log::info!("session {id} closed");
            Ok(StatusCode::NO_CONTENT)
        }
        None => Err(SessionError::NotFound.into()),
    }
}

async fn get_state(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = app.get(&id)?;
    let snapshot = handle.session.lock().expect("session poisoned").snapshot();
    Ok(Json(snapshot).into_response())
}

async fn command_shot(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: String) -> Result<Response, ApiError> {
    let handle = app.get(&id)?;
    let spec: ShotSpec = parse_body("shot", &body)?;
    let job = handle.session.lock().expect("session poisoned").begin_command(spec)?;
    // the ticker keeps holding the last pose while this runs
    let outcome = tokio::task::spawn_blocking(move || job.run()).await.unwrap_or_else(|e| {
        Err(cinequad_core::Error::Solver(format!("planner task failed: {e}")))
    });
    let summary = handle.session.lock().expect("session poisoned").finish_command(outcome)?;
    Ok((StatusCode::ACCEPTED, Json(summary)).into_response())
}

async fn preview_shot(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: String) -> Result<Response, ApiError> {
    let handle = app.get(&id)?;
    let spec: ShotSpec = parse_body("shot", &body)?;
    let shot = handle.session.lock().expect("session poisoned").preview(&spec)?;
    Ok(Json(shot).into_response())
}

async fn telemetry(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let handle = app.get(&id)?;
    let rx = handle.telemetry.subscribe();
    drop(handle);
    let stream = BroadcastStream::new(rx).filter_map(|msg| async move {
        // a lagging reader skips messages but never sees them out of order
        let t = msg.ok()?;
        let event = Event::default().event("telemetry").id(t.seq.to_string()).json_data(&t).ok()?;
        Some(Ok(event))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Debug, Deserialize)]
struct TrajectoryQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn trajectory(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<TrajectoryQuery>,
) -> Result<Response, ApiError> {
    let handle = app.get(&id)?;
    let traj = handle
        .session
        .lock()
        .expect("session poisoned")
        .last_trajectory()
        .cloned()
        .ok_or(SessionError::NoTrajectory)?;
    match q.format.as_deref().unwrap_or("json") {
        "csv" => Ok(([(header::CONTENT_TYPE, "text/csv")], traj.to_csv()).into_response()),
        "json" => Ok(([(header::CONTENT_TYPE, "application/json")], traj.to_json()).into_response()),
        other => Err(cinequad_core::Error::InvalidInput(format!("unknown format `{other}` (expected csv or json)")).into()),
    }
}
