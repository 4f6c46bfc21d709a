//! HTTP session service.
//!
//! Every state transition goes through one lock, so requests for a session
//! are serialized. Observers subscribe to `/events`, which first replays the
//! session's history (or what follows `Last-Event-ID`) and then streams new
//! transitions as server-sent events. Stimulus playback runs on a blocking
//! worker that owns the device for the length of the train.

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use tokio::sync::broadcast;
use vibrogrid_core::device::{play, CancelToken, Clock, Device};
use vibrogrid_core::encoding::{
    nearest_target, train_duration, EncodingParams, Point, PulseTrain, TargetIndex,
};
use vibrogrid_core::experiment::{
    export_csv, generate_plans, Condition, ExperimentError, Phase, PlanConfig, Session,
    SessionEvent, SessionPlan, TrialLog, TrialRecord,
};

const EVENT_BUFFER: usize = 256;

#[derive(Debug, Clone)]
struct Pushed {
    id: Option<u64>,
    name: String,
    data: String,
}

impl Pushed {
    fn session(event: &SessionEvent) -> Self {
        let value = serde_json::to_value(event).expect("events serialize");
        let name = value["kind"].as_str().unwrap_or("event").to_string();
        Self {
            id: Some(event.seq),
            name,
            data: value.to_string(),
        }
    }

    fn into_event(self) -> Event {
        let e = Event::default().event(self.name).data(self.data);
        match self.id {
            Some(id) => e.id(id.to_string()),
            None => e,
        }
    }
}

struct Entry {
    session: Session,
    tx: broadcast::Sender<Pushed>,
}

struct Shared {
    sessions: Mutex<HashMap<String, Entry>>,
    next_id: AtomicU64,
    device: Arc<Mutex<Box<dyn Device>>>,
    clock: Arc<dyn Clock>,
    playback_clock: Arc<dyn Clock>,
    params: EncodingParams,
    log_dir: Option<PathBuf>,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    /// `clock` stamps transitions and also schedules playback.
    pub fn new(device: Box<dyn Device>, clock: Arc<dyn Clock>) -> Self {
        Self(Arc::new(Shared {
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            device: Arc::new(Mutex::new(device)),
            playback_clock: clock.clone(),
            clock,
            params: EncodingParams::default(),
            log_dir: None,
        }))
    }

    fn map(self, f: impl FnOnce(&mut Shared)) -> Self {
        let mut shared =
            Arc::try_unwrap(self.0).unwrap_or_else(|_| panic!("configure state before sharing it"));
        f(&mut shared);
        Self(Arc::new(shared))
    }

    /// Appends each session's trials to `<dir>/<participant_id>.jsonl` and
    /// resumes from it when the participant returns.
    pub fn with_log_dir(self, dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        self.map(|s| s.log_dir = Some(dir))
    }

    pub fn with_params(self, params: EncodingParams) -> Self {
        self.map(|s| s.params = params)
    }

    /// Separate time source for playback scheduling.
    pub fn with_playback_clock(self, clock: Arc<dyn Clock>) -> Self {
        self.map(|s| s.playback_clock = clock)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/trial/stimulus", post(stimulus))
        .route("/sessions/{id}/trial/replay", post(replay))
        .route("/sessions/{id}/trial/interpretation", post(interpretation))
        .route("/sessions/{id}/trial/selection", post(selection))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/export.csv", get(export))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Experiment(ExperimentError),
}

impl From<ExperimentError> for ApiError {
    fn from(e: ExperimentError) -> Self {
        ApiError::Experiment(e)
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m),
            ApiError::Experiment(e) => {
                let (status, kind) = match &e {
                    ExperimentError::ProtocolOrder { .. } => {
                        (StatusCode::CONFLICT, "protocol_order")
                    }
                    ExperimentError::MissingInterpretation => {
                        (StatusCode::CONFLICT, "protocol_order")
                    }
                    ExperimentError::ReplayLimit => (StatusCode::CONFLICT, "replay_limit"),
                    ExperimentError::HoldActive { .. } => (StatusCode::CONFLICT, "hold_active"),
                    ExperimentError::SessionComplete => (StatusCode::CONFLICT, "session_complete"),
                    ExperimentError::Encoding(_) => {
                        (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input")
                    }
                    ExperimentError::Design(_) => (StatusCode::BAD_REQUEST, "design"),
                    ExperimentError::Integrity(_) => (StatusCode::CONFLICT, "integrity"),
                    ExperimentError::Persistence(_) => {
                        (StatusCode::INTERNAL_SERVER_ERROR, "persistence")
                    }
                };
                (status, kind, e.to_string())
            }
        };
        (status, Json(ErrorBody { error, message })).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridView {
    pub density: u32,
    pub frame_size_cm: f64,
    pub spacing_cm: f64,
    pub target_radius_cm: f64,
    pub max_index: i32,
}

/// Everything a console needs to redraw a session from scratch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub participant_id: String,
    pub metadata: String,
    pub phase: Phase,
    pub block_index: Option<usize>,
    pub trial_index: Option<usize>,
    pub condition: Option<Condition>,
    pub target: Option<TargetIndex>,
    pub grid: Option<GridView>,
    pub replay_used: bool,
    pub interpretation: Option<TargetIndex>,
    pub timer_start_ms: Option<f64>,
    pub hold_until_ms: Option<f64>,
    pub now_ms: f64,
    pub trials_completed: usize,
    pub trials_total: usize,
    pub last_event_seq: Option<u64>,
}

fn view(id: &str, s: &Session, now_ms: f64) -> SessionView {
    let position = s.position();
    let current = s.current();
    let grid = current.and_then(|(c, _)| c.grid().ok()).map(|g| GridView {
        density: g.density(),
        frame_size_cm: g.frame_size_cm(),
        spacing_cm: g.spacing_cm(),
        target_radius_cm: g.target_radius_cm(),
        max_index: g.max_index(),
    });
    SessionView {
        id: id.to_string(),
        participant_id: s.plan().participant_id.clone(),
        metadata: s.plan().metadata.clone(),
        phase: s.phase(),
        block_index: position.map(|p| p.0),
        trial_index: position.map(|p| p.1),
        condition: current.map(|c| c.0),
        target: current.map(|c| c.1),
        grid,
        replay_used: s.replay_used(),
        interpretation: s.interpretation(),
        timer_start_ms: s.timer_start_ms(),
        hold_until_ms: s.hold_until_ms(),
        now_ms,
        trials_completed: s.records().len(),
        trials_total: s.plan().trial_count(),
        last_event_seq: s.events().last().map(|e| e.seq),
    }
}

impl AppState {
    /// Runs one transition under the lock and publishes the events it added.
    fn transition<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, f64) -> Result<T, ExperimentError>,
    ) -> Result<(T, SessionView, broadcast::Sender<Pushed>), ApiError> {
        let mut sessions = self.0.sessions.lock().unwrap();
        let entry = sessions
            .get_mut(id)
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))?;
        let now = self.0.clock.now_ms();
        let mark = entry.session.events().len();
        let result = f(&mut entry.session, now);
        for e in &entry.session.events()[mark..] {
            // no subscribers is fine
            let _ = entry.tx.send(Pushed::session(e));
        }
        let value = result?;
        Ok((value, view(id, &entry.session, now), entry.tx.clone()))
    }

    fn spawn_playback(&self, train: PulseTrain, tx: broadcast::Sender<Pushed>) {
        let device = self.0.device.clone();
        let clock = self.0.playback_clock.clone();
        tokio::task::spawn_blocking(move || {
            let mut dev = device.lock().unwrap();
            let (name, data) = match play(&train, dev.as_mut(), clock.as_ref(), &CancelToken::new())
            {
                Ok(timeline) => (
                    "playback_complete",
                    serde_json::json!({ "frames": timeline.len() }),
                ),
                Err(e) => {
                    log::error!("playback failed: {e}");
                    (
                        "playback_error",
                        serde_json::json!({ "message": e.to_string() }),
                    )
                }
            };
            let _ = tx.send(Pushed {
                id: None,
                name: name.into(),
                data: data.to_string(),
            });
        });
    }
}

/// Body of `POST /sessions`. Either a full plan, or the cohort settings from
/// which the participant's plan is generated.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreateSession {
    pub plan: Option<SessionPlan>,
    pub participants: Option<usize>,
    pub seed: u64,
    pub participant_index: usize,
    pub pad_incomplete: bool,
    pub metadata: String,
    pub params: Option<EncodingParams>,
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let mut plan = match req.plan {
        Some(plan) => plan,
        None => {
            let config = PlanConfig {
                participants: req.participants.unwrap_or(12),
                seed: req.seed,
                pad_incomplete: req.pad_incomplete,
            };
            let mut plans = generate_plans(config)?;
            if req.participant_index >= plans.len() {
                return Err(ApiError::BadRequest(format!(
                    "participant_index {} outside a cohort of {}",
                    req.participant_index,
                    plans.len()
                )));
            }
            plans.swap_remove(req.participant_index)
        }
    };
    if !req.metadata.is_empty() {
        plan.metadata = req.metadata;
    }
    let shared = &state.0;
    let mut session = Session::new(plan, req.params.unwrap_or(shared.params))?;
    if let Some(dir) = &shared.log_dir {
        std::fs::create_dir_all(dir).map_err(ExperimentError::from)?;
        let path = dir.join(format!("{}.jsonl", session.plan().participant_id));
        let (log, loaded) = TrialLog::open(&path)?;
        if loaded.torn_bytes > 0 {
            log::warn!("{}: dropped a torn final record", path.display());
        }
        session = session.with_log(log, loaded.records)?;
    }
    let id = format!("s{}", shared.next_id.fetch_add(1, Ordering::Relaxed));
    let now = shared.clock.now_ms();
    let v = view(&id, &session, now);
    let (tx, _) = broadcast::channel(EVENT_BUFFER);
    shared
        .sessions
        .lock()
        .unwrap()
        .insert(id, Entry { session, tx });
    Ok((StatusCode::CREATED, Json(v)))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let sessions = state.0.sessions.lock().unwrap();
    let entry = sessions
        .get(&id)
        .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))?;
    Ok(Json(view(&id, &entry.session, state.0.clock.now_ms())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StimulusResponse {
    pub replay: bool,
    pub playback_end_ms: f64,
    pub events: usize,
    pub session: SessionView,
}

/// Starts the trial when idle, then sends the first stimulus.
async fn stimulus(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<StimulusResponse>, ApiError> {
    let (train, session, tx) = state.transition(&id, |s, now| {
        if s.phase() == Phase::Idle {
            s.start_trial(now)?;
        }
        s.send_stimulus(now)
    })?;
    let resp = StimulusResponse {
        replay: false,
        playback_end_ms: session.timer_start_ms.unwrap_or(session.now_ms),
        events: train.events.len(),
        session,
    };
    state.spawn_playback(train, tx);
    Ok(Json(resp))
}

async fn replay(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<StimulusResponse>, ApiError> {
    let (train, session, tx) = state.transition(&id, |s, now| s.replay_stimulus(now))?;
    let end = session.now_ms + train_duration(&train).unwrap_or(0.0);
    let resp = StimulusResponse {
        replay: true,
        playback_end_ms: end,
        events: train.events.len(),
        session,
    };
    state.spawn_playback(train, tx);
    Ok(Json(resp))
}

async fn interpretation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(t): Json<TargetIndex>,
) -> Result<Json<SessionView>, ApiError> {
    let ((), session, _) = state.transition(&id, |s, now| s.record_interpretation(now, t))?;
    Ok(Json(session))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionResponse {
    pub hit: bool,
    pub record: TrialRecord,
    pub session: SessionView,
}

/// Records the click and finalizes the trial.
async fn selection(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(p): Json<Point>,
) -> Result<Json<SelectionResponse>, ApiError> {
    if !(p.x_cm.is_finite() && p.y_cm.is_finite()) {
        return Err(ApiError::BadRequest("selection must be finite".into()));
    }
    let (record, session, _) = state.transition(&id, |s, now| {
        s.record_selection(now, p)?;
        s.finalize(now)
    })?;
    let nearest = nearest_target(&record.condition.grid().map_err(ExperimentError::from)?, p);
    let hit = nearest.hit && nearest.target == record.target;
    Ok(Json(SelectionResponse {
        hit,
        record,
        session,
    }))
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let after: Option<u64> = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse().ok());
    let (backlog, rx) = {
        let sessions = state.0.sessions.lock().unwrap();
        let entry = sessions
            .get(&id)
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))?;
        let backlog: Vec<Pushed> = entry
            .session
            .events()
            .iter()
            .filter(|e| after.is_none_or(|a| e.seq > a))
            .map(Pushed::session)
            .collect();
        (backlog, entry.tx.subscribe())
    };
    let live = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(p) => return Some((p, rx)),
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    log::warn!("event subscriber skipped {n} events")
                }
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let stream = stream::iter(backlog)
        .chain(live)
        .map(|p| Ok(p.into_event()));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn export(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let mut out = Vec::new();
    {
        let sessions = state.0.sessions.lock().unwrap();
        let entry = sessions
            .get(&id)
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))?;
        export_csv(entry.session.records(), &mut out)?;
    }
    let disposition = format!("attachment; filename=\"{id}.csv\"");
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        out,
    )
        .into_response())
}
