//! JSON-over-HTTP API. Request bodies use the same schemas as the CLI config
//! files, and successful payloads are byte-identical to the CLI's JSON output.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use sam_prior::{config, Engine};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::commands::{self, AnalyzeOverrides, RunOverrides};
use crate::jobs::{JobKind, JobStore, ResultError};

/// Largest weight curve computed inline; bigger requests become jobs.
pub const SYNC_CURVE_MAX_GRID: usize = 201;
pub const SYNC_CURVE_MAX_REPLICATES: u64 = 2000;

#[derive(Clone)]
pub struct AppState {
    pub jobs: Arc<JobStore>,
    pub engine: Engine,
}

impl AppState {
    pub fn new(engine: Engine, results_dir: Option<PathBuf>) -> anyhow::Result<Self> {
        if let Some(dir) = &results_dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self {
            jobs: Arc::new(JobStore::new(results_dir)),
            engine,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub field_path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            field_path: None,
        }
    }
}

impl From<sam_prior::Error> for ApiError {
    fn from(err: sam_prior::Error) -> Self {
        use sam_prior::Error as E;
        let (status, code) = match &err {
            E::Config { .. } => (StatusCode::BAD_REQUEST, "schema"),
            E::UnsupportedMethod(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unsupported_method"),
            E::LineageMismatch(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            _ => (StatusCode::BAD_REQUEST, "invalid"),
        };
        let field_path = err.field_path().map(str::to_string);
        let message = match &err {
            E::Config { message, .. } => message.clone(),
            other => other.to_string(),
        };
        Self {
            status,
            code,
            message,
            field_path,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

fn json_body(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

fn parse(body: &Bytes) -> Result<serde_json::Value, ApiError> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "schema", "body is not UTF-8"))?;
    Ok(config::parse_value(text)?)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> sam_prior::Result<T> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn health() -> &'static str {
    "ok"
}

async fn analyze(body: Bytes) -> Result<Response, ApiError> {
    let config = commands::analyze_config(parse(&body)?, AnalyzeOverrides::default())?;
    let report = blocking(move || commands::analyze_json(&config)).await?;
    Ok(json_body(StatusCode::OK, report))
}

async fn weight_curve(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let config = commands::curve_config(parse(&body)?, RunOverrides::default())?;
    let grid = config.grid()?;
    if grid.len() <= SYNC_CURVE_MAX_GRID && config.replicates <= SYNC_CURVE_MAX_REPLICATES {
        let engine = state.engine.clone();
        let rendered = blocking(move || commands::curve(&engine, &config)).await?;
        return Ok(json_body(StatusCode::OK, rendered.json));
    }
    let total = config.work()?;
    let record = state.jobs.submit(JobKind::Curve, config.seed, config.replicates, total, &state.engine, move |e| {
        commands::curve(e, &config).map(|r| r.json)
    });
    Ok((StatusCode::ACCEPTED, Json(record)).into_response())
}

async fn calibrate(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let config = commands::batch_config(parse(&body)?, RunOverrides::default(), true)?;
    let total = config.calibration_work()?;
    let record = state.jobs.submit(
        JobKind::Calibrate,
        config.seed,
        config.calibration_replicates,
        total,
        &state.engine,
        move |e| commands::calibrate(e, &config).map(|r| r.json),
    );
    Ok((StatusCode::ACCEPTED, Json(record)).into_response())
}

async fn simulate(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let config = commands::batch_config(parse(&body)?, RunOverrides::default(), false)?;
    let total = config.simulation_work()?;
    let record = state.jobs.submit(JobKind::Simulate, config.seed, config.replicates, total, &state.engine, move |e| {
        commands::simulate(e, &config).map(|r| r.json)
    });
    Ok((StatusCode::ACCEPTED, Json(record)).into_response())
}

async fn job(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    match state.jobs.get(&id) {
        Some(record) => Ok(Json(record).into_response()),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no job `{id}`"))),
    }
}

async fn job_result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    match state.jobs.result(&id) {
        Ok(body) => Ok(json_body(StatusCode::OK, body.as_str().to_owned())),
        Err(ResultError::Unknown) => Err(ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no job `{id}`"))),
        Err(ResultError::NotReady(status)) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "not_ready",
            format!("job is {}", serde_json::to_string(&status).unwrap_or_default().trim_matches('"')),
        )),
        Err(ResultError::Failed(message)) => Err(ApiError::new(StatusCode::CONFLICT, "job_failed", message)),
    }
}

/// CORS for the browser client: any origin by default, or an explicit list.
pub fn cors_layer(origins: &[String]) -> anyhow::Result<CorsLayer> {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    if origins.is_empty() || origins.iter().any(|o| o == "*") {
        return Ok(layer.allow_origin(Any));
    }
    let list = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|e| anyhow::anyhow!("invalid CORS origin `{o}`: {e}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(layer.allow_origin(AllowOrigin::list(list)))
}

pub fn router(state: AppState, cors: CorsLayer) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/analyze", post(analyze))
        .route("/v1/weight-curve", post(weight_curve))
        .route("/v1/calibrate", post(calibrate))
        .route("/v1/simulate", post(simulate))
        .route("/v1/jobs/{id}", get(job))
        .route("/v1/jobs/{id}/result", get(job_result))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(bind: SocketAddr, state: AppState, cors: CorsLayer) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
