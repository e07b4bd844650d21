//! HTTP execution endpoint: `POST /execute`, `GET /profiles`, `GET /health`.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Semaphore;

use alia_core::sim::SimConfig;
use alia_core::{CompiledScript, SutProfile};

use crate::{run_script, RunOptions};

pub const DEFAULT_MAX_CONCURRENT_RUNS: usize = 8;

pub struct AppState {
    pub profiles: BTreeMap<String, Arc<SutProfile>>,
    pub sim: SimConfig,
    runs: Arc<Semaphore>,
}

impl AppState {
    pub fn new(profiles: BTreeMap<String, SutProfile>, sim: SimConfig, max_concurrent: usize) -> Self {
        AppState {
            profiles: profiles.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
            sim,
            runs: Arc::new(Semaphore::new(max_concurrent.max(1))),
        }
    }
}

/// Request body of `POST /execute`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    pub script: serde_json::Value,
    pub profile_id: String,
    #[serde(default)]
    pub options: RunOptions,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/execute", post(execute_handler))
        .route("/profiles", get(profiles_handler))
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .with_state(Arc::new(state))
}

pub async fn serve(addr: SocketAddr, state: AppState) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await?;
    Ok(())
}

fn error(status: StatusCode, code: &str, message: impl ToString) -> Response {
    (status, Json(json!({"error": code, "message": message.to_string()}))).into_response()
}

async fn profiles_handler(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(state.profiles.keys().cloned().collect())
}

async fn execute_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: RunRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, "invalid-request", e),
    };
    let script = match CompiledScript::from_value(request.script) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::BAD_REQUEST, "invalid-script", e),
    };
    let Some(profile) = state.profiles.get(&request.profile_id).cloned() else {
        return error(
            StatusCode::BAD_REQUEST,
            "unknown-profile",
            format!("no profile with id `{}`", request.profile_id),
        );
    };
    let Ok(_permit) = state.runs.clone().acquire_owned().await else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "shutting-down", "run limiter closed");
    };
    let sim = state.sim.clone();
    let options = request.options;
    let joined =
        tokio::task::spawn_blocking(move || run_script(&script, &profile, &sim, options)).await;
    match joined {
        Ok(Ok(Ok(report))) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            report.to_json(),
        )
            .into_response(),
        Ok(Ok(Err(invalid))) => error(StatusCode::BAD_REQUEST, "invalid-script", invalid),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("{e:#}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e),
    }
}
