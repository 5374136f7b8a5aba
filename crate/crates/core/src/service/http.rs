//! HTTP and websocket front end.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::debug;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use super::messages::{ClientMessage, CreateSession, OptimizeAction, ServerMessage};
use super::session::{Service, ServiceError, ServiceResult};
use crate::problems::Level;
use crate::seeding::CursorTrace;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = State<Arc<Service>>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ServiceResult<T> + Send + 'static) -> ServiceResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn create(State(svc): Shared, Json(req): Json<CreateSession>) -> ServiceResult<impl IntoResponse> {
    let info = blocking(move || Ok(svc.create_session(req.level, req.duration_ms)?.info())).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn info(State(svc): Shared, Path(id): Path<String>) -> ServiceResult<impl IntoResponse> {
    Ok(Json(svc.session(&id)?.info()))
}

async fn trace(State(svc): Shared, Path(id): Path<String>, Json(t): Json<CursorTrace>) -> ServiceResult<impl IntoResponse> {
    Ok(Json(blocking(move || svc.submit_trace(&id, &t)).await?))
}

#[derive(Deserialize)]
struct OptimizeRequest {
    action: OptimizeAction,
}

fn optimize_action(svc: &Arc<Service>, id: &str, action: OptimizeAction) -> ServiceResult<()> {
    match action {
        OptimizeAction::Start => svc.start_optimization(id).map(|_| ()),
        OptimizeAction::Stop => svc.stop_optimization(id),
    }
}

async fn optimize(
    State(svc): Shared,
    Path(id): Path<String>,
    Json(req): Json<OptimizeRequest>,
) -> ServiceResult<impl IntoResponse> {
    optimize_action(&svc, &id, req.action)?;
    Ok(StatusCode::ACCEPTED)
}

#[derive(Deserialize)]
struct SolutionRef {
    solution_id: String,
}

async fn select(State(svc): Shared, Path(id): Path<String>, Json(r): Json<SolutionRef>) -> ServiceResult<impl IntoResponse> {
    svc.session(&id)?.select(&r.solution_id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn replay(State(svc): Shared, Path(id): Path<String>, Json(r): Json<SolutionRef>) -> ServiceResult<impl IntoResponse> {
    let decimation = svc.config.decimation;
    let session = svc.session(&id)?;
    let n = blocking(move || session.replay(&r.solution_id, decimation)).await?;
    Ok(Json(json!({ "frames": n })))
}

async fn solutions(State(svc): Shared, Path(id): Path<String>) -> ServiceResult<impl IntoResponse> {
    let list: Vec<super::messages::Solution> = svc.session(&id)?.solutions().iter().map(Into::into).collect();
    Ok(Json(list))
}

async fn archive(State(svc): Shared, Path(id): Path<String>) -> ServiceResult<impl IntoResponse> {
    let text = svc.session_archive(&id)?.to_text()?;
    Ok(([("content-type", "text/plain; charset=utf-8")], text))
}

async fn graph(State(svc): Shared, Path(level): Path<String>) -> ServiceResult<impl IntoResponse> {
    let level: Level = level.parse()?;
    Ok(Json(svc.graph_data(level)))
}

async fn stream(State(svc): Shared, Path(id): Path<String>, ws: WebSocketUpgrade) -> ServiceResult<Response> {
    svc.session(&id)?;
    Ok(ws.on_upgrade(move |socket| run_socket(svc, id, socket)))
}

async fn handle_command(svc: &Arc<Service>, id: &str, cmd: ClientMessage) -> ServiceResult<()> {
    let decimation = svc.config.decimation;
    match cmd {
        ClientMessage::Trace(t) => {
            let (svc, id) = (svc.clone(), id.to_string());
            blocking(move || svc.submit_trace(&id, &t)).await.map(|_| ())
        }
        ClientMessage::Optimize { action } => optimize_action(svc, id, action),
        ClientMessage::Select { solution_id } => svc.session(id)?.select(&solution_id),
        ClientMessage::Replay { solution_id } => {
            let session = svc.session(id)?;
            blocking(move || session.replay(&solution_id, decimation)).await.map(|_| ())
        }
    }
}

async fn run_socket(svc: Arc<Service>, id: String, mut socket: WebSocket) {
    let Ok(session) = svc.session(&id) else { return };
    let mut rx = session.subscribe();
    drop(session);
    loop {
        tokio::select! {
            msg = rx.recv() => {
                let msg = match msg {
                    Ok(m) => m,
                    Err(RecvError::Lagged(n)) => {
                        debug!("stream {id}: dropped {n} messages");
                        continue;
                    }
                    Err(RecvError::Closed) => break,
                };
                let text = serde_json::to_string(&msg).expect("messages serialize");
                if socket.send(Message::Text(text.into())).await.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => {
                let Some(Ok(incoming)) = incoming else { break };
                let Message::Text(text) = incoming else { continue };
                let result = match serde_json::from_str::<ClientMessage>(&text) {
                    Ok(cmd) => {
                        // Commands may take a while; run them without blocking outgoing messages.
                        let (svc, id) = (svc.clone(), id.clone());
                        tokio::spawn(async move {
                            if let Err(e) = handle_command(&svc, &id, cmd).await {
                                if let Ok(s) = svc.session(&id) {
                                    s.notify(ServerMessage::Error { message: e.to_string() });
                                }
                            }
                        });
                        Ok(())
                    }
                    Err(e) => Err(e.to_string()),
                };
                if let Err(message) = result {
                    let text = serde_json::to_string(&ServerMessage::Error { message }).expect("messages serialize");
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
            }
        }
    }
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(info))
        .route("/sessions/{id}/trace", post(trace))
        .route("/sessions/{id}/optimize", post(optimize))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/replay", post(replay))
        .route("/sessions/{id}/solutions", get(solutions))
        .route("/sessions/{id}/archive", get(archive))
        .route("/sessions/{id}/stream", get(stream))
        .route("/graph/{level}", get(graph))
        .with_state(service)
}

/// Serves on `addr` until the process ends.
pub async fn serve(service: Arc<Service>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
