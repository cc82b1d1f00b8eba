use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::error::ServiceError;
use crate::store::{ActionRequest, CreateRequest, SessionStore, Subscription};

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0.to_json())).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Params = Query<HashMap<String, String>>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes)
        .map_err(|e| ApiError(ServiceError::Validation(format!("request body: {e}"))))
}

fn role_param(q: &HashMap<String, String>) -> ApiResult<&str> {
    q.get("role").map(String::as_str).ok_or_else(|| {
        ApiError(ServiceError::Validation(
            "missing `role` query parameter".into(),
        ))
    })
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}/view", get(view))
        .route("/v1/sessions/{id}/actions", post(action))
        .route("/v1/sessions/{id}/log", get(log))
        .route("/v1/sessions/{id}/events", get(events))
        .route("/v1/sessions/{id}/oracle", get(oracle))
        .with_state(store)
}

/// Serve the API on an already bound listener until the process stops.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: Arc<SessionStore>,
) -> std::io::Result<()> {
    axum::serve(listener, router(store)).await
}

async fn create(State(store): State<Arc<SessionStore>>, bytes: Bytes) -> ApiResult<Response> {
    let req: CreateRequest = body(&bytes)?;
    let out = store.create(req).await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn view(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult<Response> {
    Ok(Json(store.view(&id, role_param(&q)?).await?).into_response())
}

async fn action(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Response> {
    let req: ActionRequest = body(&bytes)?;
    Ok(Json(store.apply(&id, req).await?).into_response())
}

async fn log(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult<Response> {
    let entries = store.log(&id, q.get("role").map(String::as_str)).await?;
    Ok(Json(json!({"entries": entries})).into_response())
}

async fn oracle(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    Ok(Json(store.oracle(&id).await?).into_response())
}

async fn events(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Params,
    ws: WebSocketUpgrade,
) -> ApiResult<Response> {
    let from =
        match q.get("from") {
            Some(f) => Some(f.parse().map_err(|_| {
                ApiError(ServiceError::Validation(format!("bad `from` index `{f}`")))
            })?),
            None => None,
        };
    let sub = store.subscribe(&id, role_param(&q)?, from).await?;
    Ok(ws.on_upgrade(move |socket| stream(socket, sub)))
}

async fn stream(mut socket: WebSocket, mut sub: Subscription) {
    loop {
        tokio::select! {
            next = sub.next() => match next {
                Some(v) => {
                    if socket.send(Message::Text(v.to_string().into())).await.is_err() {
                        break;
                    }
                }
                None => {
                    let _ = socket.send(Message::Close(None)).await;
                    break;
                }
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                _ => {}
            },
        }
    }
}
