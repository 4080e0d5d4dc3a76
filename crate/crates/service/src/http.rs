use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};

use crate::notify::{render_notification, Notification};
use crate::service::{Service, ServiceError, Verdict};

#[derive(Serialize)]
struct ScoreResponse {
    #[serde(flatten)]
    verdict: Verdict,
    notification: Option<Notification>,
}

type Reply = (StatusCode, Json<Value>);

fn reply<T: Serialize>(r: Result<T, ServiceError>) -> Reply {
    match r {
        Ok(v) => (StatusCode::OK, Json(serde_json::to_value(v).expect("response serializes"))),
        Err(e) => {
            let status = if e.is_client_error() { StatusCode::BAD_REQUEST } else { StatusCode::INTERNAL_SERVER_ERROR };
            (status, Json(json!({ "error": e.kind(), "message": e.to_string() })))
        }
    }
}

async fn score(State(s): State<Arc<Service>>, body: Bytes) -> Reply {
    reply(s.score_json(&body).map(|verdict| ScoreResponse { notification: render_notification(&verdict), verdict }))
}

async fn feedback(State(s): State<Arc<Service>>, body: Bytes) -> Reply {
    reply(s.feedback_json(&body))
}

async fn swap(State(s): State<Arc<Service>>, body: Bytes) -> Reply {
    let svc = s.clone();
    let r = tokio::task::spawn_blocking(move || svc.swap_json(&body)).await.expect("swap task");
    reply(r)
}

async fn model(State(s): State<Arc<Service>>) -> Reply {
    reply(Ok::<_, ServiceError>(s.model_info()))
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/score", post(score))
        .route("/v1/feedback", post(feedback))
        .route("/v1/model", post(swap).get(model))
        .with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(service)).await
}
