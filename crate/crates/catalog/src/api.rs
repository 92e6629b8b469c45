//! HTTP adapter over the catalog. Handlers only parse parameters, call into
//! [`crate::views`] or the store, and serialise the result.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use practice_scope::midi::ChannelMap;
use practice_scope::RecordingMeta;
use serde::{Deserialize, Serialize};

use crate::error::{CatalogError, ErrorCode};
use crate::store::{Catalog, RecordingFilter};
use crate::views::{self, parse_format, parse_time, Format, VizRequest};

const MAX_UPLOAD_BYTES: usize = 16 * 1024 * 1024;

type Shared = Arc<Catalog>;

pub fn router(catalog: Shared) -> Router {
    Router::new()
        .route("/api/players", get(players))
        .route("/api/exercises", get(exercises))
        .route("/api/recordings", get(recordings).post(upload))
        .route("/api/scores/:exercise", get(score))
        .route("/api/viz/:viz", get(viz))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(catalog)
}

/// Serves until Ctrl-C.
pub async fn serve(catalog: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "serving catalog API");
    axum::serve(listener, router(catalog))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

struct Failure(CatalogError);

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure(e)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let api = self.0.to_api_error();
        if api.code == ErrorCode::Internal {
            tracing::error!(error = %self.0, "request failed");
        }
        let status = StatusCode::from_u16(api.code.http_status()).expect("valid status");
        json_response(status, &api)
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let mut body = serde_json::to_vec(value).expect("response serialises");
    body.push(b'\n');
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

type ApiResult = Result<Response, Failure>;

async fn not_found() -> Failure {
    Failure(CatalogError::NotFound("no such endpoint".into()))
}

async fn players(State(cat): State<Shared>) -> ApiResult {
    Ok(json_response(StatusCode::OK, &cat.players()))
}

async fn exercises(State(cat): State<Shared>) -> ApiResult {
    Ok(json_response(StatusCode::OK, &cat.exercises()?))
}

fn query_map(q: Result<Query<BTreeMap<String, String>>, axum::extract::rejection::QueryRejection>) -> Result<BTreeMap<String, String>, Failure> {
    q.map(|Query(m)| m).map_err(|e| Failure(CatalogError::BadRequest(format!("malformed query: {e}"))))
}

async fn recordings(
    State(cat): State<Shared>,
    q: Result<Query<BTreeMap<String, String>>, axum::extract::rejection::QueryRejection>,
) -> ApiResult {
    let q = query_map(q)?;
    if let Some(k) = q.keys().find(|k| !["player", "exercise", "since", "until"].contains(&k.as_str())) {
        return Err(CatalogError::BadRequest(format!("unknown parameter `{k}` for recordings")).into());
    }
    let filter = RecordingFilter {
        player: q.get("player").cloned(),
        exercise: q.get("exercise").cloned(),
        since: q.get("since").map(|s| parse_time(s)).transpose()?,
        until: q.get("until").map(|s| parse_time(s)).transpose()?,
    };
    Ok(json_response(StatusCode::OK, &cat.query(&filter)))
}

async fn score(State(cat): State<Shared>, Path(exercise): Path<String>) -> ApiResult {
    let (score, _) = cat.score(&exercise)?;
    Ok(json_response(StatusCode::OK, &score.to_document()))
}

async fn viz(
    State(cat): State<Shared>,
    Path(name): Path<String>,
    q: Result<Query<BTreeMap<String, String>>, axum::extract::rejection::QueryRejection>,
) -> ApiResult {
    let q = query_map(q)?;
    let req = VizRequest::parse(&name, &q)?;
    let format = parse_format(&q)?;
    let body = tokio::task::spawn_blocking(move || views::render(&cat, &req, format))
        .await
        .map_err(|e| CatalogError::Corrupt(format!("render task failed: {e}")))??;
    Ok(body_response(format, Bytes::from(body.as_ref().clone())))
}

fn body_response(format: Format, body: Bytes) -> Response {
    (StatusCode::OK, [(header::CONTENT_TYPE, HeaderValue::from_static(format.content_type()))], body).into_response()
}

/// Upload form: a `file` part with SMF bytes and a `meta` part holding
/// [`RecordingMeta`] JSON, optionally with a `channelMap`.
#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct UploadMeta {
    #[serde(flatten)]
    meta: RecordingMeta,
    #[serde(default)]
    channel_map: Option<ChannelMap>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct UploadResponse {
    id: String,
    diagnostics: practice_scope::midi::IngestDiagnostics,
}

async fn upload(State(cat): State<Shared>, mut form: Multipart) -> ApiResult {
    let bad = |m: String| Failure(CatalogError::BadRequest(m));
    let (mut file, mut meta) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| bad(format!("malformed multipart body: {e}")))? {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(|e| bad(format!("reading part `{name}`: {e}")))?;
        match name.as_str() {
            "file" => file = Some(data),
            "meta" => {
                let parsed: UploadMeta =
                    serde_json::from_slice(&data).map_err(|e| bad(format!("invalid meta JSON: {e}")))?;
                meta = Some(parsed);
            }
            other => return Err(bad(format!("unexpected form part `{other}`"))),
        }
    }
    let file = file.ok_or_else(|| bad("missing `file` part".into()))?;
    let meta = meta.ok_or_else(|| bad("missing `meta` part".into()))?;
    let outcome = tokio::task::spawn_blocking(move || cat.ingest(&file, meta.meta, meta.channel_map))
        .await
        .map_err(|e| CatalogError::Corrupt(format!("ingest task failed: {e}")))??;
    Ok(json_response(StatusCode::CREATED, &UploadResponse { id: outcome.id, diagnostics: outcome.diagnostics }))
}
