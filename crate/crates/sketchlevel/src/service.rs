//! HTTP API for the drawing canvas.
//!
//! | Method | Path                         | Body          | Success                  |
//! |--------|------------------------------|---------------|--------------------------|
//! | POST   | `/api/levels`                | PNG or PGM    | 201 level + feedback     |
//! | GET    | `/api/levels/{id}`           |               | 200 `application/xml`    |
//! | GET    | `/api/levels/{id}/meta`      |               | 200 metadata JSON        |
//! | POST   | `/api/levels/{id}/outcome`   | outcome JSON  | 200 `{feedback}`         |
//! | POST   | `/api/recognize`             | PNG or PGM    | 200 recognition JSON     |
//!
//! Errors are JSON `{"error": code, "detail": text}`.

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sketchlevel_core::levelgen::{GenerateError, GenerationConfig};
use sketchlevel_core::recognizer::RecognitionResult;
use sketchlevel_core::stability::{DifficultyStats, StabilityReport};
use sketchlevel_core::therapy::{FeedbackPhrase, FeedbackSession, GameplayOutcome, OutcomeStatus};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::image::ImageError;
use crate::pipeline::{Pipeline, PipelineError};
use crate::store::{new_id, LevelMeta, LevelRecord, Store, StoreError};

/// Largest accepted request body.
pub const MAX_BODY_BYTES: usize = 1024 * 1024;

/// Label used when recognition returns nothing.
const FALLBACK_LABEL: &str = "drawing";

/// Shared service state.
#[derive(Debug)]
pub struct AppState {
    /// Generation pipeline and defaults.
    pub pipeline: Pipeline,
    /// Level store.
    pub store: Store,
}

/// JSON error response.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        Self {
            status,
            code,
            detail: detail.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no level with id {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.code, "detail": self.detail })),
        )
            .into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let detail = e.to_string();
        match e {
            PipelineError::Image(ImageError::Decode { .. }) => {
                Self::new(StatusCode::BAD_REQUEST, "decode_error", detail)
            }
            PipelineError::Image(ImageError::Format(_)) => {
                Self::new(StatusCode::BAD_REQUEST, "unsupported_format", detail)
            }
            PipelineError::Raster(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_image", detail),
            PipelineError::Generate(GenerateError::OverBudget { .. }) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "over_budget", detail)
            }
            PipelineError::Generate(GenerateError::InvalidConfig(_)) => {
                Self::new(StatusCode::BAD_REQUEST, "invalid_parameter", detail)
            }
            PipelineError::Generate(_) | PipelineError::Recognize(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "generation_error", detail)
            }
        }
    }
}

fn body_error(rejection: BytesRejection) -> ApiError {
    if rejection.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("request body exceeds {MAX_BODY_BYTES} bytes"),
        )
    } else {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", rejection.body_text())
    }
}

/// Applies `seed`, `tnt_prob` and `threshold` query overrides.
fn apply_params(base: &GenerationConfig, params: &HashMap<String, String>) -> Result<GenerationConfig, ApiError> {
    let bad = |name: &str, value: &str, want: &str| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_parameter",
            format!("{name}={value:?}: expected {want}"),
        )
    };
    let mut cfg = base.clone();
    for (name, value) in params {
        match name.as_str() {
            "seed" => cfg.seed = value.parse().map_err(|_| bad(name, value, "an unsigned 64-bit integer"))?,
            "tnt_prob" => {
                cfg.tnt_prob = value
                    .parse()
                    .ok()
                    .filter(|p: &f64| (0.0..=1.0).contains(p))
                    .ok_or_else(|| bad(name, value, "a probability in [0, 1]"))?
            }
            "threshold" => cfg.threshold = value.parse().map_err(|_| bad(name, value, "an integer in 0..=255"))?,
            _ => {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "invalid_parameter",
                    format!("unknown query parameter {name:?}"),
                ))
            }
        }
    }
    Ok(cfg)
}

/// Body of a successful level creation.
#[derive(Debug, Serialize, Deserialize)]
pub struct CreatedLevel {
    /// New level id.
    pub id: String,
    /// Level file text.
    pub xml: String,
    /// Recognition of the drawing.
    pub recognition: RecognitionResult,
    /// Counts and score.
    pub stats: DifficultyStats,
    /// Support check.
    pub stability: StabilityReport,
    /// Praise before playing.
    pub feedback_preview: FeedbackPhrase,
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))
}

async fn create_level(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<CreatedLevel>), ApiError> {
    let body = body.map_err(body_error)?;
    let cfg = apply_params(&state.pipeline.config, &params)?;
    blocking(move || {
        let out = state.pipeline.generate(&body, &cfg)?;
        let label = out.recognition.top_label().unwrap_or(FALLBACK_LABEL).to_string();
        let mut session = FeedbackSession::default();
        let preview = state.pipeline.therapy.compose_in_session(
            &mut session,
            &label,
            &GameplayOutcome::NOT_PLAYED,
            &out.stats,
            out.spec.seed,
        );
        let meta = LevelMeta {
            id: new_id(),
            created_at: Utc::now(),
            spec: out.spec,
            recognition: out.recognition,
            stats: out.stats,
            stability: out.stability,
            outcome: None,
            feedback_session: session,
            config: cfg,
        };
        let record = LevelRecord { meta, xml: out.xml };
        state.store.put(&record)?;
        let LevelRecord { meta, xml } = record;
        Ok((
            StatusCode::CREATED,
            Json(CreatedLevel {
                id: meta.id,
                xml,
                recognition: meta.recognition,
                stats: meta.stats,
                stability: meta.stability,
                feedback_preview: preview,
            }),
        ))
    })
    .await?
}

async fn get_level(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let bytes = state.store.xml(&id)?.ok_or_else(|| ApiError::not_found(&id))?;
    Ok(([(header::CONTENT_TYPE, "application/xml")], bytes).into_response())
}

async fn get_meta(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let bytes = state.store.meta_bytes(&id)?.ok_or_else(|| ApiError::not_found(&id))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

/// Outcome report body.
#[derive(Debug, Serialize, Deserialize)]
pub struct OutcomeRequest {
    /// `cleared` or `failed`.
    pub status: String,
    /// Birds fired.
    pub birds_used: Option<u32>,
}

/// Outcome report response.
#[derive(Debug, Serialize, Deserialize)]
pub struct OutcomeResponse {
    /// Praise for the session.
    pub feedback: FeedbackPhrase,
}

async fn post_outcome(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<OutcomeRequest>, JsonRejection>,
) -> Result<Json<OutcomeResponse>, ApiError> {
    if state.store.meta_bytes(&id)?.is_none() {
        return Err(ApiError::not_found(&id));
    }
    let Json(req) = body.map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_outcome", e.body_text())
    })?;
    let status = match req.status.as_str() {
        "cleared" => OutcomeStatus::Cleared,
        "failed" => OutcomeStatus::Failed,
        other => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_status",
                format!("status must be \"cleared\" or \"failed\", got {other:?}"),
            ))
        }
    };
    let birds_used = req.birds_used.ok_or_else(|| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_outcome", "birds_used is required")
    })?;
    let outcome = GameplayOutcome {
        status,
        birds_used: Some(birds_used),
    };
    let feedback = blocking(move || {
        state.store.update_meta(&id, |meta| {
            meta.outcome = Some(outcome);
            let label = meta.recognition.top_label().unwrap_or(FALLBACK_LABEL).to_string();
            state.pipeline.therapy.compose_in_session(
                &mut meta.feedback_session,
                &label,
                &outcome,
                &meta.stats,
                meta.spec.seed,
            )
        })
    })
    .await??;
    // The level can only vanish between the two lookups if files were removed by hand.
    let feedback = feedback.ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", "level disappeared"))?;
    Ok(Json(OutcomeResponse { feedback }))
}

async fn recognize(
    State(state): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<RecognitionResult>, ApiError> {
    let body = body.map_err(body_error)?;
    let result = blocking(move || state.pipeline.recognize(&body, &state.pipeline.config)).await??;
    Ok(Json(result))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

fn cors_layer(origin: Option<&str>) -> CorsLayer {
    let allow = match origin {
        None | Some("*") => AllowOrigin::any(),
        Some(list) => AllowOrigin::list(
            list.split(',')
                .filter_map(|o| HeaderValue::from_str(o.trim()).ok()),
        ),
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

/// Builds the router. `cors_origin` is `*`, a comma-separated origin list,
/// or `None` for any origin.
pub fn router(state: Arc<AppState>, cors_origin: Option<&str>) -> Router {
    Router::new()
        .route("/api/levels", post(create_level))
        .route("/api/levels/{id}", get(get_level))
        .route("/api/levels/{id}/meta", get(get_meta))
        .route("/api/levels/{id}/outcome", post(post_outcome))
        .route("/api/recognize", post(recognize))
        .fallback(fallback)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(cors_layer(cors_origin))
        .with_state(state)
}

/// Serves `router` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}
