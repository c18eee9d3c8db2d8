//! HTTP routes. Every failure leaves as an [`ApiError`] JSON body.

mod index;
mod media;
mod projects;
mod registry;
mod reports;
mod sessions;
mod transcript;

use axum::extract::{DefaultBodyLimit, FromRequest, FromRequestParts};
use axum::http::{HeaderMap, StatusCode};
use axum::routing::{get, post, put};
use axum::Router;
use sla_store::{is_valid_id, DocId, Store, StoreError};

use crate::error::ApiError;
use crate::state::{ApiResult, AppState, Session, SharedState};

pub use media::LoopView;
pub use transcript::DocumentSummary;

/// Header carrying the session token.
pub const SESSION_HEADER: &str = "x-session";

/// Largest accepted media upload.
pub const MAX_MEDIA_BYTES: usize = 1 << 30;

#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct ApiJson<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct ApiQuery<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Path), rejection(ApiError))]
pub struct ApiPath<T>(pub T);

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/integrity", get(projects::integrity))
        .route("/sessions", post(sessions::open))
        .route("/sessions/{s}", get(sessions::show).delete(sessions::close))
        .route("/projects", post(projects::create).get(projects::list))
        .route("/projects/{p}", get(projects::show))
        .route("/projects/{p}/occasions", post(projects::create_occasion))
        .route("/projects/{p}/occasions/{o}", put(projects::link_occasion).delete(projects::unlink_occasion))
        .route("/projects/{p}/resources", post(projects::link_resource))
        .route("/occasions", get(projects::list_occasions))
        .route("/occasions/{o}", get(transcript::show))
        .route(
            "/occasions/{o}/media",
            post(media::ingest).get(media::download).layer(DefaultBodyLimit::max(MAX_MEDIA_BYTES)),
        )
        .route("/occasions/{o}/media/info", get(media::info))
        .route("/occasions/{o}/waveform", get(media::waveform))
        .route("/occasions/{o}/excerpt", get(media::occasion_excerpt))
        .route("/occasions/{o}/loops", post(media::create_loop))
        .route("/loops/{l}", get(media::show_loop).patch(media::update_loop).delete(media::delete_loop))
        .route("/loops/{l}/advance", post(media::advance_loop))
        .route("/loops/{l}/excerpt", get(media::loop_excerpt))
        .route("/occasions/{o}/utterances", post(transcript::append))
        .route("/occasions/{o}/episodes", post(transcript::episode))
        .route("/utterances/{u}/tiers", post(transcript::attach))
        .route("/occasions/{o}/view", post(transcript::view))
        .route("/occasions/{o}/validate", get(transcript::validate))
        .route("/occasions/{o}/export", get(transcript::export))
        .route("/occasions/{o}/index-events", post(index::record).get(index::list))
        .route("/occasions/{o}/reports/{kind}", get(reports::report))
        .route("/contacts", post(registry::create_contact).get(registry::contacts))
        .route(
            "/contacts/{c}",
            get(registry::contact).put(registry::revise_contact).delete(registry::delete_contact),
        )
        .route("/contacts/{c}/history", get(registry::contact_history))
        .route("/places", post(registry::create_place).get(registry::places))
        .route("/places/{id}", get(registry::place))
        .route("/resources", post(registry::log_resource).get(registry::resources))
        .route("/resources/{r}", get(registry::resource).delete(registry::delete_resource))
        .route("/networks", post(index::create_network).get(index::networks))
        .route("/networks/{n}", get(index::network).delete(index::delete_network))
        .route("/networks/{n}/versions", post(index::revise_network).get(index::versions))
        .route("/networks/{n}/versions/{v}", get(index::version))
        .route("/networks/{n}/versions/{v}/selections", get(index::selections))
        .route("/networks/{n}/versions/{v}/check", post(index::check_selection))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

async fn health() -> &'static str {
    "ok"
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "UNSUPPORTED", "method not allowed on this route")
}

/// The session named by the request header; required.
pub(crate) fn session(state: &AppState, headers: &HeaderMap) -> ApiResult<Session> {
    match optional_session(state, headers)? {
        Some(s) => Ok(s),
        None => Err(ApiError::new(StatusCode::UNAUTHORIZED, "SESSION_REQUIRED", format!("missing {SESSION_HEADER} header"))),
    }
}

pub(crate) fn optional_session(state: &AppState, headers: &HeaderMap) -> ApiResult<Option<Session>> {
    match headers.get(SESSION_HEADER) {
        None => Ok(None),
        Some(value) => {
            let token = value.to_str().map_err(|_| ApiError::bad_request("session header is not text"))?;
            state.touch_session(token).map(Some)
        }
    }
}

pub(crate) fn require_occasion(store: &Store, occasion_id: &str) -> ApiResult<()> {
    match is_valid_id(occasion_id) && store.exists(&DocId::Occasion(occasion_id.to_string())) {
        true => Ok(()),
        false => Err(ApiError::not_found(format!("occasion {occasion_id}"))),
    }
}

/// Media descriptor of an existing occasion; NO_MEDIA if none was ingested.
pub(crate) fn require_media(store: &Store, occasion_id: &str) -> ApiResult<sla_store::MediaInfo> {
    require_occasion(store, occasion_id)?;
    match store.media_info(occasion_id) {
        Err(StoreError::NotFound(_)) => Err(no_media(occasion_id)),
        other => Ok(other?),
    }
}

pub(crate) fn no_media(occasion_id: &str) -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "NO_MEDIA", format!("occasion {occasion_id} has no media"))
}

pub(crate) fn conflict(doc: &str, expected: u64, found: u64) -> ApiError {
    ApiError::from(StoreError::Conflict { doc: doc.to_string(), expected, found })
}
