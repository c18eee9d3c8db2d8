use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::Json;
use serde::{Deserialize, Serialize};

use super::{require_occasion, ApiJson, ApiPath, LoopView};
use crate::error::ApiError;
use crate::state::{ApiResult, Session, SharedState};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenSession {
    contact_id: String,
    #[serde(default)]
    occasion_id: Option<String>,
}

#[derive(Serialize)]
pub struct SessionView {
    session_id: String,
    contact_id: String,
    occasion_id: Option<String>,
    active_loop: Option<LoopView>,
    timeout_secs: u64,
}

fn view(state: &SharedState, session: &Session) -> SessionView {
    let active_loop = session
        .occasion_id
        .as_deref()
        .and_then(|o| state.active_loop(session, o))
        .map(|l| LoopView::of(&l));
    SessionView {
        session_id: session.session_id.clone(),
        contact_id: session.contact_id.clone(),
        occasion_id: session.occasion_id.clone(),
        active_loop,
        timeout_secs: state.config.session_timeout_secs,
    }
}

/// Opens a session bound to a registered contact.
pub async fn open(State(state): State<SharedState>, ApiJson(req): ApiJson<OpenSession>) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let (contact, occasion) = (req.contact_id.clone(), req.occasion_id.clone());
    state
        .run(move |store| {
            store.contact(&contact)?;
            if let Some(o) = &occasion {
                require_occasion(store, o)?;
            }
            Ok(())
        })
        .await?;
    let session = state.open_session(req.contact_id, req.occasion_id);
    Ok((StatusCode::CREATED, Json(view(&state, &session))))
}

pub async fn show(State(state): State<SharedState>, ApiPath(id): ApiPath<String>) -> ApiResult<Json<SessionView>> {
    let session = state.touch_session(&id)?;
    Ok(Json(view(&state, &session)))
}

pub async fn close(State(state): State<SharedState>, ApiPath(id): ApiPath<String>, _headers: HeaderMap) -> ApiResult<StatusCode> {
    match state.close_session(&id) {
        true => Ok(StatusCode::NO_CONTENT),
        false => Err(ApiError::not_found(format!("session {id}"))),
    }
}
