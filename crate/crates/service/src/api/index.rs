use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::Json;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use sla_core::index::{
    enumerate_valid_selections, merge_events_into_transcript, record_index_event, validate_selection, EventDraft,
    IndexEvent, NetworkVersion, Selection, System, SystemNetwork, Violation,
};
use sla_core::TimeSpan;

use super::transcript::loop_span;
use super::{optional_session, require_media, ApiJson, ApiPath};
use crate::error::ApiError;
use crate::state::{ApiResult, SharedState};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEvent {
    network_id: String,
    /// Defaults to the network's latest version.
    #[serde(default)]
    network_version: Option<u32>,
    selection: Selection,
    /// Defaults to the session's active loop span.
    #[serde(default)]
    span: Option<TimeSpan>,
    #[serde(default)]
    note: Option<String>,
    /// Defaults to the session's contact.
    #[serde(default)]
    author: Option<String>,
}

#[derive(Serialize)]
pub struct RecordedEvent {
    event: IndexEvent,
    events_revision: u64,
    occasion_revision: u64,
}

/// Records an index event and merges it into the transcript.
pub async fn record(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<RecordEvent>,
) -> ApiResult<(StatusCode, Json<RecordedEvent>)> {
    let session = optional_session(&state, &headers)?;
    let span = match req.span {
        Some(span) => span,
        None => loop_span(&state, &headers, &o)?,
    };
    let author = req
        .author
        .or_else(|| session.map(|s| s.contact_id))
        .ok_or_else(|| ApiError::bad_request("author is required without a session"))?;
    let _writer = state.writer(&o).await;
    let recorded = state
        .run(move |store| {
            let media = require_media(store, &o)?;
            store.contact(&author)?;
            let (network, _) = store.network(&req.network_id)?;
            if network.is_deleted() {
                return Err(ApiError::new(StatusCode::CONFLICT, "NETWORK_DELETED", format!("network {} is deleted", network.id())));
            }
            let version = match req.network_version {
                Some(v) => network.version(v).ok_or_else(|| ApiError::not_found(format!("network {} version {v}", network.id())))?,
                None => network.latest(),
            };
            let draft = EventDraft {
                occasion_id: o.clone(),
                network_id: req.network_id,
                network_version: version.version(),
                selection: req.selection,
                span,
                note: req.note,
                author,
            };
            let (events, events_rev) = store.events(&o)?;
            let event_id = format!("e{:04}", events.len() + 1);
            let event = record_index_event(draft, version, media.duration_ms, event_id, Utc::now())?;
            let events_revision = store.append_event(&event, events_rev)?;
            let (meta, doc, mut occasion_revision) = store.occasion(&o)?;
            let merged = merge_events_into_transcript(&doc, std::slice::from_ref(&event));
            if merged != doc {
                occasion_revision = store.put_occasion(&meta, &merged, occasion_revision)?;
            }
            Ok(RecordedEvent { event, events_revision, occasion_revision })
        })
        .await?;
    Ok((StatusCode::CREATED, Json(recorded)))
}

pub async fn list(State(state): State<SharedState>, ApiPath(o): ApiPath<String>) -> ApiResult<Json<Vec<IndexEvent>>> {
    Ok(Json(state.run(move |store| Ok(store.events(&o)?.0)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateNetwork {
    id: String,
    name: String,
    systems: Vec<System>,
}

pub async fn create_network(
    State(state): State<SharedState>,
    ApiJson(req): ApiJson<CreateNetwork>,
) -> ApiResult<(StatusCode, Json<SystemNetwork>)> {
    let network = SystemNetwork::create(&req.id, &req.name, req.systems)?;
    let saved = network.clone();
    state.run(move |store| Ok(store.save_network(&saved, 0)?)).await?;
    Ok((StatusCode::CREATED, Json(network)))
}

pub async fn networks(State(state): State<SharedState>) -> ApiResult<Json<Vec<SystemNetwork>>> {
    Ok(Json(state.run(|store| Ok(store.networks()?)).await?))
}

pub async fn network(State(state): State<SharedState>, ApiPath(n): ApiPath<String>) -> ApiResult<Json<SystemNetwork>> {
    Ok(Json(state.run(move |store| Ok(store.network(&n)?.0)).await?))
}

/// Tombstones a network. Stored versions stay readable for the events
/// pinned to them.
pub async fn delete_network(State(state): State<SharedState>, ApiPath(n): ApiPath<String>) -> ApiResult<Json<SystemNetwork>> {
    let network = state
        .run(move |store| {
            let (network, revision) = store.network(&n)?;
            let tombstoned = network.tombstoned();
            store.save_network(&tombstoned, revision)?;
            Ok(tombstoned)
        })
        .await?;
    Ok(Json(network))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviseNetwork {
    systems: Vec<System>,
}

pub async fn revise_network(
    State(state): State<SharedState>,
    ApiPath(n): ApiPath<String>,
    ApiJson(req): ApiJson<ReviseNetwork>,
) -> ApiResult<(StatusCode, Json<NetworkVersion>)> {
    let version = state
        .run(move |store| {
            let (network, revision) = store.network(&n)?;
            if network.is_deleted() {
                return Err(ApiError::new(StatusCode::CONFLICT, "NETWORK_DELETED", format!("network {n} is deleted")));
            }
            let revised = network.revise(req.systems)?;
            store.save_network(&revised, revision)?;
            Ok(revised.latest().clone())
        })
        .await?;
    Ok((StatusCode::CREATED, Json(version)))
}

pub async fn versions(State(state): State<SharedState>, ApiPath(n): ApiPath<String>) -> ApiResult<Json<Vec<NetworkVersion>>> {
    Ok(Json(state.run(move |store| Ok(store.network(&n)?.0.versions().to_vec())).await?))
}

async fn load_version(state: &SharedState, n: String, v: u32) -> ApiResult<NetworkVersion> {
    state
        .run(move |store| {
            let (network, _) = store.network(&n)?;
            network.version(v).cloned().ok_or_else(|| ApiError::not_found(format!("network {n} version {v}")))
        })
        .await
}

pub async fn version(State(state): State<SharedState>, ApiPath((n, v)): ApiPath<(String, u32)>) -> ApiResult<Json<NetworkVersion>> {
    Ok(Json(load_version(&state, n, v).await?))
}

#[derive(Serialize)]
pub struct SelectionList {
    count: usize,
    selections: Vec<Selection>,
}

/// Every valid selection, for option pickers.
pub async fn selections(State(state): State<SharedState>, ApiPath((n, v)): ApiPath<(String, u32)>) -> ApiResult<Json<SelectionList>> {
    let version = load_version(&state, n, v).await?;
    let selections: Vec<Selection> = enumerate_valid_selections(&version, state.config.enumeration_bound)?.into_iter().collect();
    Ok(Json(SelectionList { count: selections.len(), selections }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSelection {
    selection: Selection,
}

#[derive(Serialize)]
pub struct SelectionCheck {
    valid: bool,
    violations: Vec<Violation>,
}

pub async fn check_selection(
    State(state): State<SharedState>,
    ApiPath((n, v)): ApiPath<(String, u32)>,
    ApiJson(req): ApiJson<CheckSelection>,
) -> ApiResult<Json<SelectionCheck>> {
    let version = load_version(&state, n, v).await?;
    let violations = validate_selection(&version, &req.selection)?;
    Ok(Json(SelectionCheck { valid: violations.is_empty(), violations }))
}
