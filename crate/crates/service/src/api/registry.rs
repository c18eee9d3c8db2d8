use axum::extract::State;
use axum::http::StatusCode;
use axum::Json;
use chrono::Utc;
use sla_store::{ContactDraft, ContactRecord, PlaceDraft, PlaceRecord, ResourceDraft, ResourceRecord, StoreError};

use super::{ApiJson, ApiPath};
use crate::error::ApiError;
use crate::state::{ApiResult, SharedState};

type Created<T> = ApiResult<(StatusCode, Json<T>)>;

pub async fn create_contact(State(state): State<SharedState>, ApiJson(draft): ApiJson<ContactDraft>) -> Created<ContactRecord> {
    let record = state.run(move |store| Ok(store.upsert_contact(None, draft, Utc::now())?)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

/// Adds a revision; earlier revisions stay in the history.
pub async fn revise_contact(
    State(state): State<SharedState>,
    ApiPath(c): ApiPath<String>,
    ApiJson(draft): ApiJson<ContactDraft>,
) -> ApiResult<Json<ContactRecord>> {
    Ok(Json(state.run(move |store| Ok(store.upsert_contact(Some(&c), draft, Utc::now())?)).await?))
}

pub async fn contacts(State(state): State<SharedState>) -> ApiResult<Json<Vec<ContactRecord>>> {
    Ok(Json(state.run(|store| Ok(store.contacts()?)).await?))
}

pub async fn contact(State(state): State<SharedState>, ApiPath(c): ApiPath<String>) -> ApiResult<Json<ContactRecord>> {
    Ok(Json(state.run(move |store| Ok(store.contact(&c)?)).await?))
}

pub async fn contact_history(State(state): State<SharedState>, ApiPath(c): ApiPath<String>) -> ApiResult<Json<Vec<ContactRecord>>> {
    Ok(Json(state.run(move |store| Ok(store.contact_history(&c)?)).await?))
}

pub async fn delete_contact(ApiPath(_c): ApiPath<String>) -> ApiError {
    StoreError::Unsupported("deleting contacts").into()
}

pub async fn create_place(State(state): State<SharedState>, ApiJson(draft): ApiJson<PlaceDraft>) -> Created<PlaceRecord> {
    let record = state.run(move |store| Ok(store.add_place(draft)?)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

pub async fn places(State(state): State<SharedState>) -> ApiResult<Json<Vec<PlaceRecord>>> {
    Ok(Json(state.run(|store| Ok(store.places()?)).await?))
}

pub async fn place(State(state): State<SharedState>, ApiPath(id): ApiPath<String>) -> ApiResult<Json<PlaceRecord>> {
    Ok(Json(state.run(move |store| Ok(store.place(&id)?)).await?))
}

pub async fn log_resource(State(state): State<SharedState>, ApiJson(draft): ApiJson<ResourceDraft>) -> Created<ResourceRecord> {
    let record = state.run(move |store| Ok(store.log_resource(draft)?)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

pub async fn resources(State(state): State<SharedState>) -> ApiResult<Json<Vec<ResourceRecord>>> {
    Ok(Json(state.run(|store| Ok(store.resources()?)).await?))
}

pub async fn resource(State(state): State<SharedState>, ApiPath(r): ApiPath<String>) -> ApiResult<Json<ResourceRecord>> {
    Ok(Json(state.run(move |store| Ok(store.resource(&r)?)).await?))
}

pub async fn delete_resource(State(state): State<SharedState>, ApiPath(r): ApiPath<String>) -> ApiResult<StatusCode> {
    state.run(move |store| Ok(store.delete_resource(&r)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}
