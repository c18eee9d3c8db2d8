use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::Json;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sla_core::chat::{parse_chat, ChatDocument, Header};
use sla_store::{IntegrityReport, LinkOutcome, OccasionSummary, ProjectEntry, ProjectFile, StoreError};

use super::{optional_session, ApiJson, ApiPath, DocumentSummary};
use crate::error::ApiError;
use crate::state::{ApiResult, SharedState};

const CREATE_RETRIES: usize = 8;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateProject {
    title: String,
}

pub async fn create(State(state): State<SharedState>, ApiJson(req): ApiJson<CreateProject>) -> ApiResult<(StatusCode, Json<ProjectFile>)> {
    let project = state
        .run(move |store| {
            let mut attempt = 0;
            loop {
                let (_, revision) = store.project_index()?;
                match store.create_project(&req.title, revision) {
                    Err(StoreError::Conflict { .. }) if attempt < CREATE_RETRIES => attempt += 1,
                    other => return Ok(other?),
                }
            }
        })
        .await?;
    Ok((StatusCode::CREATED, Json(project)))
}

pub async fn list(State(state): State<SharedState>) -> ApiResult<Json<Vec<ProjectEntry>>> {
    Ok(Json(state.run(|store| Ok(store.list_projects()?)).await?))
}

pub async fn show(State(state): State<SharedState>, ApiPath(p): ApiPath<String>) -> ApiResult<Json<ProjectFile>> {
    Ok(Json(state.run(move |store| Ok(store.project(&p)?.0)).await?))
}

/// Body of `POST /projects/{p}/occasions`. Either `chat` imports an existing
/// transcript, or the transcript is started from registered contacts and an
/// optional place.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateOccasion {
    title: String,
    #[serde(default)]
    chat: Option<String>,
    #[serde(default)]
    contact_ids: Vec<String>,
    #[serde(default)]
    place_id: Option<String>,
    #[serde(default)]
    languages: Option<String>,
    #[serde(default)]
    transcriber: Option<String>,
    #[serde(default)]
    date: Option<NaiveDate>,
}

pub async fn create_occasion(
    State(state): State<SharedState>,
    ApiPath(project_id): ApiPath<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<CreateOccasion>,
) -> ApiResult<(StatusCode, Json<DocumentSummary>)> {
    let session = optional_session(&state, &headers)?;
    let (meta, doc, revision) = state
        .run(move |store| {
            store.project(&project_id)?;
            let doc = match &req.chat {
                Some(text) => {
                    if !req.contact_ids.is_empty() || req.place_id.is_some() {
                        return Err(ApiError::bad_request("chat import cannot be combined with contact_ids or place_id"));
                    }
                    parse_chat(text).map_err(ApiError::diagnostics)?
                }
                None => fresh_document(store, &req)?,
            };
            let meta = store.create_occasion(req.title.trim(), &doc)?;
            store.link_occasion(&project_id, &meta.id)?;
            let (meta, doc, revision) = store.occasion(&meta.id)?;
            Ok((meta, doc, revision))
        })
        .await?;
    if let Some(s) = session {
        state.set_session_occasion(&s.session_id, &meta.id);
    }
    Ok((StatusCode::CREATED, Json(DocumentSummary::of(&meta, &doc, revision))))
}

fn fresh_document(store: &sla_store::Store, req: &CreateOccasion) -> ApiResult<ChatDocument> {
    if req.contact_ids.is_empty() {
        return Err(ApiError::bad_request("an occasion needs at least one contact or a chat transcript"));
    }
    let participants = req
        .contact_ids
        .iter()
        .map(|c| Ok(store.contact(c)?.to_participant()))
        .collect::<ApiResult<Vec<_>>>()?;
    let mut doc = ChatDocument::new(participants);
    if let Some(l) = &req.languages {
        doc.constant_headers.push(Header::Languages(l.clone()));
    }
    if let Some(t) = &req.transcriber {
        doc.constant_headers.push(Header::Transcriber(t.clone()));
    }
    let first = &mut doc.episodes[0].changeable_headers;
    if let Some(place) = &req.place_id {
        first.extend(store.place(place)?.headers());
    }
    if let Some(date) = req.date {
        first.push(Header::Date(date));
    }
    Ok(doc)
}

#[derive(Serialize)]
pub struct LinkResult {
    project: ProjectFile,
    outcome: LinkOutcome,
}

pub async fn link_occasion(State(state): State<SharedState>, ApiPath((p, o)): ApiPath<(String, String)>) -> ApiResult<Json<LinkResult>> {
    let (project, outcome) = state.run(move |store| Ok(store.link_occasion(&p, &o)?)).await?;
    Ok(Json(LinkResult { project, outcome }))
}

pub async fn unlink_occasion(State(state): State<SharedState>, ApiPath((p, o)): ApiPath<(String, String)>) -> ApiResult<Json<LinkResult>> {
    let (project, outcome) = state.run(move |store| Ok(store.unlink_occasion(&p, &o)?)).await?;
    Ok(Json(LinkResult { project, outcome }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkResource {
    resource_id: String,
}

pub async fn link_resource(
    State(state): State<SharedState>,
    ApiPath(p): ApiPath<String>,
    ApiJson(req): ApiJson<LinkResource>,
) -> ApiResult<Json<LinkResult>> {
    let (project, outcome) = state.run(move |store| Ok(store.link_resource(&p, &req.resource_id)?)).await?;
    Ok(Json(LinkResult { project, outcome }))
}

pub async fn list_occasions(State(state): State<SharedState>) -> ApiResult<Json<Vec<OccasionSummary>>> {
    Ok(Json(state.run(|store| Ok(store.list_occasions()?)).await?))
}

pub async fn integrity(State(state): State<SharedState>) -> ApiResult<Json<IntegrityReport>> {
    Ok(Json(state.run(|store| Ok(store.integrity_check()?)).await?))
}
