use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use sla_core::chat::{
    self, append_utterance, attach_tier, filter_view, new_episode, serialize_chat, ChatDocument, Diagnostic, Header,
    OccasionMeta, TranscriptView, ViewCriteria,
};
use sla_core::index::merge_events_into_transcript;
use sla_core::TimeSpan;

use super::{conflict, optional_session, ApiJson, ApiPath, ApiQuery};
use crate::error::ApiError;
use crate::state::{ApiResult, SharedState};

/// State of a transcript after a read or an edit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub occasion_id: String,
    pub title: String,
    pub revision: u64,
    pub participants: Vec<String>,
    pub episode_count: usize,
    pub utterance_count: usize,
    /// Fresh validation of the stored document.
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<TimeSpan>,
}

impl DocumentSummary {
    pub fn of(meta: &OccasionMeta, doc: &ChatDocument, revision: u64) -> Self {
        DocumentSummary {
            occasion_id: meta.id.clone(),
            title: meta.title.clone(),
            revision,
            participants: doc.participants.iter().map(|p| p.code.as_str().to_string()).collect(),
            episode_count: doc.episodes.len(),
            utterance_count: doc.utterance_count(),
            diagnostics: chat::validate(doc),
            utterance_id: None,
            span: None,
        }
    }
}

/// Utterance ids are `{occasion}:{document-wide index}`.
pub fn utterance_id(occasion_id: &str, index: usize) -> String {
    format!("{occasion_id}:{index}")
}

fn parse_utterance_id(id: &str) -> ApiResult<(String, usize)> {
    id.rsplit_once(':')
        .and_then(|(o, i)| Some((o.to_string(), i.parse().ok()?)))
        .ok_or_else(|| ApiError::bad_request(format!("utterance id {id:?} must be occasion:index")))
}

/// Applies an edit through the occasion's writer slot and persists the
/// result at the next revision.
async fn edit<F>(state: &SharedState, occasion_id: String, expected: Option<u64>, f: F) -> ApiResult<DocumentSummary>
where
    F: FnOnce(&ChatDocument) -> Result<ChatDocument, Diagnostic> + Send + 'static,
{
    let _writer = state.writer(&occasion_id).await;
    state
        .run(move |store| {
            let (meta, doc, revision) = store.occasion(&occasion_id)?;
            if let Some(e) = expected.filter(|e| *e != revision) {
                return Err(conflict(&format!("occasion {occasion_id}"), e, revision));
            }
            let next = f(&doc)?;
            let revision = store.put_occasion(&meta, &next, revision)?;
            Ok(DocumentSummary::of(&meta, &next, revision))
        })
        .await
}

pub async fn show(State(state): State<SharedState>, ApiPath(o): ApiPath<String>) -> ApiResult<Json<DocumentSummary>> {
    let summary = state
        .run(move |store| {
            let (meta, doc, revision) = store.occasion(&o)?;
            Ok(DocumentSummary::of(&meta, &doc, revision))
        })
        .await?;
    Ok(Json(summary))
}

fn default_terminator() -> String {
    ".".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendUtterance {
    speaker: String,
    text: String,
    #[serde(default = "default_terminator")]
    terminator: String,
    #[serde(default)]
    span: Option<TimeSpan>,
    /// Time the utterance with the session's active loop span.
    #[serde(default)]
    use_loop_span: bool,
    #[serde(default)]
    expected_revision: Option<u64>,
}

pub async fn append(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<AppendUtterance>,
) -> ApiResult<(StatusCode, Json<DocumentSummary>)> {
    let span = match (req.use_loop_span, req.span) {
        (true, Some(_)) => return Err(ApiError::bad_request("give either span or use_loop_span")),
        (true, None) => Some(loop_span(&state, &headers, &o)?),
        (false, span) => span,
    };
    let mut summary = edit(&state, o.clone(), req.expected_revision, move |doc| {
        append_utterance(doc, &req.speaker, &req.text, &req.terminator, span)
    })
    .await?;
    summary.utterance_id = Some(utterance_id(&o, summary.utterance_count - 1));
    summary.span = span;
    Ok((StatusCode::CREATED, Json(summary)))
}

/// Span of the session's active loop on `occasion_id`.
pub(crate) fn loop_span(state: &SharedState, headers: &HeaderMap, occasion_id: &str) -> ApiResult<TimeSpan> {
    let session = optional_session(state, headers)?;
    session
        .and_then(|s| state.active_loop(&s, occasion_id))
        .map(|l| l.state.span())
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "NO_LOOP", format!("no active loop on occasion {occasion_id}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachTier {
    code: String,
    content: String,
    #[serde(default)]
    expected_revision: Option<u64>,
}

pub async fn attach(
    State(state): State<SharedState>,
    ApiPath(u): ApiPath<String>,
    ApiJson(req): ApiJson<AttachTier>,
) -> ApiResult<(StatusCode, Json<DocumentSummary>)> {
    let (o, index) = parse_utterance_id(&u)?;
    let mut summary = edit(&state, o, req.expected_revision, move |doc| attach_tier(doc, index, &req.code, &req.content)).await?;
    summary.utterance_id = Some(u);
    Ok((StatusCode::CREATED, Json(summary)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewEpisode {
    #[serde(default)]
    headers: Vec<Header>,
    /// Registered place whose setting headers open the episode.
    #[serde(default)]
    place_id: Option<String>,
    #[serde(default)]
    expected_revision: Option<u64>,
}

pub async fn episode(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    ApiJson(req): ApiJson<NewEpisode>,
) -> ApiResult<(StatusCode, Json<DocumentSummary>)> {
    let mut headers = match req.place_id {
        Some(place) => state.run(move |store| Ok(store.place(&place)?.headers())).await?,
        None => Vec::new(),
    };
    headers.extend(req.headers);
    let summary = edit(&state, o, req.expected_revision, move |doc| new_episode(doc, headers)).await?;
    Ok((StatusCode::CREATED, Json(summary)))
}

pub async fn view(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    ApiJson(criteria): ApiJson<ViewCriteria>,
) -> ApiResult<Json<TranscriptView>> {
    let view = state
        .run(move |store| {
            let (_, doc, _) = store.occasion(&o)?;
            Ok(filter_view(&doc, &criteria)?)
        })
        .await?;
    Ok(Json(view))
}

#[derive(Serialize)]
pub struct ValidationView {
    occasion_id: String,
    revision: u64,
    diagnostics: Vec<Diagnostic>,
}

pub async fn validate(State(state): State<SharedState>, ApiPath(o): ApiPath<String>) -> ApiResult<Json<ValidationView>> {
    let view = state
        .run(move |store| {
            let (meta, doc, revision) = store.occasion(&o)?;
            Ok(ValidationView { occasion_id: meta.id, revision, diagnostics: chat::validate(&doc) })
        })
        .await?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportQuery {
    format: String,
}

/// `chat`: the transcript with every index event merged. `sla-xml`: the
/// stored document, verbatim.
pub async fn export(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    ApiQuery(q): ApiQuery<ExportQuery>,
) -> ApiResult<Response> {
    let (body, content_type, extension) = match q.format.as_str() {
        "chat" | "cha" => {
            let occasion = o.clone();
            let text = state
                .run(move |store| {
                    let (_, doc, _) = store.occasion(&occasion)?;
                    let (events, _) = store.events(&occasion)?;
                    Ok(serialize_chat(&merge_events_into_transcript(&doc, &events)))
                })
                .await?;
            (text, "text/plain; charset=utf-8", "cha")
        }
        "sla-xml" | "xml" => {
            let occasion = o.clone();
            let text = state.run(move |store| Ok(store.occasion_xml(&occasion)?)).await?;
            (text, "application/xml; charset=utf-8", "xml")
        }
        other => return Err(ApiError::bad_request(format!("unknown export format {other:?}; use chat or sla-xml"))),
    };
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{o}.{extension}\""))
        .map_err(|_| ApiError::bad_request("occasion id is not a valid file name"))?;
    Ok((
        [(header::CONTENT_TYPE, HeaderValue::from_static(content_type)), (header::CONTENT_DISPOSITION, disposition)],
        body,
    )
        .into_response())
}
