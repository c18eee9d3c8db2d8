use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use sla_core::media::{self, encode_wav, pyramid_level_count, query_peaks, LoopError, LoopState, LoopUpdate, Peak};
use sla_core::TimeSpan;
use sla_store::MediaInfo;

use super::{require_media, session, ApiJson, ApiPath, ApiQuery};
use crate::error::ApiError;
use crate::state::{ApiResult, LoopEntry, SharedState, WaveformJob};

const WAV: &str = "audio/wav";
const SPAN_START: HeaderName = HeaderName::from_static("x-span-start-ms");
const SPAN_END: HeaderName = HeaderName::from_static("x-span-end-ms");

#[derive(Serialize)]
pub struct IngestView {
    occasion_id: String,
    #[serde(flatten)]
    media: MediaInfo,
    base_bucket: u32,
    level_count: usize,
    waveform: &'static str,
}

/// Stores WAV bytes as the occasion's record and starts the sidecar build.
pub async fn ingest(State(state): State<SharedState>, ApiPath(o): ApiPath<String>, body: Bytes) -> ApiResult<(StatusCode, Json<IngestView>)> {
    let _writer = state.writer(&o).await;
    let occasion = o.clone();
    let (info, pcm) = state
        .run(move |store| {
            super::require_occasion(store, &occasion)?;
            Ok(store.put_media(&occasion, &body)?)
        })
        .await?;
    let base_bucket = state.config.base_bucket;
    let level_count = pyramid_level_count(info.total_samples, base_bucket);
    state.spawn_sidecar(o.clone(), info.sha256.clone(), pcm);
    Ok((
        StatusCode::CREATED,
        Json(IngestView { occasion_id: o, media: info, base_bucket, level_count, waveform: "pending" }),
    ))
}

pub async fn info(State(state): State<SharedState>, ApiPath(o): ApiPath<String>) -> ApiResult<Json<MediaInfo>> {
    Ok(Json(state.run(move |store| require_media(store, &o)).await?))
}

/// Raw media bytes for local playback.
pub async fn download(State(state): State<SharedState>, ApiPath(o): ApiPath<String>) -> ApiResult<Response> {
    let (info, bytes) = state
        .run(move |store| {
            let info = require_media(store, &o)?;
            Ok((info, store.media_bytes(&o)?))
        })
        .await?;
    let span = TimeSpan::new(0, info.duration_ms).ok();
    Ok(wav_response(bytes, span))
}

fn wav_response(bytes: Vec<u8>, span: Option<TimeSpan>) -> Response {
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(WAV));
    if let Some(span) = span {
        headers.insert(SPAN_START, span.start_ms().into());
        headers.insert(SPAN_END, span.end_ms().into());
    }
    (headers, bytes).into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformQuery {
    #[serde(default)]
    level: usize,
    #[serde(default)]
    from: usize,
    #[serde(default)]
    count: Option<usize>,
}

#[derive(Serialize)]
pub struct WaveformView {
    level: usize,
    level_count: usize,
    base_bucket: u32,
    bucket_samples: u64,
    sample_rate: u32,
    total_samples: u64,
    from: usize,
    peaks: Vec<Peak>,
}

/// Peaks from the persisted pyramid. WAVEFORM_PENDING until the background
/// build has finished.
pub async fn waveform(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    ApiQuery(q): ApiQuery<WaveformQuery>,
) -> ApiResult<Json<WaveformView>> {
    let occasion = o.clone();
    let (info, cache) = state
        .run(move |store| {
            let info = require_media(store, &occasion)?;
            Ok((info, store.sidecar(&occasion)?))
        })
        .await?;
    let Some(cache) = cache else {
        return Err(match state.job(&info.sha256) {
            Some(WaveformJob::Failed(message)) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "WAVEFORM_FAILED", message),
            Some(WaveformJob::Pending) => pending(),
            _ => {
                let occasion = o.clone();
                let pcm = state.run(move |store| Ok(store.media_pcm(&occasion)?)).await?;
                state.spawn_sidecar(o, info.sha256, pcm);
                pending()
            }
        });
    };
    let peaks = query_peaks(&cache, q.level, q.from, q.count.unwrap_or(usize::MAX))?.to_vec();
    Ok(Json(WaveformView {
        level: q.level,
        level_count: cache.level_count(),
        base_bucket: cache.base_bucket,
        bucket_samples: cache.bucket_samples(q.level),
        sample_rate: cache.sample_rate,
        total_samples: cache.total_samples,
        from: q.from,
        peaks,
    }))
}

fn pending() -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "WAVEFORM_PENDING", "waveform is still being built")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcerptQuery {
    start_ms: u64,
    end_ms: u64,
}

/// Audio for a span, with the span echoed in headers.
pub async fn occasion_excerpt(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    ApiQuery(q): ApiQuery<ExcerptQuery>,
) -> ApiResult<Response> {
    let span = TimeSpan::new(q.start_ms, q.end_ms).map_err(|e| ApiError::bad_request(e.to_string()))?;
    cut(&state, o, span).await
}

async fn cut(state: &SharedState, occasion_id: String, span: TimeSpan) -> ApiResult<Response> {
    let excerpt = state
        .run(move |store| {
            require_media(store, &occasion_id)?;
            let pcm = store.media_pcm(&occasion_id)?;
            Ok(media::excerpt(&pcm, span)?)
        })
        .await?;
    Ok(wav_response(encode_wav(&excerpt.audio), Some(excerpt.span)))
}

/// A loop as reported to clients. `span` is the region to play next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopView {
    pub loop_id: String,
    pub occasion_id: String,
    pub start_ms: u64,
    pub duration_ms: u64,
    pub offset_ms: u64,
    pub media_duration_ms: u64,
    pub at_end: bool,
    pub span: TimeSpan,
}

impl LoopView {
    pub fn of(entry: &LoopEntry) -> LoopView {
        let s = &entry.state;
        LoopView {
            loop_id: entry.loop_id.clone(),
            occasion_id: entry.occasion_id.clone(),
            start_ms: s.start_ms(),
            duration_ms: s.duration_ms(),
            offset_ms: s.offset_ms(),
            media_duration_ms: s.media_duration_ms(),
            at_end: s.at_end(),
            span: s.span(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateLoop {
    start_ms: u64,
    duration_ms: u64,
    offset_ms: u64,
}

/// Starts a loop over the occasion's media; it becomes the session's only
/// active loop.
pub async fn create_loop(
    State(state): State<SharedState>,
    ApiPath(o): ApiPath<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<CreateLoop>,
) -> ApiResult<(StatusCode, Json<LoopView>)> {
    let session = session(&state, &headers)?;
    let occasion = o.clone();
    let info = state.run(move |store| require_media(store, &occasion)).await?;
    let loop_state = media::create_loop(info.duration_ms, req.start_ms, req.duration_ms, req.offset_ms)?;
    let entry = state.install_loop(&session.session_id, &o, loop_state);
    Ok((StatusCode::CREATED, Json(LoopView::of(&entry))))
}

pub async fn show_loop(State(state): State<SharedState>, ApiPath(l): ApiPath<String>, headers: HeaderMap) -> ApiResult<Json<LoopView>> {
    let session = session(&state, &headers)?;
    Ok(Json(LoopView::of(&state.owned_loop(&session.session_id, &l)?)))
}

fn apply(state: &SharedState, entry: LoopEntry, next: Result<LoopState, LoopError>) -> ApiResult<Json<LoopView>> {
    match next {
        Ok(s) => {
            state.store_loop_state(&entry.loop_id, s);
            Ok(Json(LoopView::of(&LoopEntry { state: s, ..entry })))
        }
        Err(LoopError::AtEnd(s)) => {
            state.store_loop_state(&entry.loop_id, s);
            let view = LoopView::of(&LoopEntry { state: s, ..entry });
            Err(ApiError::from(LoopError::AtEnd(s)).with_details(view))
        }
        Err(e) => Err(e.into()),
    }
}

pub async fn advance_loop(State(state): State<SharedState>, ApiPath(l): ApiPath<String>, headers: HeaderMap) -> ApiResult<Json<LoopView>> {
    let session = session(&state, &headers)?;
    let entry = state.owned_loop(&session.session_id, &l)?;
    let next = media::advance_loop(&entry.state);
    apply(&state, entry, next)
}

/// Changes start, duration or offset at any time, including mid-playback.
pub async fn update_loop(
    State(state): State<SharedState>,
    ApiPath(l): ApiPath<String>,
    headers: HeaderMap,
    ApiJson(update): ApiJson<LoopUpdate>,
) -> ApiResult<Json<LoopView>> {
    let session = session(&state, &headers)?;
    let entry = state.owned_loop(&session.session_id, &l)?;
    let next = media::set_loop(&entry.state, update);
    apply(&state, entry, next)
}

pub async fn delete_loop(State(state): State<SharedState>, ApiPath(l): ApiPath<String>, headers: HeaderMap) -> ApiResult<StatusCode> {
    let session = session(&state, &headers)?;
    state.remove_loop(&session.session_id, &l)?;
    Ok(StatusCode::NO_CONTENT)
}

/// Audio of the loop's current region.
pub async fn loop_excerpt(State(state): State<SharedState>, ApiPath(l): ApiPath<String>, headers: HeaderMap) -> ApiResult<Response> {
    let session = session(&state, &headers)?;
    let entry = state.owned_loop(&session.session_id, &l)?;
    cut(&state, entry.occasion_id, entry.state.span()).await
}
