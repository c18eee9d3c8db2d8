use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use sla_core::report::{code_location_report, coverage_report, effort_estimate, render_timeline_svg};

use super::{require_media, require_occasion, ApiPath, ApiQuery};
use crate::error::ApiError;
use crate::state::{ApiResult, SharedState};

const DEFAULT_SVG_WIDTH: u32 = 800;
const SVG: &str = "image/svg+xml";

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ReportQuery {
    /// `json` or `svg`; otherwise chosen from the Accept header.
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    width: Option<u32>,
    /// Effort only: record length in minutes instead of the media length.
    #[serde(default)]
    minutes: Option<f64>,
}

enum Format {
    Json,
    Svg,
}

fn format(q: &ReportQuery, headers: &HeaderMap) -> ApiResult<Format> {
    match q.format.as_deref() {
        Some("json") => Ok(Format::Json),
        Some("svg") => Ok(Format::Svg),
        Some(other) => Err(ApiError::bad_request(format!("unknown report format {other:?}; use json or svg"))),
        None => {
            let accept = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()).unwrap_or("");
            Ok(if accept.contains(SVG) && !accept.contains("application/json") { Format::Svg } else { Format::Json })
        }
    }
}

fn svg(body: String) -> Response {
    ([(header::CONTENT_TYPE, HeaderValue::from_static(SVG))], body).into_response()
}

/// `coverage`, `locations` or `effort`, computed from committed state.
pub async fn report(
    State(state): State<SharedState>,
    ApiPath((o, kind)): ApiPath<(String, String)>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<ReportQuery>,
) -> ApiResult<Response> {
    let format = format(&q, &headers)?;
    let width = q.width.unwrap_or(DEFAULT_SVG_WIDTH);
    match kind.as_str() {
        "coverage" | "locations" => {
            let occasion = o.clone();
            let (duration_ms, events) = state
                .run(move |store| {
                    let media = require_media(store, &occasion)?;
                    Ok((media.duration_ms, store.events(&occasion)?.0))
                })
                .await?;
            if kind == "coverage" {
                let report = coverage_report(&o, duration_ms, &events)?;
                Ok(match format {
                    Format::Json => Json(report).into_response(),
                    Format::Svg => svg(render_timeline_svg(&report, width)),
                })
            } else {
                let report = code_location_report(&o, duration_ms, &events)?;
                Ok(match format {
                    Format::Json => Json(report).into_response(),
                    Format::Svg => svg(render_timeline_svg(&report, width)),
                })
            }
        }
        "effort" => {
            let minutes = match q.minutes {
                Some(m) => {
                    state.run(move |store| require_occasion(store, &o)).await?;
                    m
                }
                None => {
                    let info = state.run(move |store| require_media(store, &o)).await?;
                    info.duration_ms as f64 / 60_000.0
                }
            };
            let estimate = effort_estimate(minutes)?;
            match format {
                Format::Json => Ok(Json(estimate).into_response()),
                Format::Svg => Err(ApiError::bad_request("the effort report has no SVG form")),
            }
        }
        other => Err(ApiError::not_found(format!("report kind {other:?}"))),
    }
}
