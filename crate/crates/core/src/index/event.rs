use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::network::NetworkVersion;
use super::selection::{validate_selection, Selection};
use super::IndexError;
use crate::chat::IndexTag;
use crate::span::TimeSpan;

/// A time-stamped selection. It pins the network version it was checked
/// against, so later revisions never reinterpret it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEvent {
    pub event_id: String,
    pub occasion_id: String,
    pub network_id: String,
    pub network_version: u32,
    pub selection: Selection,
    pub span: TimeSpan,
    pub note: Option<String>,
    /// Contact id of the analyst.
    pub author: String,
    pub created_at: DateTime<Utc>,
}

/// Caller-supplied part of an event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDraft {
    pub occasion_id: String,
    pub network_id: String,
    pub network_version: u32,
    pub selection: Selection,
    pub span: TimeSpan,
    pub note: Option<String>,
    pub author: String,
}

/// Checks a draft against the version it cites and the occasion length.
pub fn record_index_event(
    draft: EventDraft,
    version: &NetworkVersion,
    occasion_duration_ms: u64,
    event_id: String,
    created_at: DateTime<Utc>,
) -> Result<IndexEvent, IndexError> {
    if draft.network_version != version.version() {
        return Err(IndexError::VersionMismatch { cited: draft.network_version, given: version.version() });
    }
    if draft.selection.is_empty() {
        return Err(IndexError::EmptySelection);
    }
    let violations = validate_selection(version, &draft.selection)?;
    if !violations.is_empty() {
        return Err(IndexError::InvalidSelection(violations));
    }
    if draft.span.end_ms() > occasion_duration_ms {
        return Err(IndexError::SpanOutOfRange { span: draft.span, duration_ms: occasion_duration_ms });
    }
    Ok(IndexEvent {
        event_id,
        occasion_id: draft.occasion_id,
        network_id: draft.network_id,
        network_version: draft.network_version,
        selection: draft.selection,
        span: draft.span,
        note: draft.note,
        author: draft.author,
        created_at,
    })
}

impl IndexEvent {
    /// The transcript form of this event.
    pub fn tag(&self) -> IndexTag {
        IndexTag {
            network: self.network_id.clone(),
            version: self.network_version,
            choices: self.selection.iter().map(|(s, o)| (s.to_string(), o.to_string())).collect(),
            span: self.span,
        }
    }
}
