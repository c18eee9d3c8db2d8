//! Indexing reports: coverage, code locations, effort estimates and SVG
//! timelines.

mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::IndexEvent;
use crate::span::TimeSpan;

pub use svg::{render_timeline_svg, Lane, LaneSpan, Timeline, MIN_TIMELINE_WIDTH};

/// Transcription takes four to five times the length of the record.
pub const TRANSCRIPTION_FACTOR: (f64, f64) = (4.0, 5.0);
/// Indexing takes a fifth to a quarter of the transcription time.
pub const INDEXING_DIVISOR: (f64, f64) = (5.0, 4.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("occasion duration is zero")]
    ZeroDuration,
    #[error("event {event_id} span {span} exceeds occasion duration {duration_ms} ms")]
    SpanOutOfRange { event_id: String, span: TimeSpan, duration_ms: u64 },
    #[error("record length must be a positive number of minutes, got {0}")]
    NonPositiveMinutes(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCoverage {
    pub network_id: String,
    pub covered_ms: u64,
    pub coverage_ratio: f64,
    /// Disjoint, ascending union of this network's event spans.
    pub spans: Vec<TimeSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub occasion_id: String,
    pub duration_ms: u64,
    pub covered_ms: u64,
    pub coverage_ratio: f64,
    /// Disjoint, ascending union of all event spans.
    pub spans: Vec<TimeSpan>,
    pub networks: Vec<NetworkCoverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeLocation {
    pub event_id: String,
    pub span: TimeSpan,
    pub relative_start: f64,
    pub relative_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationReport {
    pub occasion_id: String,
    pub duration_ms: u64,
    /// Keyed by `SYSTEM:option`; locations sorted by span.
    pub codes: BTreeMap<String, Vec<CodeLocation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinuteRange {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortEstimate {
    pub record_minutes: f64,
    pub transcription_minutes: MinuteRange,
    pub indexing_minutes: MinuteRange,
}

/// Length of the union of `spans`, with the disjoint union itself.
pub fn span_union(spans: impl IntoIterator<Item = TimeSpan>) -> (u64, Vec<TimeSpan>) {
    let mut sorted: Vec<TimeSpan> = spans.into_iter().collect();
    sorted.sort();
    let mut merged: Vec<(u64, u64)> = Vec::new();
    for span in sorted {
        match merged.last_mut() {
            Some(last) if span.start_ms() <= last.1 => last.1 = last.1.max(span.end_ms()),
            _ => merged.push((span.start_ms(), span.end_ms())),
        }
    }
    let total = merged.iter().map(|(s, e)| e - s).sum();
    let spans = merged.into_iter().map(|(s, e)| TimeSpan::new(s, e).expect("merged spans are non-empty")).collect();
    (total, spans)
}

fn check_spans(duration_ms: u64, events: &[IndexEvent]) -> Result<(), ReportError> {
    if duration_ms == 0 {
        return Err(ReportError::ZeroDuration);
    }
    match events.iter().find(|e| e.span.end_ms() > duration_ms) {
        Some(e) => Err(ReportError::SpanOutOfRange { event_id: e.event_id.clone(), span: e.span, duration_ms }),
        None => Ok(()),
    }
}

pub fn coverage_report(occasion_id: &str, duration_ms: u64, events: &[IndexEvent]) -> Result<CoverageReport, ReportError> {
    check_spans(duration_ms, events)?;
    let ratio = |covered: u64| covered as f64 / duration_ms as f64;
    let (covered_ms, spans) = span_union(events.iter().map(|e| e.span));
    let mut by_network: BTreeMap<&str, Vec<TimeSpan>> = BTreeMap::new();
    for event in events {
        by_network.entry(&event.network_id).or_default().push(event.span);
    }
    let networks = by_network
        .into_iter()
        .map(|(id, spans)| {
            let (covered, spans) = span_union(spans);
            NetworkCoverage { network_id: id.to_string(), covered_ms: covered, coverage_ratio: ratio(covered), spans }
        })
        .collect();
    Ok(CoverageReport {
        occasion_id: occasion_id.to_string(),
        duration_ms,
        covered_ms,
        coverage_ratio: ratio(covered_ms),
        spans,
        networks,
    })
}

pub fn code_location_report(occasion_id: &str, duration_ms: u64, events: &[IndexEvent]) -> Result<LocationReport, ReportError> {
    check_spans(duration_ms, events)?;
    let mut codes: BTreeMap<String, Vec<CodeLocation>> = BTreeMap::new();
    for event in events {
        for (system, option) in event.selection.iter() {
            codes.entry(format!("{system}:{option}")).or_default().push(CodeLocation {
                event_id: event.event_id.clone(),
                span: event.span,
                relative_start: event.span.start_ms() as f64 / duration_ms as f64,
                relative_end: event.span.end_ms() as f64 / duration_ms as f64,
            });
        }
    }
    for locations in codes.values_mut() {
        locations.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.event_id.cmp(&b.event_id)));
    }
    Ok(LocationReport { occasion_id: occasion_id.to_string(), duration_ms, codes })
}

/// Interval estimate of transcription and indexing time for a record of
/// `record_minutes`, pairing low with low and high with high.
pub fn effort_estimate(record_minutes: f64) -> Result<EffortEstimate, ReportError> {
    if !(record_minutes.is_finite() && record_minutes > 0.0) {
        return Err(ReportError::NonPositiveMinutes(record_minutes));
    }
    let transcription = MinuteRange {
        low: TRANSCRIPTION_FACTOR.0 * record_minutes,
        high: TRANSCRIPTION_FACTOR.1 * record_minutes,
    };
    let indexing = MinuteRange {
        low: transcription.low / INDEXING_DIVISOR.0,
        high: transcription.high / INDEXING_DIVISOR.1,
    };
    Ok(EffortEstimate { record_minutes, transcription_minutes: transcription, indexing_minutes: indexing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Selection;
    use chrono::{TimeZone, Utc};

    fn event(id: &str, network: &str, pairs: &[(&str, &str)], start: u64, end: u64) -> IndexEvent {
        IndexEvent {
            event_id: id.into(),
            occasion_id: "o1".into(),
            network_id: network.into(),
            network_version: 1,
            selection: Selection::from_pairs(pairs.iter().copied()).unwrap(),
            span: TimeSpan::new(start, end).unwrap(),
            note: None,
            author: "c1".into(),
            created_at: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    #[test]
    fn coverage_examples() {
        let events = [event("a", "dm", &[("MOVE", "issue")], 0, 100_000), event("b", "dm", &[("MOVE", "action")], 50_000, 200_000)];
        let report = coverage_report("o1", 600_000, &events).unwrap();
        assert_eq!(report.covered_ms, 200_000);
        assert_eq!(report.coverage_ratio, 200_000.0 / 600_000.0);
        assert_eq!(report.spans, [TimeSpan::new(0, 200_000).unwrap()]);
        assert_eq!(report.networks.len(), 1);

        let empty = coverage_report("o1", 600_000, &[]).unwrap();
        assert_eq!((empty.covered_ms, empty.coverage_ratio), (0, 0.0));
        assert!(empty.networks.is_empty());

        let late = [event("z", "dm", &[("MOVE", "issue")], 500_000, 700_000)];
        assert!(matches!(coverage_report("o1", 600_000, &late), Err(ReportError::SpanOutOfRange { .. })));
        assert_eq!(coverage_report("o1", 0, &[]), Err(ReportError::ZeroDuration));
    }

    #[test]
    fn location_examples() {
        let events = [
            event("b", "dm", &[("MOVE", "decision"), ("REALISATION", "verbal")], 300_000, 310_000),
            event("a", "dm", &[("MOVE", "decision")], 120_000, 126_000),
        ];
        let report = code_location_report("o1", 600_000, &events).unwrap();
        let decision = &report.codes["MOVE:decision"];
        assert_eq!(decision.len(), 2);
        assert_eq!(decision[0].span, TimeSpan::new(120_000, 126_000).unwrap());
        assert_eq!((decision[0].relative_start, decision[0].relative_end), (0.2, 0.21));
        assert!(!report.codes.contains_key("MOVE:issue"));
        assert_eq!(report.codes.len(), 2);
        assert_eq!(code_location_report("o1", 0, &[]), Err(ReportError::ZeroDuration));
    }

    #[test]
    fn effort_examples() {
        let e = effort_estimate(60.0).unwrap();
        assert_eq!(e.transcription_minutes, MinuteRange { low: 240.0, high: 300.0 });
        assert_eq!(e.indexing_minutes, MinuteRange { low: 48.0, high: 75.0 });
        let one = effort_estimate(1.0).unwrap();
        assert_eq!(one.transcription_minutes, MinuteRange { low: 4.0, high: 5.0 });
        assert_eq!(one.indexing_minutes, MinuteRange { low: 0.8, high: 1.25 });
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(effort_estimate(bad).is_err());
        }
    }
}
