//! System networks, selections and index events.

mod entry;
mod event;
mod merge;
mod network;
mod selection;

use thiserror::Error;

use crate::span::TimeSpan;

pub use entry::{EntryCondition, OptionRef};
pub use event::{record_index_event, EventDraft, IndexEvent};
pub use merge::merge_events_into_transcript;
pub use network::{NetworkVersion, System, SystemNetwork};
pub use selection::{enumerate_valid_selections, is_valid_selection, validate_selection, Selection, Violation, DEFAULT_ENUMERATION_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("invalid name {0:?}")]
    BadName(String),
    #[error("system {0:?} declared twice")]
    DuplicateSystem(String),
    #[error("system {0:?} needs at least two options")]
    TooFewOptions(String),
    #[error("option {0:?} belongs to more than one system")]
    DuplicateOption(String),
    #[error("entry condition of {system:?} refers to unknown option {option:?}")]
    UnknownOptionRef { system: String, option: String },
    #[error("entry conditions form a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("versions must be numbered 1..=n without gaps")]
    VersionGap,
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("system {system:?} has no option {option:?}")]
    UnknownOption { system: String, option: String },
    #[error("network has {systems} systems, enumeration bound is {bound}")]
    BoundExceeded { systems: usize, bound: usize },
    #[error("selection violates entry conditions: {0:?}")]
    InvalidSelection(Vec<Violation>),
    #[error("selection is empty")]
    EmptySelection,
    #[error("span {span} exceeds occasion duration {duration_ms} ms")]
    SpanOutOfRange { span: TimeSpan, duration_ms: u64 },
    #[error("event cites version {cited}, checked against version {given}")]
    VersionMismatch { cited: u32, given: u32 },
}

/// The decision-making network: every move is an issue, an action or a
/// decision, and decisions are realised verbally or mentally.
pub fn decision_network_systems() -> Vec<System> {
    vec![
        System::new("MOVE", EntryCondition::True, &["issue", "action", "decision"]),
        System::new("REALISATION", EntryCondition::option("decision"), &["verbal", "mental"]),
    ]
}
