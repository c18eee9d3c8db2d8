//! CHAT transcripts: a line-oriented subset of the CHILDES transcription
//! format.
//!
//! A transcript is framed by `@Begin` / `@End`. Header lines start with `@`,
//! mainlines with `*` plus a three character participant code, and dependent
//! tiers with `%` plus a three character lowercase code. Time alignment is
//! carried by a `%tim` tier and system-network index selections by `%ind`.
//!
//! Documents are immutable values. Every editing operation returns a new
//! document and refuses to produce one that fails [`validate`].

mod diagnostic;
mod edit;
mod model;
mod parse;
mod serialize;
pub mod sla_xml;
mod validate;
mod view;

pub use diagnostic::{DiagCode, Diagnostic, Severity};
pub use edit::{append_utterance, attach_tier, new_episode};
pub use model::{
    Age, AgeError, ChatDocument, DependentTier, Episode, Header, IndexTag, Participant, ParticipantCode,
    TierCode, Terminator, Utterance,
};
pub use parse::{lint_chat, parse_chat, parse_chat_bytes};
pub use serialize::serialize_chat;
pub use sla_xml::{from_sla_element, from_sla_xml, to_sla_element, to_sla_xml, OccasionMeta};
pub use validate::validate;
pub use view::{filter_view, LineOrigin, TranscriptView, ViewCriteria, ViewLine};
pub(crate) use model::is_ident as is_ident_name;
