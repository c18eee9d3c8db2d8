//! Core engine for spoken-language resources: CHAT transcription and coding,
//! looped media playback with waveform peak caches, versioned system-network
//! indexing, and indexing reports.

pub mod chat;
pub mod index;
pub mod media;
pub mod report;
pub mod span;
pub mod xml;

pub use span::{SpanError, TimeSpan};
