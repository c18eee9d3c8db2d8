use super::event::IndexEvent;
use crate::chat::{ChatDocument, DependentTier, TierCode};

/// Writes index events into a transcript.
///
/// Each event becomes a `%ind` tier on every timed utterance its span
/// overlaps. An event that overlaps no utterance is kept as a standalone
/// `@Index` record instead, so nothing is dropped. Merging an event that is
/// already present adds nothing.
pub fn merge_events_into_transcript(doc: &ChatDocument, events: &[IndexEvent]) -> ChatDocument {
    let mut merged = doc.clone();
    let code = TierCode::parse(TierCode::INDEX).expect("valid tier code");
    for event in events {
        let tag = event.tag();
        let content = tag.to_string();
        let mut matched = false;
        for utterance in merged.episodes.iter_mut().flat_map(|e| e.utterances.iter_mut()) {
            if !utterance.span.is_some_and(|s| s.overlaps(&event.span)) {
                continue;
            }
            matched = true;
            if !utterance.tiers.iter().any(|t| t.code == code && t.content == content) {
                utterance.tiers.push(DependentTier::new(code.clone(), content.clone()));
            }
        }
        if !matched && !merged.index_notes.contains(&tag) {
            merged.index_notes.push(tag);
        }
    }
    merged
}
