//! Structure-preserving edits. Each returns a new document and fails rather
//! than produce one with error diagnostics.

use super::diagnostic::{DiagCode, Diagnostic};
use super::model::{is_clean_text, ChatDocument, DependentTier, Episode, Header, IndexTag, TierCode, Terminator, Utterance};
use super::validate::validate;
use crate::span::TimeSpan;

fn reject(code: DiagCode, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, 0, message)
}

fn checked(doc: ChatDocument) -> Result<ChatDocument, Diagnostic> {
    match validate(&doc).into_iter().find(Diagnostic::is_error) {
        Some(err) => Err(err),
        None => Ok(doc),
    }
}

/// Appends an utterance to the last episode.
///
/// A span that starts before the preceding timed utterance is accepted; the
/// document then carries a W008 warning.
pub fn append_utterance(
    doc: &ChatDocument,
    speaker: &str,
    text: &str,
    terminator: &str,
    span: Option<TimeSpan>,
) -> Result<ChatDocument, Diagnostic> {
    let Some(participant) = doc.participant(speaker) else {
        return Err(reject(DiagCode::E003, format!("speaker {speaker:?} is not a declared participant")));
    };
    let Some(terminator) = Terminator::from_token(terminator.trim()) else {
        return Err(reject(DiagCode::E005, format!("terminator must be one of . ? ! (got {terminator:?})")));
    };
    let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if words.iter().any(|w| Terminator::from_token(w).is_some()) {
        return Err(reject(DiagCode::E005, "utterance text contains a second terminator"));
    }
    let utterance = Utterance {
        speaker: participant.code.clone(),
        words,
        terminator,
        span,
        tiers: Vec::new(),
    };
    let mut next = doc.clone();
    if next.episodes.is_empty() {
        next.episodes.push(Episode::default());
    }
    next.episodes.last_mut().expect("episode exists").utterances.push(utterance);
    checked(next)
}

/// Appends a dependent tier to the utterance at a document-wide index.
pub fn attach_tier(
    doc: &ChatDocument,
    utterance_index: usize,
    code: &str,
    content: &str,
) -> Result<ChatDocument, Diagnostic> {
    let Some(code) = TierCode::parse(code) else {
        return Err(reject(DiagCode::E004, format!("tier code {code:?} must be three lowercase letters")));
    };
    if code.as_str() == TierCode::TIME {
        return Err(reject(DiagCode::E004, "%tim is reserved for the utterance span"));
    }
    let content = content.trim();
    if !is_clean_text(content) {
        return Err(reject(DiagCode::E004, "tier content must be a non-empty single line"));
    }
    if code.as_str() == TierCode::INDEX && content.parse::<IndexTag>().is_err() {
        return Err(reject(DiagCode::E004, "malformed %ind tier"));
    }
    let mut next = doc.clone();
    let count = doc.utterance_count();
    let Some(utterance) = next.utterance_mut(utterance_index) else {
        return Err(reject(
            DiagCode::E009,
            format!("utterance {utterance_index} does not exist ({count} utterances)"),
        ));
    };
    utterance.tiers.push(DependentTier::new(code, content));
    checked(next)
}

/// Opens a new episode; `@New Episode` is inserted ahead of `headers`.
pub fn new_episode(doc: &ChatDocument, headers: Vec<Header>) -> Result<ChatDocument, Diagnostic> {
    if let Some(bad) = headers.iter().find(|h| !h.is_changeable() || **h == Header::NewEpisode) {
        return Err(reject(DiagCode::E007, format!("@{} cannot open an episode", bad.chat_name())));
    }
    let mut changeable_headers = Vec::with_capacity(headers.len() + 1);
    changeable_headers.push(Header::NewEpisode);
    changeable_headers.extend(headers);
    let mut next = doc.clone();
    next.episodes.push(Episode { changeable_headers, utterances: Vec::new() });
    checked(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::{parse_chat, serialize_chat};

    fn base() -> ChatDocument {
        parse_chat("@Begin\n@Participants:\tROD Rodney Analyst\n*ROD:\tso we agree .\n@End\n").unwrap()
    }

    #[test]
    fn append_keeps_original() {
        let doc = base();
        let next = append_utterance(&doc, "ROD", "fine", ".", None).unwrap();
        assert_eq!(next.utterance_count(), 2);
        assert_eq!(doc.utterance_count(), 1);
        assert!(validate(&next).is_empty());
    }

    #[test]
    fn append_rejects_bad_input() {
        let doc = base();
        assert_eq!(append_utterance(&doc, "XYZ", "hi", ".", None).unwrap_err().code, DiagCode::E003);
        assert_eq!(append_utterance(&doc, "ROD", "hi", ",", None).unwrap_err().code, DiagCode::E005);
        assert_eq!(append_utterance(&doc, "ROD", "hi .", ".", None).unwrap_err().code, DiagCode::E005);
    }

    #[test]
    fn append_with_span_serializes_tim() {
        let span = TimeSpan::new(1000, 2000).unwrap();
        let next = append_utterance(&base(), "ROD", "why", "?", Some(span)).unwrap();
        let text = serialize_chat(&next);
        assert!(text.contains("*ROD:\twhy ?\n%tim:\t1000_2000\n"));
        assert_eq!(parse_chat(&text).unwrap(), next);
    }

    #[test]
    fn backwards_span_is_accepted_with_warning() {
        let a = append_utterance(&base(), "ROD", "one", ".", Some(TimeSpan::new(5000, 6000).unwrap())).unwrap();
        let b = append_utterance(&a, "ROD", "two", ".", Some(TimeSpan::new(1000, 2000).unwrap())).unwrap();
        let diags = validate(&b);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::W008);
    }

    #[test]
    fn tiers() {
        let doc = base();
        let next = attach_tier(&doc, 0, "com", "laughter").unwrap();
        assert_eq!(next.episodes[0].utterances[0].tiers.len(), 1);
        assert_eq!(attach_tier(&doc, 0, "COM", "x").unwrap_err().code, DiagCode::E004);
        assert_eq!(attach_tier(&doc, 7, "com", "x").unwrap_err().code, DiagCode::E009);
        assert_eq!(attach_tier(&doc, 0, "tim", "0_1").unwrap_err().code, DiagCode::E004);
        assert_eq!(attach_tier(&doc, 0, "ind", "nope").unwrap_err().code, DiagCode::E004);
        assert_eq!(attach_tier(&doc, 0, "com", " \n ").unwrap_err().code, DiagCode::E004);
    }

    #[test]
    fn episodes() {
        let doc = base();
        let next = new_episode(&doc, vec![Header::Situation("kickoff meeting".into())]).unwrap();
        assert_eq!(next.episodes.len(), 2);
        assert!(serialize_chat(&next).contains("@Situation:\tkickoff meeting"));
        let bare = new_episode(&doc, vec![]).unwrap();
        assert_eq!(bare.episodes[1].changeable_headers, vec![Header::NewEpisode]);
        assert!(new_episode(&doc, vec![Header::Comment("x".into())]).is_err());
        assert!(new_episode(&doc, vec![Header::Situation(" padded".into())]).is_err());
    }
}
