use std::collections::HashSet;

use super::diagnostic::{sort_diagnostics, DiagCode, Diagnostic};
use super::model::{is_clean_text, is_name_token, is_role_text, is_word, ChatDocument, Header, IndexTag, TierCode};
use super::serialize::render_lines;
use super::view::LineOrigin;

/// Checks a document against the validation table.
///
/// Line numbers refer to the document's canonical serialization. Output is
/// ordered by line then code and depends only on the document.
pub fn validate(doc: &ChatDocument) -> Vec<Diagnostic> {
    let lines = render_lines(doc);
    let line_of = |origin: &LineOrigin| -> usize {
        lines.iter().position(|l| &l.origin == origin).map_or(0, |i| i + 1)
    };
    let mut diags = Vec::new();
    let mut emit = |code, origin: LineOrigin, message: String| {
        diags.push(Diagnostic::new(code, line_of(&origin), message));
    };

    if doc.participants.is_empty() {
        emit(DiagCode::E002, LineOrigin::Participants, "no participant declared".into());
    }
    let mut codes = HashSet::new();
    for (i, p) in doc.participants.iter().enumerate() {
        if !codes.insert(&p.code) {
            emit(DiagCode::E007, LineOrigin::Participants, format!("participant {} declared twice", p.code));
        }
        if !is_name_token(&p.name) || !is_role_text(&p.role) {
            emit(DiagCode::E007, LineOrigin::Participants, format!("malformed entry for {}", p.code));
        }
        let bad_text = |v: &Option<String>| v.as_deref().is_some_and(|v| !is_clean_text(v));
        if bad_text(&p.ses) || bad_text(&p.sex) {
            emit(
                DiagCode::E007,
                LineOrigin::ParticipantDetail { participant: i },
                format!("malformed header value for {}", p.code),
            );
        }
    }

    for (i, header) in doc.constant_headers.iter().enumerate() {
        let origin = LineOrigin::ConstantHeader { header: i };
        if header.is_changeable() {
            emit(DiagCode::E007, origin, format!("@{} is not a constant header", header.chat_name()));
        } else if !header.is_well_formed() {
            emit(DiagCode::E007, origin, format!("malformed @{}", header.chat_name()));
        }
    }

    if doc.episodes.is_empty() {
        emit(DiagCode::E001, LineOrigin::End, "document has no episode".into());
    }
    let mut last_start: Option<u64> = None;
    for (e, episode) in doc.episodes.iter().enumerate() {
        for (h, header) in episode.changeable_headers.iter().enumerate() {
            let origin = LineOrigin::EpisodeHeader { episode: e, header: h };
            let opens = e > 0 && h == 0;
            if !header.is_changeable() {
                emit(DiagCode::E007, origin, format!("@{} cannot appear in an episode", header.chat_name()));
            } else if !header.is_well_formed() {
                emit(DiagCode::E007, origin, format!("malformed @{}", header.chat_name()));
            } else if (*header == Header::NewEpisode) != opens {
                emit(DiagCode::E007, origin, "@New Episode must open every episode after the first".into());
            }
        }
        if e > 0 && episode.changeable_headers.is_empty() {
            let origin = match episode.utterances.is_empty() {
                true => LineOrigin::End,
                false => LineOrigin::Mainline { episode: e, utterance: 0 },
            };
            emit(DiagCode::E007, origin, "episode is missing its @New Episode header".into());
        }

        for (u, utt) in episode.utterances.iter().enumerate() {
            let mainline = LineOrigin::Mainline { episode: e, utterance: u };
            if !codes.contains(&utt.speaker) && !doc.participants.is_empty() {
                emit(DiagCode::E003, mainline.clone(), format!("speaker {} is not a declared participant", utt.speaker));
            }
            if !utt.words.iter().all(|w| is_word(w)) {
                emit(DiagCode::E005, mainline.clone(), "utterance words must not contain terminators or whitespace".into());
            }
            if let Some(span) = utt.span {
                if last_start.is_some_and(|prev| span.start_ms() < prev) {
                    emit(
                        DiagCode::W008,
                        LineOrigin::Time { episode: e, utterance: u },
                        format!("span {span} starts before the preceding timed utterance"),
                    );
                }
                last_start = Some(span.start_ms());
            }
            for (t, tier) in utt.tiers.iter().enumerate() {
                let origin = LineOrigin::Tier { episode: e, utterance: u, tier: t };
                let message = match tier.code.as_str() {
                    TierCode::TIME => Some("timing must be carried by the utterance span"),
                    _ if !is_clean_text(&tier.content) => Some("tier content must be a non-empty single line"),
                    TierCode::INDEX if tier.content.parse::<IndexTag>().is_err() => Some("malformed %ind tier"),
                    _ => None,
                };
                if let Some(message) = message {
                    emit(DiagCode::E004, origin, format!("%{}: {message}", tier.code));
                }
            }
        }
    }

    for (i, note) in doc.index_notes.iter().enumerate() {
        if !note.is_well_formed() {
            emit(DiagCode::E007, LineOrigin::IndexNote { note: i }, "malformed @Index record".into());
        }
    }

    sort_diagnostics(&mut diags);
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::{parse_chat, DependentTier, ParticipantCode, Utterance, Terminator};
    use crate::span::TimeSpan;

    fn base() -> ChatDocument {
        parse_chat("@Begin\n@Participants:\tROD Rodney Analyst\n*ROD:\tso we agree .\n@End\n").unwrap()
    }

    #[test]
    fn valid_document_is_clean() {
        assert!(validate(&base()).is_empty());
    }

    #[test]
    fn undeclared_speaker() {
        let mut doc = base();
        doc.episodes[0].utterances[0].speaker = ParticipantCode::parse("XYZ").unwrap();
        let diags = validate(&doc);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::E003);
        assert_eq!(diags[0].line, 3);
    }

    #[test]
    fn backwards_spans_warn() {
        let mut doc = base();
        let mut utt = doc.episodes[0].utterances[0].clone();
        doc.episodes[0].utterances[0].span = Some(TimeSpan::new(5000, 6000).unwrap());
        utt.span = Some(TimeSpan::new(1000, 2000).unwrap());
        doc.episodes[0].utterances.push(utt);
        let diags = validate(&doc);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::W008);
        assert!(!diags[0].is_error());
    }

    #[test]
    fn reserved_tiers_checked() {
        let mut doc = base();
        let tiers = &mut doc.episodes[0].utterances[0].tiers;
        tiers.push(DependentTier::new(TierCode::parse("tim").unwrap(), "0_10"));
        tiers.push(DependentTier::new(TierCode::parse("ind").unwrap(), "garbage"));
        let codes: Vec<_> = validate(&doc).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, [DiagCode::E004, DiagCode::E004]);
    }

    #[test]
    fn words_must_not_hold_terminators() {
        let mut doc = base();
        doc.episodes[0].utterances.push(Utterance {
            speaker: ParticipantCode::parse("ROD").unwrap(),
            words: vec!["a".into(), "?".into()],
            terminator: Terminator::Period,
            span: None,
            tiers: vec![],
        });
        assert_eq!(validate(&doc)[0].code, DiagCode::E005);
    }

    #[test]
    fn episode_structure() {
        let mut doc = base();
        doc.episodes.push(Default::default());
        assert_eq!(validate(&doc)[0].code, DiagCode::E007);
        doc.episodes[0].changeable_headers.push(Header::NewEpisode);
        assert!(validate(&doc).iter().all(|d| d.code == DiagCode::E007));
    }

    #[test]
    fn deterministic() {
        let mut doc = base();
        doc.participants.clear();
        assert_eq!(validate(&doc), validate(&doc));
    }
}
