use super::model::{format_date, ChatDocument};
use super::view::LineOrigin;

pub(crate) struct RenderedLine {
    pub text: String,
    pub origin: LineOrigin,
}

/// Canonical line layout of a document. Shared by the serializer, the
/// validator (for line numbers) and the view filter.
pub(crate) fn render_lines(doc: &ChatDocument) -> Vec<RenderedLine> {
    let mut out = Vec::new();
    let mut push = |text: String, origin: LineOrigin| out.push(RenderedLine { text, origin });

    push("@Begin".into(), LineOrigin::Begin);
    let roster = doc
        .participants
        .iter()
        .map(|p| format!("{} {} {}", p.code, p.name, p.role))
        .collect::<Vec<_>>()
        .join(", ");
    push(format!("@Participants:\t{roster}"), LineOrigin::Participants);
    for (i, p) in doc.participants.iter().enumerate() {
        let origin = LineOrigin::ParticipantDetail { participant: i };
        if let Some(birth) = &p.birth {
            push(format!("@Birth of {}:\t{}", p.code, format_date(birth)), origin.clone());
        }
        if let Some(age) = &p.age {
            push(format!("@Age of {}:\t{}", p.code, age), origin.clone());
        }
        if let Some(ses) = &p.ses {
            push(format!("@SES of {}:\t{}", p.code, ses), origin.clone());
        }
        if let Some(sex) = &p.sex {
            push(format!("@Sex of {}:\t{}", p.code, sex), origin.clone());
        }
    }
    for (i, header) in doc.constant_headers.iter().enumerate() {
        push(header_line(header), LineOrigin::ConstantHeader { header: i });
    }
    for (e, episode) in doc.episodes.iter().enumerate() {
        for (h, header) in episode.changeable_headers.iter().enumerate() {
            push(header_line(header), LineOrigin::EpisodeHeader { episode: e, header: h });
        }
        for (u, utt) in episode.utterances.iter().enumerate() {
            let mut line = format!("*{}:\t", utt.speaker);
            for word in &utt.words {
                line.push_str(word);
                line.push(' ');
            }
            line.push_str(utt.terminator.as_str());
            push(line, LineOrigin::Mainline { episode: e, utterance: u });
            if let Some(span) = &utt.span {
                push(format!("%tim:\t{span}"), LineOrigin::Time { episode: e, utterance: u });
            }
            for (t, tier) in utt.tiers.iter().enumerate() {
                push(
                    format!("%{}:\t{}", tier.code, tier.content),
                    LineOrigin::Tier { episode: e, utterance: u, tier: t },
                );
            }
        }
    }
    for (i, note) in doc.index_notes.iter().enumerate() {
        push(format!("@Index:\t{note}"), LineOrigin::IndexNote { note: i });
    }
    push("@End".into(), LineOrigin::End);
    out
}

fn header_line(header: &super::Header) -> String {
    match header.value_text() {
        Some(value) => format!("@{}:\t{}", header.chat_name(), value),
        None => format!("@{}", header.chat_name()),
    }
}

/// Canonical plain-text CHAT: LF line endings, a TAB after each record
/// colon, one line per record and spans as `%tim` tiers.
pub fn serialize_chat(doc: &ChatDocument) -> String {
    let mut text = String::new();
    for line in render_lines(doc) {
        text.push_str(&line.text);
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::{Episode, Header, Participant, ParticipantCode, Terminator, Utterance};
    use crate::span::TimeSpan;

    fn rod() -> Participant {
        Participant::new(ParticipantCode::parse("ROD").unwrap(), "Rodney", "Analyst")
    }

    #[test]
    fn minimal_document() {
        let mut doc = ChatDocument::new(vec![rod()]);
        doc.episodes[0].utterances.push(Utterance {
            speaker: ParticipantCode::parse("ROD").unwrap(),
            words: vec!["so".into(), "we".into(), "agree".into()],
            terminator: Terminator::Period,
            span: None,
            tiers: vec![],
        });
        assert_eq!(
            serialize_chat(&doc),
            "@Begin\n@Participants:\tROD Rodney Analyst\n*ROD:\tso we agree .\n@End\n"
        );
    }

    #[test]
    fn span_becomes_tim_tier_under_mainline() {
        let mut doc = ChatDocument::new(vec![rod()]);
        doc.episodes[0].utterances.push(Utterance {
            speaker: ParticipantCode::parse("ROD").unwrap(),
            words: vec!["ok".into()],
            terminator: Terminator::Question,
            span: Some(TimeSpan::new(0, 2500).unwrap()),
            tiers: vec![],
        });
        let text = serialize_chat(&doc);
        assert!(text.contains("*ROD:\tok ?\n%tim:\t0_2500\n"), "{text}");
    }

    #[test]
    fn second_episode_opens_with_new_episode() {
        let mut doc = ChatDocument::new(vec![rod()]);
        doc.episodes.push(Episode {
            changeable_headers: vec![Header::NewEpisode, Header::Situation("kickoff meeting".into())],
            utterances: vec![],
        });
        let text = serialize_chat(&doc);
        assert!(text.contains("\n@New Episode\n@Situation:\tkickoff meeting\n@End\n"), "{text}");
    }
}
