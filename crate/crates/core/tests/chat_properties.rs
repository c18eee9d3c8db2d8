mod common;

use proptest::prelude::*;
use sla_core::chat::{
    append_utterance, attach_tier, filter_view, from_sla_xml, new_episode, parse_chat, serialize_chat, to_sla_xml,
    validate, Header, OccasionMeta, Severity, ViewCriteria,
};
use sla_core::TimeSpan;

fn meta() -> OccasionMeta {
    OccasionMeta { id: "occ-1".into(), title: "Weekly meeting".into() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_documents_are_valid(doc in common::document(5, 12, 3)) {
        prop_assert_eq!(validate(&doc), vec![]);
    }

    #[test]
    fn text_round_trip(doc in common::document(5, 12, 3)) {
        let text = serialize_chat(&doc);
        let parsed = parse_chat(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(serialize_chat(&parsed), text);
    }

    #[test]
    fn xml_round_trip(doc in common::document(4, 8, 3)) {
        let xml = to_sla_xml(&doc, &meta());
        let (m, back) = from_sla_xml(&xml).map_err(|d| TestCaseError::fail(format!("{d:?}\n{xml}")))?;
        prop_assert_eq!(m, meta());
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(to_sla_xml(&back, &meta()), xml);
    }

    #[test]
    fn unfiltered_view_is_the_serialization(doc in common::document(4, 8, 3)) {
        let view = filter_view(&doc, &ViewCriteria::default()).unwrap();
        prop_assert_eq!(view.text(), serialize_chat(&doc));
    }

    #[test]
    fn speaker_filter_keeps_only_that_speaker(doc in common::document(3, 8, 2)) {
        let code = doc.participants[0].code.to_string();
        let criteria = ViewCriteria { speakers: Some([code.clone()].into()), ..Default::default() };
        let view = filter_view(&doc, &criteria).unwrap();
        let prefix = format!("*{code}:");
        for line in view.text().lines().filter(|l| l.starts_with('*')) {
            prop_assert!(line.starts_with(&prefix));
        }
    }

    #[test]
    fn validate_is_deterministic(doc in common::document(3, 6, 2)) {
        prop_assert_eq!(validate(&doc), validate(&doc));
    }

    #[test]
    fn edits_preserve_validity(
        doc in common::document(2, 4, 1),
        ops in proptest::collection::vec((0u8..3, 0usize..64, "[a-z]{1,5}( [a-z]{1,5}){0,3}", proptest::option::of((0u64..50_000, 1u64..4000))), 1..25),
    ) {
        let mut doc = doc;
        let speakers: Vec<String> = doc.participants.iter().map(|p| p.code.to_string()).collect();
        for (kind, pick, text, timing) in ops {
            let result = match kind {
                0 => append_utterance(
                    &doc,
                    &speakers[pick % speakers.len()],
                    &text,
                    ["." , "?", "!"][pick % 3],
                    timing.map(|(s, l)| TimeSpan::new(s, s + l).unwrap()),
                ),
                1 => attach_tier(&doc, pick % (doc.utterance_count() + 1), ["com", "act", "tim"][pick % 3], &text),
                _ => new_episode(&doc, vec![Header::Situation(text)]),
            };
            if let Ok(next) = result {
                doc = next;
            }
            prop_assert!(validate(&doc).iter().all(|d| d.severity == Severity::Warning));
        }
    }
}
