#![allow(dead_code)]

use chrono::NaiveDate;
use proptest::prelude::*;
use proptest::sample::subsequence;

use sla_core::chat::{Age, ChatDocument, DependentTier, Episode, Header, IndexTag, Participant, ParticipantCode, TierCode, Terminator, Utterance};
use sla_core::TimeSpan;

pub const CODES: [&str; 6] = ["ROD", "ANN", "CHA", "B01", "MGR", "X9Z"];

fn participant(code: &'static str) -> impl Strategy<Value = Participant> {
    (
        "[A-Z][a-z]{1,8}",
        "[A-Z][a-z]{2,8}( [A-Z][a-z]{2,8})?",
        proptest::option::of((1950i32..2010, 1u32..13, 1u32..29)),
        proptest::option::of((0u16..90, 0u8..12, 0u8..31)),
        proptest::option::of("[A-Z][a-z]{2,6}"),
        proptest::option::of(prop_oneof![Just("female".to_string()), Just("male".to_string())]),
    )
        .prop_map(move |(name, role, birth, age, ses, sex)| {
            let mut p = Participant::new(ParticipantCode::parse(code).unwrap(), name, role);
            p.birth = birth.map(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).unwrap());
            p.age = age.map(|(years, months, days)| Age { years, months, days });
            p.ses = ses;
            p.sex = sex;
            p
        })
}

fn participants() -> impl Strategy<Value = Vec<Participant>> {
    subsequence(CODES.to_vec(), 1..=4).prop_flat_map(|codes| codes.into_iter().map(participant).collect::<Vec<_>>())
}

fn free_text() -> impl Strategy<Value = String> {
    "[A-Za-z][a-z&<>\"']{0,6}( [a-zé]{1,6}){0,3}"
}

fn constant_headers() -> impl Strategy<Value = Vec<Header>> {
    (
        proptest::option::of(prop_oneof![Just("eng"), Just("eng, deu")].prop_map(|s| Header::Languages(s.into()))),
        proptest::option::of(free_text().prop_map(Header::Transcriber)),
        proptest::collection::vec(free_text().prop_map(Header::Comment), 0..3),
    )
        .prop_map(|(l, t, c)| l.into_iter().chain(t).chain(c).collect())
}

fn index_tag() -> impl Strategy<Value = IndexTag> {
    (
        "[a-z]{2,4}",
        1u32..4,
        subsequence(vec![("MOVE", "issue"), ("REALISATION", "verbal"), ("TOPIC", "budget")], 1..=3),
        0u64..100_000,
        1u64..10_000,
    )
        .prop_map(|(network, version, choices, start, len)| IndexTag {
            network,
            version,
            choices: choices.into_iter().map(|(s, o)| (s.to_string(), o.to_string())).collect(),
            span: TimeSpan::new(start, start + len).unwrap(),
        })
}

fn tier() -> impl Strategy<Value = DependentTier> {
    prop_oneof![
        3 => (prop_oneof![Just("com"), Just("act"), Just("spa"), Just("gpx")], free_text())
            .prop_map(|(c, t)| DependentTier::new(TierCode::parse(c).unwrap(), t)),
        1 => index_tag().prop_map(|t| DependentTier::new(TierCode::parse("ind").unwrap(), t.to_string())),
    ]
}

fn utterance(speakers: Vec<ParticipantCode>, max_tiers: usize) -> impl Strategy<Value = Utterance> {
    (
        proptest::sample::select(speakers),
        proptest::collection::vec("[a-zA-Z][a-zé'&<-]{0,7}", 0..7),
        prop_oneof![Just(Terminator::Period), Just(Terminator::Question), Just(Terminator::Exclamation)],
        proptest::option::of((0u64..3000, 1u64..5000)),
        proptest::collection::vec(tier(), 0..=max_tiers),
    )
        .prop_map(|(speaker, words, terminator, timing, tiers)| Utterance {
            speaker,
            words,
            terminator,
            // Gap and length; made absolute by `absolute_spans`.
            span: timing.map(|(gap, len)| TimeSpan::new(gap, gap + len).unwrap()),
            tiers,
        })
}

fn episode_headers(first: bool) -> impl Strategy<Value = Vec<Header>> {
    (
        proptest::option::of(free_text().prop_map(Header::Situation)),
        proptest::option::of(free_text().prop_map(Header::RoomLayout)),
        proptest::option::of((2000i32..2030, 1u32..13, 1u32..29).prop_map(|(y, m, d)| Header::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap()))),
    )
        .prop_map(move |(s, r, d)| {
            let opener = (!first).then_some(Header::NewEpisode);
            opener.into_iter().chain(s).chain(r).chain(d).collect()
        })
}

/// Turns per-utterance (gap, length) pairs into non-decreasing spans.
fn absolute_spans(doc: &mut ChatDocument) {
    let mut clock = 0;
    for utt in doc.episodes.iter_mut().flat_map(|e| e.utterances.iter_mut()) {
        if let Some(rel) = utt.span {
            let start = clock + rel.start_ms();
            utt.span = Some(TimeSpan::new(start, start + rel.len_ms()).unwrap());
            clock = start;
        }
    }
}

/// Valid documents with up to `max_episodes` episodes, `max_utterances`
/// utterances per episode and `max_tiers` tiers per utterance.
pub fn document(max_episodes: usize, max_utterances: usize, max_tiers: usize) -> impl Strategy<Value = ChatDocument> {
    (participants(), constant_headers(), proptest::collection::vec(index_tag(), 0..3)).prop_flat_map(
        move |(participants, constant_headers, index_notes)| {
            let speakers: Vec<ParticipantCode> = participants.iter().map(|p| p.code.clone()).collect();
            let episodes = proptest::collection::vec(
                proptest::collection::vec(utterance(speakers.clone(), max_tiers), 0..=max_utterances),
                1..=max_episodes,
            );
            let participants = participants.clone();
            let constant_headers = constant_headers.clone();
            let index_notes = index_notes.clone();
            episodes.prop_flat_map(move |eps| {
                let headers: Vec<_> = (0..eps.len()).map(|i| episode_headers(i == 0)).collect();
                let eps = eps.clone();
                let participants = participants.clone();
                let constant_headers = constant_headers.clone();
                let index_notes = index_notes.clone();
                headers.prop_map(move |headers| {
                    let mut doc = ChatDocument::new(participants.clone());
                    doc.constant_headers = constant_headers.clone();
                    doc.index_notes = index_notes.clone();
                    doc.episodes = headers
                        .into_iter()
                        .zip(eps.iter().cloned())
                        .map(|(changeable_headers, utterances)| Episode { changeable_headers, utterances })
                        .collect();
                    absolute_spans(&mut doc);
                    doc
                })
            })
        },
    )
}
