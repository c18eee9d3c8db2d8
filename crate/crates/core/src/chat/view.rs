use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::diagnostic::{DiagCode, Diagnostic};
use super::model::{ChatDocument, TierCode};
use super::serialize::render_lines;

/// Where a canonical line comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LineOrigin {
    Begin,
    Participants,
    ParticipantDetail { participant: usize },
    ConstantHeader { header: usize },
    EpisodeHeader { episode: usize, header: usize },
    Mainline { episode: usize, utterance: usize },
    Time { episode: usize, utterance: usize },
    Tier { episode: usize, utterance: usize, tier: usize },
    /// Placeholder for the utterances of a collapsed episode.
    Collapsed { episode: usize, hidden: usize },
    IndexNote { note: usize },
    End,
}

impl LineOrigin {
    fn episode(&self) -> Option<usize> {
        match self {
            LineOrigin::EpisodeHeader { episode, .. }
            | LineOrigin::Mainline { episode, .. }
            | LineOrigin::Time { episode, .. }
            | LineOrigin::Tier { episode, .. }
            | LineOrigin::Collapsed { episode, .. } => Some(*episode),
            _ => None,
        }
    }

    fn utterance(&self) -> Option<(usize, usize)> {
        match self {
            LineOrigin::Mainline { episode, utterance }
            | LineOrigin::Time { episode, utterance }
            | LineOrigin::Tier { episode, utterance, .. } => Some((*episode, *utterance)),
            _ => None,
        }
    }
}

/// Which parts of a transcript to show. `None` fields do not filter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCriteria {
    #[serde(default)]
    pub speakers: Option<BTreeSet<String>>,
    /// Dependent tiers to show; `tim` selects the timing lines. An empty set
    /// shows mainlines only.
    #[serde(default)]
    pub tier_codes: Option<BTreeSet<String>>,
    #[serde(default)]
    pub episode_range: Option<Range<usize>>,
    #[serde(default)]
    pub collapsed_episodes: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewLine {
    pub origin: LineOrigin,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptView {
    pub lines: Vec<ViewLine>,
}

impl TranscriptView {
    pub fn text(&self) -> String {
        self.lines.iter().map(|l| format!("{}\n", l.text)).collect()
    }
}

/// Filters the canonical lines of a document without touching it.
pub fn filter_view(doc: &ChatDocument, criteria: &ViewCriteria) -> Result<TranscriptView, Diagnostic> {
    let unknown = |what: String| Diagnostic::new(DiagCode::E012, 0, what);
    if let Some(speakers) = &criteria.speakers {
        if let Some(s) = speakers.iter().find(|s| doc.participant(s).is_none()) {
            return Err(unknown(format!("unknown speaker {s:?}")));
        }
    }
    if let Some(codes) = &criteria.tier_codes {
        if let Some(c) = codes.iter().find(|c| TierCode::parse(c).is_none()) {
            return Err(unknown(format!("unknown tier code {c:?}")));
        }
    }
    let episodes = doc.episodes.len();
    if let Some(range) = &criteria.episode_range {
        if range.start > range.end || range.end > episodes {
            return Err(unknown(format!("episode range {range:?} outside 0..{episodes}")));
        }
    }
    if let Some(e) = criteria.collapsed_episodes.iter().find(|&&e| e >= episodes) {
        return Err(unknown(format!("unknown episode {e}")));
    }

    let speaker_shown = |e: usize, u: usize| {
        criteria
            .speakers
            .as_ref()
            .is_none_or(|set| set.contains(doc.episodes[e].utterances[u].speaker.as_str()))
    };
    let tier_shown = |code: &str| criteria.tier_codes.as_ref().is_none_or(|set| set.contains(code));

    let mut lines = Vec::new();
    let mut hidden_in_collapsed = vec![0usize; episodes];
    for line in render_lines(doc) {
        let origin = line.origin;
        if let Some(e) = origin.episode() {
            if criteria.episode_range.as_ref().is_some_and(|r| !r.contains(&e)) {
                continue;
            }
        }
        if let Some((e, u)) = origin.utterance() {
            if !speaker_shown(e, u) {
                continue;
            }
            let visible = match &origin {
                LineOrigin::Time { .. } => tier_shown(TierCode::TIME),
                LineOrigin::Tier { tier, .. } => {
                    tier_shown(doc.episodes[e].utterances[u].tiers[*tier].code.as_str())
                }
                _ => true,
            };
            if !visible {
                continue;
            }
            if criteria.collapsed_episodes.contains(&e) {
                if matches!(origin, LineOrigin::Mainline { .. }) {
                    hidden_in_collapsed[e] += 1;
                }
                continue;
            }
        }
        lines.push(ViewLine { origin, text: line.text });
    }

    // Placeholders go right after each collapsed episode's headers.
    for &e in criteria.collapsed_episodes.iter().rev() {
        if criteria.episode_range.as_ref().is_some_and(|r| !r.contains(&e)) {
            continue;
        }
        let after = lines
            .iter()
            .rposition(|l| matches!(l.origin, LineOrigin::EpisodeHeader { episode, .. } if episode == e))
            .or_else(|| lines.iter().rposition(|l| l.origin.episode().is_some_and(|x| x < e)))
            .or_else(|| {
                lines.iter().rposition(|l| {
                    matches!(
                        l.origin,
                        LineOrigin::Begin
                            | LineOrigin::Participants
                            | LineOrigin::ParticipantDetail { .. }
                            | LineOrigin::ConstantHeader { .. }
                    )
                })
            })
            .map_or(0, |i| i + 1);
        let hidden = hidden_in_collapsed[e];
        lines.insert(
            after,
            ViewLine {
                origin: LineOrigin::Collapsed { episode: e, hidden },
                text: format!("[episode {} collapsed: {hidden} utterances]", e + 1),
            },
        );
    }
    Ok(TranscriptView { lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::{parse_chat, serialize_chat};

    const TEXT: &str = "@Begin\n@Participants:\tROD Rodney Analyst, SUE Susan Manager\n*ROD:\tshall we start ?\n%tim:\t0_1000\n%com:\tlooks at notes\n*SUE:\tyes .\n%com:\tnods\n@New Episode\n@Situation:\tbudget\n*ROD:\tnumbers first .\n@End\n";

    fn set(items: &[&str]) -> Option<BTreeSet<String>> {
        Some(items.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn identity_filter_is_the_serialization() {
        let doc = parse_chat(TEXT).unwrap();
        let view = filter_view(&doc, &ViewCriteria::default()).unwrap();
        assert_eq!(view.text(), serialize_chat(&doc));
    }

    #[test]
    fn speaker_filter_hides_other_mainlines_and_tiers() {
        let doc = parse_chat(TEXT).unwrap();
        let view = filter_view(&doc, &ViewCriteria { speakers: set(&["ROD"]), ..Default::default() }).unwrap();
        let text = view.text();
        assert!(!text.contains("*SUE"));
        assert!(!text.contains("nods"));
        assert!(text.contains("looks at notes"));
        assert_eq!(text.matches("*ROD").count(), 2);
    }

    #[test]
    fn empty_tier_set_shows_mainlines_only() {
        let doc = parse_chat(TEXT).unwrap();
        let view = filter_view(&doc, &ViewCriteria { tier_codes: set(&[]), ..Default::default() }).unwrap();
        assert!(view.lines.iter().all(|l| !l.text.starts_with('%')));
        assert_eq!(view.lines.iter().filter(|l| l.text.starts_with('*')).count(), 3);
    }

    #[test]
    fn collapse_and_range() {
        let doc = parse_chat(TEXT).unwrap();
        let criteria = ViewCriteria { collapsed_episodes: [0].into(), ..Default::default() };
        let view = filter_view(&doc, &criteria).unwrap();
        let pos = view.lines.iter().position(|l| matches!(l.origin, LineOrigin::Collapsed { .. })).unwrap();
        assert_eq!(view.lines[pos].origin, LineOrigin::Collapsed { episode: 0, hidden: 2 });
        assert_eq!(view.lines[pos - 1].origin, LineOrigin::Participants);
        assert_eq!(view.lines.iter().filter(|l| l.text.starts_with('*')).count(), 1);

        let ranged = filter_view(&doc, &ViewCriteria { episode_range: Some(1..2), ..Default::default() }).unwrap();
        assert!(!ranged.text().contains("shall we"));
        assert!(ranged.text().contains("@Situation"));
    }

    #[test]
    fn unknown_codes_rejected() {
        let doc = parse_chat(TEXT).unwrap();
        let bad = [
            ViewCriteria { speakers: set(&["XYZ"]), ..Default::default() },
            ViewCriteria { tier_codes: set(&["COM"]), ..Default::default() },
            ViewCriteria { episode_range: Some(0..3), ..Default::default() },
            ViewCriteria { collapsed_episodes: [2].into(), ..Default::default() },
        ];
        for criteria in bad {
            assert_eq!(filter_view(&doc, &criteria).unwrap_err().code, DiagCode::E012);
        }
    }
}
