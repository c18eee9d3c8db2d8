use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::span::TimeSpan;

/// Three character participant identifier, `[A-Z0-9]{3}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ParticipantCode(String);

impl ParticipantCode {
    pub fn parse(s: &str) -> Option<Self> {
        let ok = s.len() == 3 && s.bytes().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit());
        ok.then(|| Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ParticipantCode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s).ok_or_else(|| format!("invalid participant code {s:?}"))
    }
}

impl From<ParticipantCode> for String {
    fn from(c: ParticipantCode) -> Self {
        c.0
    }
}

impl fmt::Display for ParticipantCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Three character dependent tier code, `[a-z]{3}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TierCode(String);

impl TierCode {
    pub const TIME: &'static str = "tim";
    pub const INDEX: &'static str = "ind";
    pub const GAP: &'static str = "gap";
    pub const COMMENT: &'static str = "com";

    pub fn parse(s: &str) -> Option<Self> {
        let ok = s.len() == 3 && s.bytes().all(|c| c.is_ascii_lowercase());
        ok.then(|| Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TierCode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s).ok_or_else(|| format!("invalid tier code {s:?}"))
    }
}

impl From<TierCode> for String {
    fn from(c: TierCode) -> Self {
        c.0
    }
}

impl fmt::Display for TierCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminator {
    #[serde(rename = ".")]
    Period,
    #[serde(rename = "?")]
    Question,
    #[serde(rename = "!")]
    Exclamation,
}

impl Terminator {
    pub const ALL: [Terminator; 3] = [Terminator::Period, Terminator::Question, Terminator::Exclamation];

    pub fn as_str(&self) -> &'static str {
        match self {
            Terminator::Period => ".",
            Terminator::Question => "?",
            Terminator::Exclamation => "!",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "." => Some(Terminator::Period),
            "?" => Some(Terminator::Question),
            "!" => Some(Terminator::Exclamation),
            _ => None,
        }
    }
}

impl fmt::Display for Terminator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// CHAT age, `years;months.days`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Age {
    pub years: u16,
    pub months: u8,
    pub days: u8,
}

impl fmt::Display for Age {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{:02}.{:02}", self.years, self.months, self.days)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("age {0:?} must be years;months.days")]
pub struct AgeError(String);

impl FromStr for Age {
    type Err = AgeError;

    /// Accepts `Y`, `Y;M` and `Y;M.D`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        fn num<T: FromStr>(t: &str) -> Result<T, AgeError> {
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(AgeError(t.to_string()));
            }
            t.parse().map_err(|_| AgeError(t.to_string()))
        }
        let (years, rest) = match s.split_once(';') {
            Some((y, rest)) => (num(y)?, Some(rest)),
            None => (num(s)?, None),
        };
        let (months, days) = match rest {
            None => (0, 0),
            Some(rest) => match rest.split_once('.') {
                Some((m, d)) => (num(m)?, num(d)?),
                None => (num(rest)?, 0),
            },
        };
        if months > 11 || days > 30 {
            return Err(AgeError(s.to_string()));
        }
        Ok(Age { years, months, days })
    }
}

pub(crate) const DATE_FORMAT: &str = "%d-%b-%Y";

pub(crate) fn format_date(date: &NaiveDate) -> String {
    date.format(DATE_FORMAT).to_string().to_uppercase()
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, DATE_FORMAT).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Participant {
    pub code: ParticipantCode,
    /// Single token; CHAT convention joins multi-word names with `_`.
    pub name: String,
    pub role: String,
    pub birth: Option<NaiveDate>,
    pub age: Option<Age>,
    pub ses: Option<String>,
    pub sex: Option<String>,
}

impl Participant {
    pub fn new(code: ParticipantCode, name: impl Into<String>, role: impl Into<String>) -> Self {
        Self {
            code,
            name: name.into(),
            role: role.into(),
            birth: None,
            age: None,
            ses: None,
            sex: None,
        }
    }
}

/// Header records other than the framing and participant headers, which the
/// document structure carries directly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Header {
    Languages(String),
    Transcriber(String),
    Comment(String),
    Situation(String),
    Activities(String),
    RoomLayout(String),
    Date(NaiveDate),
    NewEpisode,
}

impl Header {
    /// Headers that may change between episodes.
    pub fn is_changeable(&self) -> bool {
        matches!(
            self,
            Header::Situation(_)
                | Header::Activities(_)
                | Header::RoomLayout(_)
                | Header::Date(_)
                | Header::NewEpisode
        )
    }

    /// Name as written after `@`.
    pub fn chat_name(&self) -> &'static str {
        match self {
            Header::Languages(_) => "Languages",
            Header::Transcriber(_) => "Transcriber",
            Header::Comment(_) => "Comment",
            Header::Situation(_) => "Situation",
            Header::Activities(_) => "Activities",
            Header::RoomLayout(_) => "Room Layout",
            Header::Date(_) => "Date",
            Header::NewEpisode => "New Episode",
        }
    }

    /// Kind attribute used in SLA-XML.
    pub fn xml_kind(&self) -> &'static str {
        match self {
            Header::Languages(_) => "languages",
            Header::Transcriber(_) => "transcriber",
            Header::Comment(_) => "comment",
            Header::Situation(_) => "situation",
            Header::Activities(_) => "activities",
            Header::RoomLayout(_) => "room-layout",
            Header::Date(_) => "date",
            Header::NewEpisode => "new-episode",
        }
    }

    pub fn value_text(&self) -> Option<String> {
        match self {
            Header::Languages(v)
            | Header::Transcriber(v)
            | Header::Comment(v)
            | Header::Situation(v)
            | Header::Activities(v)
            | Header::RoomLayout(v) => Some(v.clone()),
            Header::Date(d) => Some(format_date(d)),
            Header::NewEpisode => None,
        }
    }

    /// Builds a header from its CHAT name and value. `None` for unknown names
    /// or unusable values.
    pub(crate) fn from_chat(name: &str, value: Option<&str>) -> Option<Header> {
        let text = || value.filter(|v| is_clean_text(v)).map(str::to_string);
        Some(match name {
            "Languages" => Header::Languages(text()?),
            "Transcriber" => Header::Transcriber(text()?),
            "Comment" => Header::Comment(text()?),
            "Situation" => Header::Situation(text()?),
            "Activities" => Header::Activities(text()?),
            "Room Layout" => Header::RoomLayout(text()?),
            "Date" => Header::Date(parse_date(value?)?),
            "New Episode" if value.is_none_or(str::is_empty) => Header::NewEpisode,
            _ => return None,
        })
    }

    pub(crate) fn from_xml(kind: &str, value: &str) -> Option<Header> {
        let name = match kind {
            "languages" => "Languages",
            "transcriber" => "Transcriber",
            "comment" => "Comment",
            "situation" => "Situation",
            "activities" => "Activities",
            "room-layout" => "Room Layout",
            "date" => "Date",
            "new-episode" => "New Episode",
            _ => return None,
        };
        Header::from_chat(name, Some(value))
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        match self {
            Header::Languages(v)
            | Header::Transcriber(v)
            | Header::Comment(v)
            | Header::Situation(v)
            | Header::Activities(v)
            | Header::RoomLayout(v) => is_clean_text(v),
            Header::Date(_) | Header::NewEpisode => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DependentTier {
    pub code: TierCode,
    pub content: String,
}

impl DependentTier {
    pub fn new(code: TierCode, content: impl Into<String>) -> Self {
        Self { code, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: ParticipantCode,
    pub words: Vec<String>,
    pub terminator: Terminator,
    pub span: Option<TimeSpan>,
    pub tiers: Vec<DependentTier>,
}

impl Utterance {
    /// Word text without the terminator.
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Episode {
    pub changeable_headers: Vec<Header>,
    pub utterances: Vec<Utterance>,
}

/// A system-network selection tied to a time span, as carried by `%ind`
/// tiers and standalone `@Index` records.
///
/// Text form: `NETID:vN SYS=opt[ SYS=opt]* START_END`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexTag {
    pub network: String,
    pub version: u32,
    /// `(system, option)` pairs in rendering order.
    pub choices: Vec<(String, String)>,
    pub span: TimeSpan,
}

impl IndexTag {
    pub fn is_well_formed(&self) -> bool {
        let mut systems: Vec<&str> = self.choices.iter().map(|(s, _)| s.as_str()).collect();
        systems.sort_unstable();
        systems.dedup();
        is_ident(&self.network)
            && self.version >= 1
            && !self.choices.is_empty()
            && systems.len() == self.choices.len()
            && self.choices.iter().all(|(s, o)| is_ident(s) && is_ident(o))
    }

    pub fn choices_text(&self) -> String {
        self.choices.iter().map(|(s, o)| format!("{s}={o}")).collect::<Vec<_>>().join(" ")
    }

    pub(crate) fn parse_choices(text: &str) -> Option<Vec<(String, String)>> {
        text.split(' ')
            .map(|pair| {
                let (s, o) = pair.split_once('=')?;
                Some((s.to_string(), o.to_string()))
            })
            .collect()
    }
}

impl fmt::Display for IndexTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:v{} {} {}", self.network, self.version, self.choices_text(), self.span)
    }
}

impl FromStr for IndexTag {
    type Err = ();

    /// Strict: only the canonical single-space form is accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, rest) = s.split_once(' ').ok_or(())?;
        let (network, version) = head.split_once(":v").ok_or(())?;
        if version.is_empty() || !version.bytes().all(|c| c.is_ascii_digit()) || version.starts_with('0') {
            return Err(());
        }
        let version = version.parse().map_err(|_| ())?;
        let (choices, span) = rest.rsplit_once(' ').ok_or(())?;
        let tag = IndexTag {
            network: network.to_string(),
            version,
            choices: IndexTag::parse_choices(choices).ok_or(())?,
            span: span.parse().map_err(|_| ())?,
        };
        if tag.is_well_formed() {
            Ok(tag)
        } else {
            Err(())
        }
    }
}

/// A parsed CHAT transcript.
///
/// `@Begin`, `@Participants`, the per-participant headers and `@End` are
/// implied by the structure. There is always at least one episode; episodes
/// after the first open with [`Header::NewEpisode`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatDocument {
    pub participants: Vec<Participant>,
    pub constant_headers: Vec<Header>,
    pub episodes: Vec<Episode>,
    /// Index selections over stretches with no transcribed utterance.
    pub index_notes: Vec<IndexTag>,
}

impl ChatDocument {
    pub fn new(participants: Vec<Participant>) -> Self {
        Self {
            participants,
            constant_headers: Vec::new(),
            episodes: vec![Episode::default()],
            index_notes: Vec::new(),
        }
    }

    pub fn participant(&self, code: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.code.as_str() == code)
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.episodes.iter().flat_map(|e| e.utterances.iter())
    }

    pub fn utterance_count(&self) -> usize {
        self.episodes.iter().map(|e| e.utterances.len()).sum()
    }

    /// Maps a document-wide utterance index to `(episode, index in episode)`.
    pub fn locate_utterance(&self, index: usize) -> Option<(usize, usize)> {
        let mut remaining = index;
        for (e, episode) in self.episodes.iter().enumerate() {
            if remaining < episode.utterances.len() {
                return Some((e, remaining));
            }
            remaining -= episode.utterances.len();
        }
        None
    }

    pub(crate) fn utterance_mut(&mut self, index: usize) -> Option<&mut Utterance> {
        let (e, u) = self.locate_utterance(index)?;
        Some(&mut self.episodes[e].utterances[u])
    }
}

/// Non-empty single-line text without surrounding whitespace.
pub(crate) fn is_clean_text(s: &str) -> bool {
    !s.is_empty()
        && s.trim() == s
        && !s.chars().any(|c| c == '\n' || c == '\r' || c == '\t' || c.is_control())
}

/// Identifier for networks, systems and options.
pub(crate) fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-')
}

pub(crate) fn is_word(s: &str) -> bool {
    !s.is_empty()
        && Terminator::from_token(s).is_none()
        && !s.chars().any(|c| c.is_whitespace() || c.is_control())
}

/// Name token for `@Participants` entries.
pub(crate) fn is_name_token(s: &str) -> bool {
    is_word(s) && !s.contains(',')
}

pub(crate) fn is_role_text(s: &str) -> bool {
    is_clean_text(s) && !s.contains(',') && !s.contains("  ")
}
