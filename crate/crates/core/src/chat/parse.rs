use std::collections::HashSet;

use super::diagnostic::{sort_diagnostics, DiagCode, Diagnostic};
use super::model::{
    is_name_token, is_role_text, parse_date, Age, ChatDocument, DependentTier, Episode, Header,
    IndexTag, Participant, ParticipantCode, TierCode, Terminator, Utterance, is_clean_text,
};
use super::validate::validate;
use crate::span::TimeSpan;

/// Parses plain-text CHAT.
///
/// Either the whole document is well formed, or every error found is
/// returned sorted by line then code. Warnings (W008) do not block parsing;
/// run [`validate`] on the result to see them.
pub fn parse_chat(text: &str) -> Result<ChatDocument, Vec<Diagnostic>> {
    Parser::default().run(text)
}

/// Like [`parse_chat`] for raw bytes; invalid UTF-8 is reported as E007.
pub fn parse_chat_bytes(bytes: &[u8]) -> Result<ChatDocument, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_chat(text),
        Err(err) => {
            let offset = err.valid_up_to();
            let line = 1 + bytes[..offset].iter().filter(|&&b| b == b'\n').count();
            Err(vec![Diagnostic::new(DiagCode::E007, line, "invalid UTF-8")])
        }
    }
}

/// Every diagnostic for a text: parse errors when it does not parse,
/// otherwise the validator's output (line numbers refer to the canonical
/// form, which for canonical input is the input itself).
pub fn lint_chat(text: &str) -> Vec<Diagnostic> {
    match parse_chat(text) {
        Ok(doc) => validate(&doc),
        Err(diags) => diags,
    }
}

enum DetailKind {
    Birth,
    Age,
    Ses,
    Sex,
}

struct PendingDetail {
    line: usize,
    kind: DetailKind,
    code: String,
    value: String,
}

struct Parser {
    diags: Vec<Diagnostic>,
    begun: bool,
    ended: bool,
    trailing_reported: bool,
    in_body: bool,
    participants: Option<Vec<Participant>>,
    roster_damaged: bool,
    details: Vec<PendingDetail>,
    constant_headers: Vec<Header>,
    episodes: Vec<Episode>,
    notes: Vec<IndexTag>,
    /// Episode and utterance index that tiers currently attach to.
    current: Option<(usize, usize)>,
    speakers: Vec<(usize, ParticipantCode)>,
}

impl Default for Parser {
    fn default() -> Self {
        Self {
            diags: Vec::new(),
            begun: false,
            ended: false,
            trailing_reported: false,
            in_body: false,
            participants: None,
            roster_damaged: false,
            details: Vec::new(),
            constant_headers: Vec::new(),
            episodes: vec![Episode::default()],
            notes: Vec::new(),
            current: None,
            speakers: Vec::new(),
        }
    }
}

impl Parser {
    fn error(&mut self, code: DiagCode, line: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, line, message));
    }

    fn run(mut self, text: &str) -> Result<ChatDocument, Vec<Diagnostic>> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut records: Vec<(usize, String)> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.split('\n').enumerate() {
            let line_no = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.starts_with('\t') {
                let piece = line.trim();
                match records.last_mut() {
                    Some((_, record)) => {
                        if !piece.is_empty() {
                            record.push(' ');
                            record.push_str(piece);
                        }
                    }
                    None => self.error(DiagCode::E007, line_no, "continuation line with no record to continue"),
                }
                continue;
            }
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            last_line = line_no;
            records.push((line_no, line.to_string()));
        }

        for (line_no, record) in &records {
            self.record(*line_no, record);
        }
        self.finish(last_line.max(1))
    }

    fn record(&mut self, line: usize, record: &str) {
        if self.ended {
            if !self.trailing_reported {
                self.trailing_reported = true;
                self.error(DiagCode::E001, line, "content after @End");
            }
            return;
        }
        if !self.begun {
            self.begun = true;
            if record != "@Begin" {
                self.error(DiagCode::E001, line, "transcript must start with @Begin");
            } else {
                return;
            }
        }
        match record.as_bytes()[0] {
            b'@' => self.header(line, &record[1..]),
            b'*' => self.mainline(line, &record[1..]),
            b'%' => self.tier(line, &record[1..]),
            _ => self.error(DiagCode::E007, line, "unrecognized record"),
        }
    }

    fn header(&mut self, line: usize, body: &str) {
        self.current = None;
        let (name, value) = match body.split_once(':') {
            Some((name, value)) => (name, Some(value.trim())),
            None => (body, None),
        };
        match name {
            "Begin" => return self.error(DiagCode::E001, line, "duplicate @Begin"),
            "End" => {
                self.ended = true;
                return;
            }
            "Participants" => return self.roster(line, value.unwrap_or("")),
            "New Episode" => {
                if value.is_some_and(|v| !v.is_empty()) {
                    return self.error(DiagCode::E007, line, "@New Episode takes no value");
                }
                self.in_body = true;
                self.episodes.push(Episode {
                    changeable_headers: vec![Header::NewEpisode],
                    utterances: Vec::new(),
                });
                return;
            }
            "Index" => {
                match value.and_then(|v| v.parse::<IndexTag>().ok()) {
                    Some(tag) => self.notes.push(tag),
                    None => self.error(DiagCode::E007, line, "malformed @Index record"),
                }
                return;
            }
            _ => {}
        }
        for (prefix, kind) in [
            ("Birth of ", DetailKind::Birth),
            ("Age of ", DetailKind::Age),
            ("SES of ", DetailKind::Ses),
            ("Sex of ", DetailKind::Sex),
        ] {
            if let Some(code) = name.strip_prefix(prefix) {
                if self.in_body {
                    return self.error(DiagCode::E007, line, format!("@{name} after transcript body began"));
                }
                self.details.push(PendingDetail {
                    line,
                    kind,
                    code: code.to_string(),
                    value: value.unwrap_or("").to_string(),
                });
                return;
            }
        }
        let Some(header) = Header::from_chat(name, value) else {
            return self.error(DiagCode::E007, line, format!("malformed or unknown header @{name}"));
        };
        if header.is_changeable() {
            let episode = self.episodes.last_mut().expect("at least one episode");
            if !episode.utterances.is_empty() {
                return self.error(
                    DiagCode::E007,
                    line,
                    format!("@{name} must precede the utterances of its episode"),
                );
            }
            self.in_body = true;
            episode.changeable_headers.push(header);
        } else if self.in_body {
            self.error(DiagCode::E007, line, format!("@{name} after transcript body began"));
        } else {
            self.constant_headers.push(header);
        }
    }

    fn roster(&mut self, line: usize, value: &str) {
        if self.participants.is_some() {
            self.roster_damaged = true;
            return self.error(DiagCode::E007, line, "duplicate @Participants");
        }
        if self.in_body {
            self.roster_damaged = true;
            return self.error(DiagCode::E007, line, "@Participants after transcript body began");
        }
        let mut list: Vec<Participant> = Vec::new();
        for entry in value.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let tokens: Vec<&str> = entry.split_whitespace().collect();
            let code = tokens.first().and_then(|t| ParticipantCode::parse(t));
            let role = tokens.get(2..).map(|r| r.join(" ")).unwrap_or_default();
            match code {
                Some(code) if tokens.len() >= 3 && is_name_token(tokens[1]) && is_role_text(&role) => {
                    if list.iter().any(|p| p.code == code) {
                        self.roster_damaged = true;
                        self.error(DiagCode::E007, line, format!("participant {code} declared twice"));
                    } else {
                        list.push(Participant::new(code, tokens[1], role));
                    }
                }
                _ => {
                    self.roster_damaged = true;
                    self.error(
                        DiagCode::E007,
                        line,
                        format!("malformed participant entry {entry:?}, expected CODE Name Role"),
                    );
                }
            }
        }
        if list.is_empty() && !self.roster_damaged {
            self.error(DiagCode::E002, line, "@Participants declares no participant");
        }
        self.participants = Some(list);
    }

    fn mainline(&mut self, line: usize, body: &str) {
        self.current = None;
        let Some((code, rest)) = body.split_once(':') else {
            return self.error(DiagCode::E003, line, "malformed mainline speaker field");
        };
        let Some(speaker) = ParticipantCode::parse(code) else {
            return self.error(DiagCode::E003, line, format!("malformed speaker code {code:?}"));
        };
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        let terminators = tokens.iter().filter(|t| Terminator::from_token(t).is_some()).count();
        let terminator = tokens.last().and_then(|t| Terminator::from_token(t));
        let terminator = match (terminator, terminators) {
            (Some(t), 1) => t,
            (_, 0) => return self.error(DiagCode::E005, line, "utterance has no terminator"),
            (Some(_), _) => return self.error(DiagCode::E005, line, "utterance has more than one terminator"),
            (None, _) => return self.error(DiagCode::E005, line, "terminator must be the final token"),
        };
        self.in_body = true;
        self.speakers.push((line, speaker.clone()));
        let episode_index = self.episodes.len() - 1;
        let episode = &mut self.episodes[episode_index];
        episode.utterances.push(Utterance {
            speaker,
            words: tokens[..tokens.len() - 1].iter().map(|t| t.to_string()).collect(),
            terminator,
            span: None,
            tiers: Vec::new(),
        });
        self.current = Some((episode_index, episode.utterances.len() - 1));
    }

    fn tier(&mut self, line: usize, body: &str) {
        let Some((e, u)) = self.current else {
            return self.error(DiagCode::E006, line, "dependent tier with no preceding mainline");
        };
        let Some((code, content)) = body.split_once(':') else {
            return self.error(DiagCode::E004, line, "malformed dependent tier");
        };
        let Some(code) = TierCode::parse(code) else {
            return self.error(DiagCode::E004, line, format!("malformed tier code {code:?}"));
        };
        let content = content.trim();
        if !is_clean_text(content) {
            return self.error(DiagCode::E004, line, format!("%{code} tier has no usable content"));
        }
        let utterance = &mut self.episodes[e].utterances[u];
        match code.as_str() {
            TierCode::TIME => {
                if utterance.span.is_some() {
                    return self.error(DiagCode::E004, line, "duplicate %tim tier");
                }
                match content.parse::<TimeSpan>() {
                    Ok(span) => utterance.span = Some(span),
                    Err(err) => self.error(DiagCode::E004, line, format!("%tim: {err}")),
                }
            }
            TierCode::INDEX if content.parse::<IndexTag>().is_err() => {
                self.error(DiagCode::E004, line, "malformed %ind tier")
            }
            _ => utterance.tiers.push(DependentTier::new(code, content)),
        }
    }

    fn finish(mut self, last_line: usize) -> Result<ChatDocument, Vec<Diagnostic>> {
        if !self.begun {
            self.error(DiagCode::E001, 1, "transcript must start with @Begin");
        }
        if !self.ended {
            self.error(DiagCode::E001, last_line, "transcript must end with @End");
        }
        let mut participants = match self.participants.take() {
            Some(list) => list,
            None => {
                self.error(DiagCode::E002, 1, "missing @Participants header");
                Vec::new()
            }
        };
        let roster_known = !participants.is_empty() && !self.roster_damaged;

        let mut seen = HashSet::new();
        for detail in std::mem::take(&mut self.details) {
            let Some(index) = participants.iter().position(|p| p.code.as_str() == detail.code) else {
                if roster_known {
                    self.error(
                        DiagCode::E009,
                        detail.line,
                        format!("header refers to undeclared participant {:?}", detail.code),
                    );
                }
                continue;
            };
            let slot = match detail.kind {
                DetailKind::Birth => 0,
                DetailKind::Age => 1,
                DetailKind::Ses => 2,
                DetailKind::Sex => 3,
            };
            if !seen.insert((index, slot)) {
                self.error(DiagCode::E007, detail.line, "duplicate participant header");
                continue;
            }
            let p = &mut participants[index];
            let value = detail.value.as_str();
            let ok = match detail.kind {
                DetailKind::Birth => parse_date(value).map(|d| p.birth = Some(d)).is_some(),
                DetailKind::Age => value.parse::<Age>().map(|a| p.age = Some(a)).is_ok(),
                DetailKind::Ses => is_clean_text(value).then(|| p.ses = Some(value.to_string())).is_some(),
                DetailKind::Sex => is_clean_text(value).then(|| p.sex = Some(value.to_string())).is_some(),
            };
            if !ok {
                self.error(DiagCode::E007, detail.line, format!("malformed value {value:?}"));
            }
        }

        if roster_known {
            for (line, speaker) in std::mem::take(&mut self.speakers) {
                if !participants.iter().any(|p| p.code == speaker) {
                    self.error(DiagCode::E003, line, format!("speaker {speaker} is not a declared participant"));
                }
            }
        }

        if self.diags.iter().any(Diagnostic::is_error) {
            sort_diagnostics(&mut self.diags);
            return Err(self.diags);
        }
        Ok(ChatDocument {
            participants,
            constant_headers: self.constant_headers,
            episodes: self.episodes,
            index_notes: self.notes,
        })
    }
}
