//! SLA-XML: the XML twin of a CHAT transcript shared by indexing and
//! transcription. The normative schema lives in `docs/sla-xml.xsd`; the
//! checks in [`from_sla_xml`] mirror it and report violations as E011.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::diagnostic::{DiagCode, Diagnostic};
use super::model::{
    is_ident, Age, ChatDocument, DependentTier, Episode, Header, IndexTag, Participant, ParticipantCode,
    TierCode, Terminator, Utterance,
};
use super::validate::validate;
use crate::span::TimeSpan;
use crate::xml::{self, Element};

/// Attributes of the `<occasion>` root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccasionMeta {
    pub id: String,
    pub title: String,
}

/// SLA-XML element tree of a document, for callers that add attributes
/// before writing.
pub fn to_sla_element(doc: &ChatDocument, meta: &OccasionMeta) -> Element {
    let mut root = Element::new("occasion").attr("id", &meta.id).attr("title", &meta.title);

    let mut participants = Element::new("participants");
    for p in &doc.participants {
        participants.push(
            Element::new("participant")
                .attr("code", &p.code)
                .attr("name", &p.name)
                .attr("role", &p.role)
                .opt_attr("birth", p.birth.map(|d| d.format("%Y-%m-%d")))
                .opt_attr("age", p.age)
                .opt_attr("ses", p.ses.as_ref())
                .opt_attr("sex", p.sex.as_ref()),
        );
    }
    root.push(participants);

    if !doc.constant_headers.is_empty() {
        let mut headers = Element::new("headers");
        for h in &doc.constant_headers {
            headers.push(header_element(h));
        }
        root.push(headers);
    }

    for episode in &doc.episodes {
        let mut ep = Element::new("episode");
        for h in &episode.changeable_headers {
            ep.push(header_element(h));
        }
        for utt in &episode.utterances {
            let mut u = Element::new("utterance")
                .attr("speaker", &utt.speaker)
                .opt_attr("start", utt.span.map(|s| s.start_ms()))
                .opt_attr("end", utt.span.map(|s| s.end_ms()))
                .attr("terminator", utt.terminator)
                .child(Element::new("text").with_text(utt.text()));
            for tier in &utt.tiers {
                match tier.content.parse::<IndexTag>() {
                    Ok(tag) if tier.code.as_str() == TierCode::INDEX => u.push(tag_element("index", &tag)),
                    _ => u.push(Element::new("tier").attr("code", &tier.code).with_text(&tier.content)),
                }
            }
            ep.push(u);
        }
        root.push(ep);
    }

    for note in &doc.index_notes {
        root.push(tag_element("comment", note));
    }
    root
}

fn header_element(h: &Header) -> Element {
    let value = match h {
        Header::Date(d) => d.format("%Y-%m-%d").to_string(),
        other => other.value_text().unwrap_or_default(),
    };
    Element::new("header").attr("kind", h.xml_kind()).with_text(value)
}

fn tag_element(name: &str, tag: &IndexTag) -> Element {
    Element::new(name)
        .attr("network", &tag.network)
        .attr("version", tag.version)
        .attr("span", tag.span)
        .with_text(tag.choices_text())
}

/// Serializes a document as SLA-XML. Lossless: [`from_sla_xml`] inverts it.
pub fn to_sla_xml(doc: &ChatDocument, meta: &OccasionMeta) -> String {
    to_sla_element(doc, meta).to_document()
}

/// Reads SLA-XML. Malformed XML yields E010, schema violations E011, and a
/// schema-valid document that breaks transcript rules yields the validator's
/// errors.
pub fn from_sla_xml(text: &str) -> Result<(OccasionMeta, ChatDocument), Vec<Diagnostic>> {
    let root = xml::parse(text).map_err(|e| vec![Diagnostic::new(DiagCode::E010, e.line, e.message)])?;
    from_sla_element(&root)
}

/// [`from_sla_xml`] for an already parsed tree.
pub fn from_sla_element(root: &Element) -> Result<(OccasionMeta, ChatDocument), Vec<Diagnostic>> {
    let (meta, doc) = read_occasion(root).map_err(|m| vec![Diagnostic::new(DiagCode::E011, 0, m)])?;
    let errors: Vec<Diagnostic> = validate(&doc).into_iter().filter(Diagnostic::is_error).collect();
    if errors.is_empty() {
        Ok((meta, doc))
    } else {
        Err(errors)
    }
}

type Schema<T> = Result<T, String>;

fn only_attrs(el: &Element, allowed: &[&str]) -> Schema<()> {
    match el.attrs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(format!("unexpected attribute {k:?} on <{}>", el.name)),
        None => Ok(()),
    }
}

fn required<'a>(el: &'a Element, key: &str) -> Schema<&'a str> {
    el.get(key).ok_or_else(|| format!("<{}> requires attribute {key:?}", el.name))
}

fn no_text(el: &Element) -> Schema<()> {
    match el.text.trim().is_empty() {
        true => Ok(()),
        false => Err(format!("<{}> must not contain text", el.name)),
    }
}

fn leaf(el: &Element) -> Schema<()> {
    match el.children.first() {
        Some(c) => Err(format!("<{}> must not contain <{}>", el.name, c.name)),
        None => Ok(()),
    }
}

fn uint<T: std::str::FromStr>(el: &Element, key: &str, value: &str) -> Schema<T> {
    if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("attribute {key:?} of <{}> must be a non-negative integer", el.name));
    }
    value.parse().map_err(|_| format!("attribute {key:?} of <{}> is out of range", el.name))
}

fn iso_date(el: &Element, key: &str, value: &str) -> Schema<NaiveDate> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|_| format!("attribute {key:?} of <{}> must be an ISO date", el.name))
}

fn read_occasion(root: &Element) -> Schema<(OccasionMeta, ChatDocument)> {
    if root.name != "occasion" {
        return Err(format!("root element must be <occasion>, found <{}>", root.name));
    }
    only_attrs(root, &["id", "title", "revision"])?;
    no_text(root)?;
    let meta = OccasionMeta {
        id: required(root, "id")?.to_string(),
        title: required(root, "title")?.to_string(),
    };
    if let Some(rev) = root.get("revision") {
        uint::<u64>(root, "revision", rev)?;
    }

    let mut children = root.children.iter().peekable();
    let participants_el = children
        .next_if(|c| c.name == "participants")
        .ok_or("<occasion> must start with <participants>")?;
    let participants = read_participants(participants_el)?;

    let mut constant_headers = Vec::new();
    if let Some(headers) = children.next_if(|c| c.name == "headers") {
        only_attrs(headers, &[])?;
        no_text(headers)?;
        if headers.children.is_empty() {
            return Err("<headers> must contain at least one <header>".into());
        }
        for h in &headers.children {
            let header = read_header(h)?;
            if header.is_changeable() {
                return Err(format!("header kind {:?} belongs in an <episode>", h.get("kind").unwrap_or("")));
            }
            constant_headers.push(header);
        }
    }

    let mut episodes = Vec::new();
    while let Some(ep) = children.next_if(|c| c.name == "episode") {
        episodes.push(read_episode(ep)?);
    }
    if episodes.is_empty() {
        return Err("<occasion> requires at least one <episode>".into());
    }

    let mut index_notes = Vec::new();
    while let Some(c) = children.next_if(|c| c.name == "comment") {
        index_notes.push(read_tag(c)?);
    }
    if let Some(extra) = children.next() {
        return Err(format!("unexpected <{}> in <occasion>", extra.name));
    }
    Ok((meta, ChatDocument { participants, constant_headers, episodes, index_notes }))
}

fn read_participants(el: &Element) -> Schema<Vec<Participant>> {
    only_attrs(el, &[])?;
    no_text(el)?;
    if el.children.is_empty() {
        return Err("<participants> must contain at least one <participant>".into());
    }
    el.children
        .iter()
        .map(|p| {
            if p.name != "participant" {
                return Err(format!("unexpected <{}> in <participants>", p.name));
            }
            only_attrs(p, &["code", "name", "role", "birth", "age", "ses", "sex"])?;
            leaf(p)?;
            no_text(p)?;
            let code = required(p, "code")?;
            let code = ParticipantCode::parse(code).ok_or_else(|| format!("participant code {code:?} must match [A-Z0-9]{{3}}"))?;
            let mut participant = Participant::new(code, required(p, "name")?, required(p, "role")?);
            participant.birth = p.get("birth").map(|v| iso_date(p, "birth", v)).transpose()?;
            participant.age = p
                .get("age")
                .map(|v| v.parse::<Age>().map_err(|_| format!("age {v:?} must be Y;MM.DD")))
                .transpose()?;
            participant.ses = p.get("ses").map(str::to_string);
            participant.sex = p.get("sex").map(str::to_string);
            Ok(participant)
        })
        .collect()
}

fn read_header(el: &Element) -> Schema<Header> {
    if el.name != "header" {
        return Err(format!("expected <header>, found <{}>", el.name));
    }
    only_attrs(el, &["kind"])?;
    leaf(el)?;
    let kind = required(el, "kind")?;
    let header = match kind {
        "date" => Header::Date(
            NaiveDate::parse_from_str(&el.text, "%Y-%m-%d").map_err(|_| "date header must hold an ISO date".to_string())?,
        ),
        "new-episode" => {
            no_text(el)?;
            Header::NewEpisode
        }
        _ => Header::from_xml(kind, &el.text).ok_or_else(|| format!("invalid header kind {kind:?} or value"))?,
    };
    Ok(header)
}

fn read_episode(el: &Element) -> Schema<Episode> {
    only_attrs(el, &[])?;
    no_text(el)?;
    let mut children = el.children.iter().peekable();
    let mut episode = Episode::default();
    while let Some(h) = children.next_if(|c| c.name == "header") {
        let header = read_header(h)?;
        if !header.is_changeable() {
            return Err(format!("header kind {:?} is not allowed in an <episode>", h.get("kind").unwrap_or("")));
        }
        episode.changeable_headers.push(header);
    }
    for u in children {
        if u.name != "utterance" {
            return Err(format!("unexpected <{}> in <episode>", u.name));
        }
        episode.utterances.push(read_utterance(u)?);
    }
    Ok(episode)
}

fn read_utterance(el: &Element) -> Schema<Utterance> {
    only_attrs(el, &["speaker", "start", "end", "terminator"])?;
    no_text(el)?;
    let speaker = required(el, "speaker")?;
    let speaker = ParticipantCode::parse(speaker).ok_or_else(|| format!("speaker {speaker:?} must match [A-Z0-9]{{3}}"))?;
    let terminator = required(el, "terminator")?;
    let terminator = Terminator::from_token(terminator).ok_or_else(|| format!("terminator {terminator:?} must be . ? or !"))?;
    let span = match (el.get("start"), el.get("end")) {
        (None, None) => None,
        (Some(s), Some(e)) => Some(
            TimeSpan::new(uint(el, "start", s)?, uint(el, "end", e)?).map_err(|e| e.to_string())?,
        ),
        _ => return Err("<utterance> needs both start and end, or neither".into()),
    };
    let mut children = el.children.iter();
    let text = children.next().filter(|c| c.name == "text").ok_or("<utterance> must start with <text>")?;
    only_attrs(text, &[])?;
    leaf(text)?;
    let mut tiers = Vec::new();
    for t in children {
        match t.name.as_str() {
            "tier" => {
                only_attrs(t, &["code"])?;
                leaf(t)?;
                let code = required(t, "code")?;
                let code = TierCode::parse(code)
                    .filter(|c| c.as_str() != TierCode::TIME && c.as_str() != TierCode::INDEX)
                    .ok_or_else(|| format!("tier code {code:?} must match [a-z]{{3}} and not be tim or ind"))?;
                tiers.push(DependentTier::new(code, t.text.clone()));
            }
            "index" => {
                let tag = read_tag(t)?;
                tiers.push(DependentTier::new(TierCode::parse(TierCode::INDEX).expect("valid"), tag.to_string()));
            }
            other => return Err(format!("unexpected <{other}> in <utterance>")),
        }
    }
    Ok(Utterance {
        speaker,
        words: text.text.split_whitespace().map(str::to_string).collect(),
        terminator,
        span,
        tiers,
    })
}

fn read_tag(el: &Element) -> Schema<IndexTag> {
    only_attrs(el, &["network", "version", "span"])?;
    leaf(el)?;
    let network = required(el, "network")?;
    if !is_ident(network) {
        return Err(format!("network id {network:?} is not an identifier"));
    }
    let version: u32 = uint(el, "version", required(el, "version")?)?;
    let span: TimeSpan = required(el, "span")?.parse().map_err(|e: crate::span::SpanError| e.to_string())?;
    let choices = IndexTag::parse_choices(&el.text).ok_or("selection text must be SYS=opt pairs")?;
    let tag = IndexTag { network: network.to_string(), version, choices, span };
    if !tag.is_well_formed() {
        return Err(format!("<{}> does not hold a well-formed selection", el.name));
    }
    Ok(tag)
}
