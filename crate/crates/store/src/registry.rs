//! Append-only contact, place and resource registries.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use sla_core::chat::{validate, Age, ChatDocument, Header, Participant, ParticipantCode};
use sla_core::xml::Element;

use crate::codec::{attr, opt_parsed, parsed, Decode};
use crate::{DocId, Result, Store, StoreError};

/// Fields a caller supplies for a contact revision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactDraft {
    pub code: String,
    pub name: String,
    pub role: String,
    #[serde(default)]
    pub birth: Option<NaiveDate>,
    #[serde(default)]
    pub age: Option<Age>,
    #[serde(default)]
    pub ses: Option<String>,
    #[serde(default)]
    pub sex: Option<String>,
}

/// One revision of a contact. Earlier revisions are never rewritten.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactRecord {
    pub contact_id: String,
    pub revision: u32,
    pub code: String,
    pub name: String,
    pub role: String,
    pub birth: Option<NaiveDate>,
    pub age: Option<Age>,
    pub ses: Option<String>,
    pub sex: Option<String>,
    pub valid_from: DateTime<Utc>,
}

impl ContactDraft {
    /// The participant entry this contact contributes to a transcript.
    pub fn to_participant(&self) -> Option<Participant> {
        let mut p = Participant::new(ParticipantCode::parse(&self.code)?, self.name.clone(), self.role.clone());
        p.birth = self.birth;
        p.age = self.age;
        p.ses = self.ses.clone();
        p.sex = self.sex.clone();
        Some(p)
    }

    /// Rejects anything that could not appear in a valid `@Participants`
    /// header.
    fn check(&self) -> Result<Participant> {
        let invalid = |message: String| StoreError::Invalid { doc: "contact".into(), message };
        let participant = self.to_participant().ok_or_else(|| invalid(format!("malformed participant code {:?}", self.code)))?;
        let errors: Vec<String> = validate(&ChatDocument::new(vec![participant.clone()]))
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.message)
            .collect();
        match errors.is_empty() {
            true => Ok(participant),
            false => Err(invalid(errors.join("; "))),
        }
    }
}

impl ContactRecord {
    pub fn draft(&self) -> ContactDraft {
        ContactDraft {
            code: self.code.clone(),
            name: self.name.clone(),
            role: self.role.clone(),
            birth: self.birth,
            age: self.age,
            ses: self.ses.clone(),
            sex: self.sex.clone(),
        }
    }

    pub fn to_participant(&self) -> Participant {
        self.draft().to_participant().expect("stored contacts are checked")
    }

    fn to_xml(&self) -> Element {
        Element::new("contact")
            .attr("id", &self.contact_id)
            .attr("revision", self.revision)
            .attr("code", &self.code)
            .attr("name", &self.name)
            .attr("role", &self.role)
            .opt_attr("birth", self.birth)
            .opt_attr("age", self.age)
            .opt_attr("ses", self.ses.as_ref())
            .opt_attr("sex", self.sex.as_ref())
            .attr("valid-from", self.valid_from.to_rfc3339())
    }

    fn from_xml(el: &Element) -> Decode<Self> {
        Ok(ContactRecord {
            contact_id: attr(el, "id")?.to_string(),
            revision: parsed(el, "revision")?,
            code: attr(el, "code")?.to_string(),
            name: attr(el, "name")?.to_string(),
            role: attr(el, "role")?.to_string(),
            birth: opt_parsed(el, "birth")?,
            age: opt_parsed(el, "age")?,
            ses: el.get("ses").map(str::to_string),
            sex: el.get("sex").map(str::to_string),
            valid_from: DateTime::parse_from_rfc3339(attr(el, "valid-from")?)
                .map_err(|e| format!("valid-from: {e}"))?
                .with_timezone(&Utc),
        })
    }
}

pub(crate) fn contacts_from_xml(el: &Element) -> Decode<Vec<ContactRecord>> {
    let records: Vec<ContactRecord> = el.elements("contact").map(ContactRecord::from_xml).collect::<Decode<_>>()?;
    for (i, r) in records.iter().enumerate() {
        let previous = records[..i].iter().filter(|p| p.contact_id == r.contact_id).count() as u32;
        if r.revision != previous + 1 {
            return Err(format!("contact {} revision {} out of sequence", r.contact_id, r.revision));
        }
    }
    Ok(records)
}

/// Situation details that fill the changeable headers of an episode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceDraft {
    #[serde(default)]
    pub situation: Option<String>,
    #[serde(default)]
    pub activities: Option<String>,
    #[serde(default)]
    pub room_layout: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub place_id: String,
    pub situation: Option<String>,
    pub activities: Option<String>,
    pub room_layout: Option<String>,
}

impl PlaceRecord {
    /// `@Situation`, `@Activities` and `@Room Layout` headers for this place.
    pub fn headers(&self) -> Vec<Header> {
        let mut out = Vec::new();
        out.extend(self.situation.clone().map(Header::Situation));
        out.extend(self.activities.clone().map(Header::Activities));
        out.extend(self.room_layout.clone().map(Header::RoomLayout));
        out
    }

    fn to_xml(&self) -> Element {
        Element::new("place")
            .attr("id", &self.place_id)
            .opt_attr("situation", self.situation.as_ref())
            .opt_attr("activities", self.activities.as_ref())
            .opt_attr("room-layout", self.room_layout.as_ref())
    }

    fn from_xml(el: &Element) -> Decode<Self> {
        let place = PlaceRecord {
            place_id: attr(el, "id")?.to_string(),
            situation: el.get("situation").map(str::to_string),
            activities: el.get("activities").map(str::to_string),
            room_layout: el.get("room-layout").map(str::to_string),
        };
        match place.headers().is_empty() {
            true => Err(format!("place {} has no fields", place.place_id)),
            false => Ok(place),
        }
    }
}

pub(crate) fn places_from_xml(el: &Element) -> Decode<Vec<PlaceRecord>> {
    let places: Vec<PlaceRecord> = el.elements("place").map(PlaceRecord::from_xml).collect::<Decode<_>>()?;
    let mut ids: Vec<&str> = places.iter().map(|p| p.place_id.as_str()).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(format!("place id {} repeated", w[0])),
        None => Ok(places),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Text,
    Image,
    Audio,
    Video,
    Other,
}

impl ResourceKind {
    fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Text => "text",
            ResourceKind::Image => "image",
            ResourceKind::Audio => "audio",
            ResourceKind::Video => "video",
            ResourceKind::Other => "other",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::Text, Self::Image, Self::Audio, Self::Video, Self::Other].into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceDraft {
    pub kind: ResourceKind,
    pub location: String,
    #[serde(default)]
    pub description: String,
    pub collected_at: DateTime<Utc>,
    #[serde(default)]
    pub occasion_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRecord {
    pub resource_id: String,
    pub kind: ResourceKind,
    pub location: String,
    pub description: String,
    pub collected_at: DateTime<Utc>,
    pub occasion_ids: Vec<String>,
}

impl ResourceRecord {
    fn to_xml(&self) -> Element {
        let mut el = Element::new("resource")
            .attr("id", &self.resource_id)
            .attr("kind", self.kind.as_str())
            .attr("location", &self.location)
            .attr("collected-at", self.collected_at.to_rfc3339());
        if !self.description.is_empty() {
            el.push(Element::new("description").with_text(&self.description));
        }
        for occasion in &self.occasion_ids {
            el.push(Element::new("occasion").attr("ref", occasion));
        }
        el
    }

    fn from_xml(el: &Element) -> Decode<Self> {
        Ok(ResourceRecord {
            resource_id: attr(el, "id")?.to_string(),
            kind: ResourceKind::parse(attr(el, "kind")?).ok_or("unknown resource kind")?,
            location: attr(el, "location")?.to_string(),
            description: el.first("description").map(|d| d.text.clone()).unwrap_or_default(),
            collected_at: DateTime::parse_from_rfc3339(attr(el, "collected-at")?)
                .map_err(|e| format!("collected-at: {e}"))?
                .with_timezone(&Utc),
            occasion_ids: el.elements("occasion").map(|o| attr(o, "ref").map(str::to_string)).collect::<Decode<_>>()?,
        })
    }
}

pub(crate) fn resources_from_xml(el: &Element) -> Decode<Vec<ResourceRecord>> {
    el.elements("resource").map(ResourceRecord::from_xml).collect()
}

fn next_id(prefix: &str, taken: impl Iterator<Item = String>) -> String {
    let max = taken.filter_map(|id| id.strip_prefix(prefix).and_then(|n| n.parse::<u64>().ok())).max().unwrap_or(0);
    format!("{prefix}{:04}", max + 1)
}

fn decode_err(doc: DocId) -> impl Fn(String) -> StoreError {
    move |message| StoreError::Invalid { doc: doc.to_string(), message }
}

fn nonblank(value: Option<String>) -> Option<String> {
    value.map(|v| v.trim().to_string()).filter(|v| !v.is_empty())
}

impl Store {
    /// Appends a contact revision. With `contact_id`, the contact must exist
    /// and gets its next revision; without, a new contact starts at
    /// revision 1. Identical content still appends.
    pub fn upsert_contact(&self, contact_id: Option<&str>, draft: ContactDraft, now: DateTime<Utc>) -> Result<ContactRecord> {
        draft.check()?;
        let (_, record) = self.update(&DocId::Contacts, |current| {
            let mut root = current.unwrap_or_else(|| Element::new("contacts"));
            let records = contacts_from_xml(&root).map_err(decode_err(DocId::Contacts))?;
            let (id, revision) = match contact_id {
                Some(id) => {
                    let last = records.iter().filter(|r| r.contact_id == id).map(|r| r.revision).max();
                    (id.to_string(), last.ok_or_else(|| StoreError::NotFound(format!("contact {id}")))? + 1)
                }
                None => (next_id("c", records.iter().map(|r| r.contact_id.clone())), 1),
            };
            let record = ContactRecord {
                contact_id: id,
                revision,
                code: draft.code,
                name: draft.name,
                role: draft.role,
                birth: draft.birth,
                age: draft.age,
                ses: draft.ses,
                sex: draft.sex,
                valid_from: now,
            };
            root.push(record.to_xml());
            Ok((root, record))
        })?;
        Ok(record)
    }

    /// Every revision of every contact, in the order written.
    pub fn contact_log(&self) -> Result<Vec<ContactRecord>> {
        let (el, _) = self.get_document(&DocId::Contacts)?;
        contacts_from_xml(&el).map_err(decode_err(DocId::Contacts))
    }

    pub fn contact_history(&self, contact_id: &str) -> Result<Vec<ContactRecord>> {
        let history: Vec<_> = self.contact_log()?.into_iter().filter(|r| r.contact_id == contact_id).collect();
        match history.is_empty() {
            true => Err(StoreError::NotFound(format!("contact {contact_id}"))),
            false => Ok(history),
        }
    }

    /// Latest revision of a contact.
    pub fn contact(&self, contact_id: &str) -> Result<ContactRecord> {
        Ok(self.contact_history(contact_id)?.pop().expect("history is non-empty"))
    }

    /// Latest revision of every contact, by id.
    pub fn contacts(&self) -> Result<Vec<ContactRecord>> {
        let mut latest: std::collections::BTreeMap<String, ContactRecord> = Default::default();
        for r in self.contact_log()? {
            latest.insert(r.contact_id.clone(), r);
        }
        Ok(latest.into_values().collect())
    }

    pub fn add_place(&self, draft: PlaceDraft) -> Result<PlaceRecord> {
        let draft = PlaceDraft {
            situation: nonblank(draft.situation),
            activities: nonblank(draft.activities),
            room_layout: nonblank(draft.room_layout),
        };
        if draft.situation.is_none() && draft.activities.is_none() && draft.room_layout.is_none() {
            return Err(StoreError::MissingField("situation, activities or room_layout"));
        }
        let (_, place) = self.update(&DocId::Places, |current| {
            let mut root = current.unwrap_or_else(|| Element::new("places"));
            let places = places_from_xml(&root).map_err(decode_err(DocId::Places))?;
            let place = PlaceRecord {
                place_id: next_id("pl", places.iter().map(|p| p.place_id.clone())),
                situation: draft.situation,
                activities: draft.activities,
                room_layout: draft.room_layout,
            };
            root.push(place.to_xml());
            Ok((root, place))
        })?;
        Ok(place)
    }

    pub fn places(&self) -> Result<Vec<PlaceRecord>> {
        let (el, _) = self.get_document(&DocId::Places)?;
        places_from_xml(&el).map_err(decode_err(DocId::Places))
    }

    pub fn place(&self, place_id: &str) -> Result<PlaceRecord> {
        self.places()?
            .into_iter()
            .find(|p| p.place_id == place_id)
            .ok_or_else(|| StoreError::NotFound(format!("place {place_id}")))
    }

    pub fn log_resource(&self, draft: ResourceDraft) -> Result<ResourceRecord> {
        if draft.location.trim().is_empty() {
            return Err(StoreError::MissingField("location"));
        }
        for occasion in &draft.occasion_ids {
            if !self.exists(&DocId::Occasion(occasion.clone())) {
                return Err(StoreError::NotFound(format!("occasion {occasion}")));
            }
        }
        let (_, record) = self.update(&DocId::Resources, |current| {
            let mut root = current.unwrap_or_else(|| Element::new("resources"));
            let records = resources_from_xml(&root).map_err(decode_err(DocId::Resources))?;
            let record = ResourceRecord {
                resource_id: next_id("r", records.iter().map(|r| r.resource_id.clone())),
                kind: draft.kind,
                location: draft.location,
                description: draft.description,
                collected_at: draft.collected_at,
                occasion_ids: draft.occasion_ids,
            };
            root.push(record.to_xml());
            Ok((root, record))
        })?;
        Ok(record)
    }

    pub fn resources(&self) -> Result<Vec<ResourceRecord>> {
        let (el, _) = self.get_document(&DocId::Resources)?;
        resources_from_xml(&el).map_err(decode_err(DocId::Resources))
    }

    pub fn resource(&self, resource_id: &str) -> Result<ResourceRecord> {
        self.resources()?
            .into_iter()
            .find(|r| r.resource_id == resource_id)
            .ok_or_else(|| StoreError::NotFound(format!("resource {resource_id}")))
    }

    /// The resource log is append-only.
    pub fn delete_resource(&self, _resource_id: &str) -> Result<()> {
        Err(StoreError::Unsupported("deleting from the resource log"))
    }
}
