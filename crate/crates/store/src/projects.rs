//! Project index, project files, occasions, event logs and networks.

use std::fs;

use serde::{Deserialize, Serialize};
use sla_core::chat::{from_sla_element, to_sla_element, ChatDocument, OccasionMeta};
use sla_core::index::{IndexEvent, SystemNetwork};
use sla_core::xml::Element;

use crate::codec::{self, attr, Decode};
use crate::{is_valid_id, DocId, Result, Store, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectEntry {
    pub project_id: String,
    pub title: String,
    /// Project file location relative to the store root.
    pub path: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectIndex {
    pub entries: Vec<ProjectEntry>,
}

impl ProjectIndex {
    fn to_xml(&self) -> Element {
        let mut root = Element::new("project-index");
        for e in &self.entries {
            root.push(Element::new("project").attr("id", &e.project_id).attr("title", &e.title).attr("path", &e.path));
        }
        root
    }

    pub(crate) fn from_xml(el: &Element) -> Decode<Self> {
        let entries: Vec<ProjectEntry> = el
            .elements("project")
            .map(|p| {
                Ok(ProjectEntry {
                    project_id: attr(p, "id")?.to_string(),
                    title: attr(p, "title")?.to_string(),
                    path: attr(p, "path")?.to_string(),
                })
            })
            .collect::<Decode<_>>()?;
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|p| p.project_id == e.project_id) {
                return Err(format!("project id {} listed twice", e.project_id));
            }
        }
        Ok(ProjectIndex { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectFile {
    pub project_id: String,
    pub title: String,
    pub occasion_links: Vec<String>,
    pub resource_inventory: Vec<String>,
}

impl ProjectFile {
    fn to_xml(&self) -> Element {
        let mut root = Element::new("project").attr("id", &self.project_id).attr("title", &self.title);
        for o in &self.occasion_links {
            root.push(Element::new("occasion").attr("ref", o));
        }
        for r in &self.resource_inventory {
            root.push(Element::new("resource").attr("ref", r));
        }
        root
    }

    pub(crate) fn from_xml(el: &Element) -> Decode<Self> {
        let refs = |name: &str| el.elements(name).map(|c| attr(c, "ref").map(str::to_string)).collect::<Decode<Vec<_>>>();
        Ok(ProjectFile {
            project_id: attr(el, "id")?.to_string(),
            title: attr(el, "title")?.to_string(),
            occasion_links: refs("occasion")?,
            resource_inventory: refs("resource")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkOutcome {
    Linked,
    AlreadyLinked,
    Unlinked,
    NotLinked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccasionSummary {
    pub occasion_id: String,
    pub title: String,
    pub revision: u64,
}

/// Findings of [`Store::integrity_check`]; empty lists mean consistent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityReport {
    /// Indexed projects whose file is missing or unreadable.
    pub unreadable_projects: Vec<String>,
    /// `(project, occasion)` links to occasions that do not exist.
    pub dangling_occasion_links: Vec<(String, String)>,
    /// `(project, resource)` inventory entries missing from the log.
    pub dangling_resource_links: Vec<(String, String)>,
    /// Project directories the index does not list.
    pub unindexed_projects: Vec<String>,
}

impl IntegrityReport {
    pub fn is_clean(&self) -> bool {
        self.unreadable_projects.is_empty()
            && self.dangling_occasion_links.is_empty()
            && self.dangling_resource_links.is_empty()
            && self.unindexed_projects.is_empty()
    }
}

fn decode_err(doc: &DocId) -> impl Fn(String) -> StoreError + '_ {
    move |message| StoreError::Invalid { doc: doc.to_string(), message }
}

fn next_number(prefix: &str, ids: impl Iterator<Item = String>) -> u64 {
    ids.filter_map(|id| id.strip_prefix(prefix).and_then(|n| n.parse::<u64>().ok())).max().unwrap_or(0) + 1
}

impl Store {
    pub fn project_index(&self) -> Result<(ProjectIndex, u64)> {
        let id = DocId::ProjectIndex;
        let (el, rev) = self.get_document(&id)?;
        Ok((ProjectIndex::from_xml(&el).map_err(decode_err(&id))?, rev))
    }

    pub fn list_projects(&self) -> Result<Vec<ProjectEntry>> {
        Ok(self.project_index()?.0.entries)
    }

    /// Writes a new project file and lists it in the index, provided the
    /// index is still at `index_revision`.
    pub fn create_project(&self, title: &str, index_revision: u64) -> Result<ProjectFile> {
        let title = title.trim();
        if title.is_empty() {
            return Err(StoreError::MissingField("title"));
        }
        let index_id = DocId::ProjectIndex;
        let lock = self.lock_for(&index_id);
        let _guard = lock.lock().expect("document lock");
        let (mut index, found) = self.project_index()?;
        if found != index_revision {
            return Err(StoreError::Conflict { doc: index_id.to_string(), expected: index_revision, found });
        }
        let on_disk = fs::read_dir(self.root.join("projects"))?.filter_map(|e| e.ok()?.file_name().into_string().ok());
        let listed = index.entries.iter().map(|e| e.project_id.clone());
        let project_id = format!("p{:04}", next_number("p", on_disk.chain(listed)));
        let project = ProjectFile {
            project_id: project_id.clone(),
            title: title.to_string(),
            occasion_links: vec![],
            resource_inventory: vec![],
        };
        self.put_document(&DocId::Project(project_id.clone()), project.to_xml(), 0)?;
        index.entries.push(ProjectEntry { project_id: project_id.clone(), title: title.to_string(), path: format!("projects/{project_id}/project.xml") });
        self.put_locked(&index_id, index.to_xml(), found)?;
        Ok(project)
    }

    pub fn project(&self, project_id: &str) -> Result<(ProjectFile, u64)> {
        if !is_valid_id(project_id) {
            return Err(StoreError::NotFound(format!("project {project_id}")));
        }
        let id = DocId::Project(project_id.to_string());
        let (el, rev) = self.get_document(&id)?;
        Ok((ProjectFile::from_xml(&el).map_err(decode_err(&id))?, rev))
    }

    fn edit_project(&self, project_id: &str, change: impl FnOnce(&mut ProjectFile) -> LinkOutcome) -> Result<(ProjectFile, LinkOutcome)> {
        if !is_valid_id(project_id) {
            return Err(StoreError::NotFound(format!("project {project_id}")));
        }
        let id = DocId::Project(project_id.to_string());
        let (_, out) = self.update(&id, |current| {
            let el = current.ok_or_else(|| StoreError::NotFound(format!("project {project_id}")))?;
            let mut project = ProjectFile::from_xml(&el).map_err(decode_err(&id))?;
            let outcome = change(&mut project);
            Ok((project.to_xml(), (project, outcome)))
        })?;
        Ok(out)
    }

    /// Adds an occasion to a project. Linking twice is a reported no-op; the
    /// occasion itself is not touched and may belong to other projects.
    pub fn link_occasion(&self, project_id: &str, occasion_id: &str) -> Result<(ProjectFile, LinkOutcome)> {
        self.occasion_meta(occasion_id)?;
        self.edit_project(project_id, |p| {
            if p.occasion_links.iter().any(|o| o == occasion_id) {
                return LinkOutcome::AlreadyLinked;
            }
            p.occasion_links.push(occasion_id.to_string());
            LinkOutcome::Linked
        })
    }

    pub fn unlink_occasion(&self, project_id: &str, occasion_id: &str) -> Result<(ProjectFile, LinkOutcome)> {
        self.edit_project(project_id, |p| {
            let before = p.occasion_links.len();
            p.occasion_links.retain(|o| o != occasion_id);
            match p.occasion_links.len() < before {
                true => LinkOutcome::Unlinked,
                false => LinkOutcome::NotLinked,
            }
        })
    }

    /// Adds a logged resource to a project's inventory; idempotent.
    pub fn link_resource(&self, project_id: &str, resource_id: &str) -> Result<(ProjectFile, LinkOutcome)> {
        self.resource(resource_id)?;
        self.edit_project(project_id, |p| {
            if p.resource_inventory.iter().any(|r| r == resource_id) {
                return LinkOutcome::AlreadyLinked;
            }
            p.resource_inventory.push(resource_id.to_string());
            LinkOutcome::Linked
        })
    }

    /// Stores a new occasion with an empty event log. The transcript must
    /// validate.
    pub fn create_occasion(&self, title: &str, doc: &ChatDocument) -> Result<OccasionMeta> {
        let dir = self.root.join("occasions");
        fs::create_dir_all(&dir)?;
        let taken = fs::read_dir(&dir)?.filter_map(|e| e.ok()?.file_name().into_string().ok());
        let mut n = next_number("o", taken);
        let occasion_id = loop {
            let id = format!("o{n:04}");
            match fs::create_dir(dir.join(&id)) {
                Ok(()) => break id,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => n += 1,
                Err(e) => return Err(e.into()),
            }
        };
        let meta = OccasionMeta { id: occasion_id.clone(), title: title.to_string() };
        self.put_document(&DocId::Occasion(occasion_id.clone()), to_sla_element(doc, &meta), 0)?;
        self.put_document(&DocId::Events(occasion_id.clone()), codec::events_to_xml(&occasion_id, &[]), 0)?;
        Ok(meta)
    }

    pub fn occasion(&self, occasion_id: &str) -> Result<(OccasionMeta, ChatDocument, u64)> {
        if !is_valid_id(occasion_id) {
            return Err(StoreError::NotFound(format!("occasion {occasion_id}")));
        }
        let (el, rev) = self.get_document(&DocId::Occasion(occasion_id.to_string()))?;
        let (meta, doc) = from_sla_element(&el).map_err(StoreError::InvalidTranscript)?;
        Ok((meta, doc, rev))
    }

    fn occasion_meta(&self, occasion_id: &str) -> Result<OccasionMeta> {
        Ok(self.occasion(occasion_id)?.0)
    }

    /// Stored SLA-XML text, verbatim.
    pub fn occasion_xml(&self, occasion_id: &str) -> Result<String> {
        self.occasion(occasion_id)?;
        Ok(fs::read_to_string(self.path(&DocId::Occasion(occasion_id.to_string())))?)
    }

    pub fn put_occasion(&self, meta: &OccasionMeta, doc: &ChatDocument, expected: u64) -> Result<u64> {
        self.put_document(&DocId::Occasion(meta.id.clone()), to_sla_element(doc, meta), expected)
    }

    pub fn list_occasions(&self) -> Result<Vec<OccasionSummary>> {
        let mut ids: Vec<String> = fs::read_dir(self.root.join("occasions"))?
            .filter_map(|e| e.ok()?.file_name().into_string().ok())
            .filter(|id| is_valid_id(id) && self.exists(&DocId::Occasion(id.clone())))
            .collect();
        ids.sort();
        ids.into_iter()
            .map(|id| {
                let (meta, _, revision) = self.occasion(&id)?;
                Ok(OccasionSummary { occasion_id: meta.id, title: meta.title, revision })
            })
            .collect()
    }

    pub fn events(&self, occasion_id: &str) -> Result<(Vec<IndexEvent>, u64)> {
        if !is_valid_id(occasion_id) {
            return Err(StoreError::NotFound(format!("events of {occasion_id}")));
        }
        let id = DocId::Events(occasion_id.to_string());
        let (el, rev) = self.get_document(&id)?;
        Ok((codec::events_from_xml(&el).map_err(decode_err(&id))?, rev))
    }

    /// Appends to an occasion's event log if it is still at `expected`.
    /// Event ids must be unique within the log.
    pub fn append_event(&self, event: &IndexEvent, expected: u64) -> Result<u64> {
        let id = DocId::Events(event.occasion_id.clone());
        let lock = self.lock_for(&id);
        let _guard = lock.lock().expect("document lock");
        let (mut events, found) = self.events(&event.occasion_id)?;
        if found != expected {
            return Err(StoreError::Conflict { doc: id.to_string(), expected, found });
        }
        if events.iter().any(|e| e.event_id == event.event_id) {
            return Err(StoreError::Invalid { doc: id.to_string(), message: format!("event id {} already used", event.event_id) });
        }
        events.push(event.clone());
        self.put_locked(&id, codec::events_to_xml(&event.occasion_id, &events), found)
    }

    pub fn network(&self, network_id: &str) -> Result<(SystemNetwork, u64)> {
        if !is_valid_id(network_id) {
            return Err(StoreError::NotFound(format!("network {network_id}")));
        }
        let id = DocId::Network(network_id.to_string());
        let (el, rev) = self.get_document(&id)?;
        Ok((codec::network_from_xml(&el).map_err(decode_err(&id))?, rev))
    }

    /// Stores a network. An existing network may only gain versions or a
    /// tombstone; stored versions are never altered or dropped.
    pub fn save_network(&self, network: &SystemNetwork, expected: u64) -> Result<u64> {
        if !is_valid_id(network.id()) {
            return Err(StoreError::Invalid { doc: "network".into(), message: format!("bad id {:?}", network.id()) });
        }
        let id = DocId::Network(network.id().to_string());
        let lock = self.lock_for(&id);
        let _guard = lock.lock().expect("document lock");
        if expected > 0 {
            let (stored, found) = self.network(network.id())?;
            if found != expected {
                return Err(StoreError::Conflict { doc: id.to_string(), expected, found });
            }
            let kept = network.versions().get(..stored.versions().len()) == Some(stored.versions());
            if !kept || (stored.is_deleted() && !network.is_deleted()) {
                return Err(StoreError::Unsupported("rewriting stored network versions"));
            }
        }
        self.put_locked(&id, codec::network_to_xml(network), expected)
    }

    pub fn networks(&self) -> Result<Vec<SystemNetwork>> {
        let mut ids: Vec<String> = fs::read_dir(self.root.join("networks"))?
            .filter_map(|e| e.ok()?.file_name().into_string().ok())
            .filter(|id| is_valid_id(id) && self.exists(&DocId::Network(id.clone())))
            .collect();
        ids.sort();
        ids.iter().map(|id| Ok(self.network(id)?.0)).collect()
    }

    /// Scans the index, every project file and its links.
    pub fn integrity_check(&self) -> Result<IntegrityReport> {
        let mut report = IntegrityReport::default();
        let (index, _) = self.project_index()?;
        let resources: Vec<String> = self.resources()?.into_iter().map(|r| r.resource_id).collect();
        for entry in &index.entries {
            let project = match self.project(&entry.project_id) {
                Ok((p, _)) => p,
                Err(_) => {
                    report.unreadable_projects.push(entry.project_id.clone());
                    continue;
                }
            };
            for o in &project.occasion_links {
                if self.occasion(o).is_err() {
                    report.dangling_occasion_links.push((project.project_id.clone(), o.clone()));
                }
            }
            for r in &project.resource_inventory {
                if !resources.contains(r) {
                    report.dangling_resource_links.push((project.project_id.clone(), r.clone()));
                }
            }
        }
        for dir in fs::read_dir(self.root.join("projects"))? {
            let name = dir?.file_name().to_string_lossy().into_owned();
            if !index.entries.iter().any(|e| e.project_id == name) {
                report.unindexed_projects.push(name);
            }
        }
        report.unindexed_projects.sort();
        Ok(report)
    }
}
