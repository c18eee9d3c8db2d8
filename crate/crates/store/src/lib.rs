//! A plain XML file system for projects, occasions, media and registries.
//!
//! Every document carries its revision as a `revision` attribute on the root
//! element. Writes name the revision they were based on and fail with
//! [`StoreError::Conflict`] when it is stale; content lands through a temp
//! file and a rename, so readers never see a partial document.
//!
//! Layout under the root:
//!
//! ```text
//! project-index.xml
//! projects/<id>/project.xml
//! occasions/<id>/occasion.xml, events.xml, media/media.xml, media/<hash>.wav, <hash>.slawf
//! contacts.xml, places.xml, resources.xml
//! networks/<id>/network.xml
//! ```

mod atomic;
mod codec;
mod media;
mod projects;
mod registry;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sla_core::chat::{from_sla_element, Diagnostic};
use sla_core::index::IndexError;
use sla_core::media::MediaError;
use sla_core::xml::{self, Element};
use thiserror::Error;

pub use atomic::FaultPoint;
pub use media::MediaInfo;
pub use projects::{IntegrityReport, LinkOutcome, OccasionSummary, ProjectEntry, ProjectFile, ProjectIndex};
pub use registry::{ContactDraft, ContactRecord, PlaceDraft, PlaceRecord, ResourceDraft, ResourceKind, ResourceRecord};

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store already initialized at {0}")]
    AlreadyInitialized(PathBuf),
    #[error("no store at {0}")]
    NotInitialized(PathBuf),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{doc} is at revision {found}, write was based on {expected}")]
    Conflict { doc: String, expected: u64, found: u64 },
    #[error("invalid {doc}: {message}")]
    Invalid { doc: String, message: String },
    #[error("transcript does not validate")]
    InvalidTranscript(Vec<Diagnostic>),
    #[error("missing required field {0}")]
    MissingField(&'static str),
    #[error("{0} is not supported")]
    Unsupported(&'static str),
    #[error("write to {doc} interrupted at {point:?}")]
    Interrupted { doc: String, point: FaultPoint },
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Addresses one revisioned document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DocId {
    ProjectIndex,
    Project(String),
    Occasion(String),
    Events(String),
    Media(String),
    Contacts,
    Places,
    Resources,
    Network(String),
}

impl DocId {
    fn relative_path(&self) -> PathBuf {
        match self {
            DocId::ProjectIndex => "project-index.xml".into(),
            DocId::Project(id) => Path::new("projects").join(id).join("project.xml"),
            DocId::Occasion(id) => Path::new("occasions").join(id).join("occasion.xml"),
            DocId::Events(id) => Path::new("occasions").join(id).join("events.xml"),
            DocId::Media(id) => Path::new("occasions").join(id).join("media").join("media.xml"),
            DocId::Contacts => "contacts.xml".into(),
            DocId::Places => "places.xml".into(),
            DocId::Resources => "resources.xml".into(),
            DocId::Network(id) => Path::new("networks").join(id).join("network.xml"),
        }
    }

    /// Root element name of the document class.
    fn root_name(&self) -> &'static str {
        match self {
            DocId::ProjectIndex => "project-index",
            DocId::Project(_) => "project",
            DocId::Occasion(_) => "occasion",
            DocId::Events(_) => "events",
            DocId::Media(_) => "media",
            DocId::Contacts => "contacts",
            DocId::Places => "places",
            DocId::Resources => "resources",
            DocId::Network(_) => "network",
        }
    }

    fn id(&self) -> Option<&str> {
        match self {
            DocId::Project(id) | DocId::Occasion(id) | DocId::Events(id) | DocId::Media(id) | DocId::Network(id) => Some(id),
            _ => None,
        }
    }
}

impl std::fmt::Display for DocId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.id() {
            Some(id) => write!(f, "{}/{id}", self.root_name()),
            None => f.write_str(self.root_name()),
        }
    }
}

/// Ids are used as directory names.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'-' || c == b'_')
}

pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<DocId, Arc<Mutex<()>>>>,
    fault: Mutex<Option<FaultPoint>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("root", &self.root).finish_non_exhaustive()
    }
}

fn revision_of(el: &Element) -> u64 {
    el.get("revision").and_then(|r| r.parse().ok()).unwrap_or(0)
}

impl Store {
    /// Creates the layout and an empty project index in an empty or absent
    /// directory.
    pub fn init(root: impl AsRef<Path>) -> Result<Store> {
        let root = root.as_ref().to_path_buf();
        if root.join(DocId::ProjectIndex.relative_path()).exists() {
            return Err(StoreError::AlreadyInitialized(root));
        }
        if root.exists() && fs::read_dir(&root)?.next().is_some() {
            return Err(StoreError::AlreadyInitialized(root));
        }
        for dir in ["projects", "occasions", "networks"] {
            fs::create_dir_all(root.join(dir))?;
        }
        let store = Store::bare(root);
        store.put_document(&DocId::ProjectIndex, Element::new("project-index"), 0)?;
        for id in [DocId::Contacts, DocId::Places, DocId::Resources] {
            store.put_document(&id, Element::new(id.root_name()), 0)?;
        }
        Ok(store)
    }

    /// Opens an initialized store, discarding temp files left by
    /// interrupted writes.
    pub fn open(root: impl AsRef<Path>) -> Result<Store> {
        let root = root.as_ref().to_path_buf();
        if !root.join(DocId::ProjectIndex.relative_path()).is_file() {
            return Err(StoreError::NotInitialized(root));
        }
        atomic::remove_stale_temps(&root)?;
        Ok(Store::bare(root))
    }

    fn bare(root: PathBuf) -> Store {
        Store { root, locks: Mutex::new(HashMap::new()), fault: Mutex::new(None) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, id: &DocId) -> PathBuf {
        self.root.join(id.relative_path())
    }

    /// Makes the next document write stop at `point`.
    pub fn inject_fault(&self, point: FaultPoint) {
        *self.fault.lock().expect("fault lock") = Some(point);
    }

    fn lock_for(&self, id: &DocId) -> Arc<Mutex<()>> {
        self.locks.lock().expect("lock table").entry(id.clone()).or_default().clone()
    }

    /// Latest committed content and its revision.
    pub fn get_document(&self, id: &DocId) -> Result<(Element, u64)> {
        let text = match fs::read_to_string(self.path(id)) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let el = xml::parse(&text).map_err(|e| StoreError::Invalid { doc: id.to_string(), message: e.to_string() })?;
        let revision = revision_of(&el);
        Ok((el, revision))
    }

    pub fn exists(&self, id: &DocId) -> bool {
        self.path(id).is_file()
    }

    fn stored_revision(&self, id: &DocId) -> Result<u64> {
        match self.get_document(id) {
            Ok((_, rev)) => Ok(rev),
            Err(StoreError::NotFound(_)) => Ok(0),
            Err(e) => Err(e),
        }
    }

    /// Writes `content` if the stored revision equals `expected` (0 for a
    /// new document). Returns the new revision, `expected + 1`.
    pub fn put_document(&self, id: &DocId, content: Element, expected: u64) -> Result<u64> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().expect("document lock");
        self.put_locked(id, content, expected)
    }

    fn put_locked(&self, id: &DocId, mut content: Element, expected: u64) -> Result<u64> {
        check_class(id, &content)?;
        let found = self.stored_revision(id)?;
        if found != expected {
            return Err(StoreError::Conflict { doc: id.to_string(), expected, found });
        }
        let revision = expected + 1;
        content.set_attr("revision", revision);
        let fault = self.fault.lock().expect("fault lock").take();
        match atomic::write_atomic(&self.path(id), content.to_document().as_bytes(), fault)? {
            Ok(()) => Ok(revision),
            Err(point) => Err(StoreError::Interrupted { doc: id.to_string(), point }),
        }
    }

    /// Read-modify-write under the document lock. `change` sees the current
    /// content (`None` if absent) and returns the replacement.
    pub(crate) fn update<T>(&self, id: &DocId, change: impl FnOnce(Option<Element>) -> Result<(Element, T)>) -> Result<(u64, T)> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().expect("document lock");
        let (current, revision) = match self.get_document(id) {
            Ok((el, rev)) => (Some(el), rev),
            Err(StoreError::NotFound(_)) => (None, 0),
            Err(e) => return Err(e),
        };
        let (next, out) = change(current)?;
        Ok((self.put_locked(id, next, revision)?, out))
    }
}

/// Well-formedness per document class.
fn check_class(id: &DocId, content: &Element) -> Result<()> {
    let invalid = |message: String| StoreError::Invalid { doc: id.to_string(), message };
    if content.name != id.root_name() {
        return Err(invalid(format!("root element must be <{}>, found <{}>", id.root_name(), content.name)));
    }
    match id {
        DocId::Occasion(occasion) => {
            let (meta, _) = from_sla_element(content).map_err(StoreError::InvalidTranscript)?;
            if meta.id != *occasion {
                return Err(invalid(format!("document id {:?} does not match", meta.id)));
            }
        }
        DocId::Network(network) => {
            let net = codec::network_from_xml(content).map_err(invalid)?;
            if net.id() != network {
                return Err(invalid(format!("network id {:?} does not match", net.id())));
            }
        }
        DocId::Events(_) => {
            codec::events_from_xml(content).map_err(invalid)?;
        }
        DocId::Project(_) => {
            ProjectFile::from_xml(content).map_err(invalid)?;
        }
        DocId::ProjectIndex => {
            ProjectIndex::from_xml(content).map_err(invalid)?;
        }
        DocId::Contacts => {
            registry::contacts_from_xml(content).map_err(invalid)?;
        }
        DocId::Places => {
            registry::places_from_xml(content).map_err(invalid)?;
        }
        DocId::Resources => {
            registry::resources_from_xml(content).map_err(invalid)?;
        }
        DocId::Media(_) => {
            MediaInfo::from_xml(content).map_err(invalid)?;
        }
    }
    Ok(())
}
