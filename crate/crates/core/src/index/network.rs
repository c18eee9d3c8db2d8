use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::entry::EntryCondition;
use super::IndexError;
use crate::chat::is_ident_name;

/// One choice point: a set of mutually exclusive options, available when
/// its entry condition holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct System {
    pub name: String,
    pub entry: EntryCondition,
    pub options: Vec<String>,
}

impl System {
    pub fn new(name: &str, entry: EntryCondition, options: &[&str]) -> Self {
        Self { name: name.to_string(), entry, options: options.iter().map(|o| o.to_string()).collect() }
    }
}

/// An immutable, checked revision of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVersion", into = "RawVersion")]
pub struct NetworkVersion {
    version: u32,
    systems: Vec<System>,
    /// System indices such that every system follows the systems its entry
    /// condition refers to.
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawVersion {
    version: u32,
    systems: Vec<System>,
}

impl TryFrom<RawVersion> for NetworkVersion {
    type Error = IndexError;

    fn try_from(raw: RawVersion) -> Result<Self, Self::Error> {
        NetworkVersion::new(raw.version, raw.systems)
    }
}

impl From<NetworkVersion> for RawVersion {
    fn from(v: NetworkVersion) -> Self {
        RawVersion { version: v.version, systems: v.systems }
    }
}

const KEYWORDS: [&str; 3] = ["TRUE", "AND", "OR"];

impl NetworkVersion {
    pub fn new(version: u32, systems: Vec<System>) -> Result<Self, IndexError> {
        let mut system_names = BTreeSet::new();
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, system) in systems.iter().enumerate() {
            if !is_ident_name(&system.name) {
                return Err(IndexError::BadName(system.name.clone()));
            }
            if !system_names.insert(system.name.as_str()) {
                return Err(IndexError::DuplicateSystem(system.name.clone()));
            }
            if system.options.len() < 2 {
                return Err(IndexError::TooFewOptions(system.name.clone()));
            }
            for option in &system.options {
                if !is_ident_name(option) || KEYWORDS.contains(&option.as_str()) {
                    return Err(IndexError::BadName(option.clone()));
                }
                if owner.insert(option.as_str(), i).is_some() {
                    return Err(IndexError::DuplicateOption(option.clone()));
                }
            }
        }

        let mut depends_on: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); systems.len()];
        for (i, system) in systems.iter().enumerate() {
            for r in system.entry.references() {
                let Some(&target) = owner.get(r.option.as_str()) else {
                    return Err(IndexError::UnknownOptionRef { system: system.name.clone(), option: r.option.clone() });
                };
                if r.system.as_ref().is_some_and(|s| *s != systems[target].name) {
                    return Err(IndexError::UnknownOptionRef {
                        system: system.name.clone(),
                        option: format!("{}:{}", r.system.as_deref().unwrap_or(""), r.option),
                    });
                }
                depends_on[i].insert(target);
            }
        }
        let order = topological_order(&depends_on).map_err(|cycle| {
            IndexError::Cycle(cycle.into_iter().map(|i| systems[i].name.clone()).collect())
        })?;
        Ok(Self { version, systems, order })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn systems(&self) -> &[System] {
        &self.systems
    }

    pub fn system(&self, name: &str) -> Option<&System> {
        self.systems.iter().find(|s| s.name == name)
    }

    /// Systems in dependency order.
    pub fn ordered_systems(&self) -> impl Iterator<Item = &System> {
        self.order.iter().map(|&i| &self.systems[i])
    }
}

/// Kahn's algorithm, lowest index first. On failure returns the systems
/// left on a cycle.
fn topological_order(depends_on: &[BTreeSet<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = depends_on.len();
    let mut remaining: Vec<usize> = depends_on.iter().map(BTreeSet::len).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let Some(next) = (0..n).find(|&i| !done[i] && remaining[i] == 0) else {
            return Err((0..n).filter(|&i| !done[i]).collect());
        };
        done[next] = true;
        order.push(next);
        for (i, deps) in depends_on.iter().enumerate() {
            if deps.contains(&next) {
                remaining[i] -= 1;
            }
        }
    }
    Ok(order)
}

/// A named network and its full, append-only revision history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemNetwork {
    id: String,
    name: String,
    versions: Vec<NetworkVersion>,
    deleted: bool,
}

impl SystemNetwork {
    /// A new network whose version 1 holds `systems`.
    pub fn create(id: &str, name: &str, systems: Vec<System>) -> Result<Self, IndexError> {
        if !is_ident_name(id) {
            return Err(IndexError::BadName(id.to_string()));
        }
        Ok(Self {
            id: id.to_string(),
            name: name.to_string(),
            versions: vec![NetworkVersion::new(1, systems)?],
            deleted: false,
        })
    }

    /// Rebuilds a network from stored versions, which must be numbered
    /// `1..=n`.
    pub fn from_versions(id: &str, name: &str, versions: Vec<NetworkVersion>, deleted: bool) -> Result<Self, IndexError> {
        if versions.is_empty() || versions.iter().enumerate().any(|(i, v)| v.version as usize != i + 1) {
            return Err(IndexError::VersionGap);
        }
        Ok(Self { id: id.to_string(), name: name.to_string(), versions, deleted })
    }

    /// Returns the network with version `n + 1` appended. Earlier versions
    /// are carried over untouched.
    pub fn revise(&self, systems: Vec<System>) -> Result<SystemNetwork, IndexError> {
        let next = NetworkVersion::new(self.latest().version + 1, systems)?;
        let mut revised = self.clone();
        revised.versions.push(next);
        Ok(revised)
    }

    /// Deletion only marks the network; its versions stay readable for the
    /// events that cite them.
    pub fn tombstoned(&self) -> SystemNetwork {
        SystemNetwork { deleted: true, ..self.clone() }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_deleted(&self) -> bool {
        self.deleted
    }

    pub fn versions(&self) -> &[NetworkVersion] {
        &self.versions
    }

    pub fn version(&self, n: u32) -> Option<&NetworkVersion> {
        self.versions.get((n as usize).checked_sub(1)?)
    }

    pub fn latest(&self) -> &NetworkVersion {
        self.versions.last().expect("a network has at least one version")
    }
}
