use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::network::NetworkVersion;
use super::IndexError;

/// Default cap on systems for [`enumerate_valid_selections`].
pub const DEFAULT_ENUMERATION_BOUND: usize = 12;

/// Chosen option per system. At most one option per system by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection(BTreeMap<String, String>);

impl Selection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a selection from `(system, option)` pairs; `None` if a system
    /// repeats.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (s, o) in pairs {
            if map.insert(s.to_string(), o.to_string()).is_some() {
                return None;
            }
        }
        Some(Self(map))
    }

    pub fn with(mut self, system: &str, option: &str) -> Self {
        self.0.insert(system.to_string(), option.to_string());
        self
    }

    pub fn option_for(&self, system: &str) -> Option<&str> {
        self.0.get(system).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(s, o)| (s.as_str(), o.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn chosen_options(&self) -> BTreeSet<&str> {
        self.0.values().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "system", rename_all = "kebab-case")]
pub enum Violation {
    /// The system's entry condition holds but no option was chosen.
    EnteredButUnselected(String),
    /// An option was chosen in a system whose entry condition does not hold.
    NotEntered(String),
}

/// Checks a selection against a version's entry conditions.
///
/// Valid iff every system whose entry condition holds over the chosen
/// options has exactly one chosen option and no other system has one.
/// Returns the violations in declaration order; empty means valid. Names
/// the version does not know are an error rather than a violation.
pub fn validate_selection(version: &NetworkVersion, selection: &Selection) -> Result<Vec<Violation>, IndexError> {
    for (system, option) in selection.iter() {
        let Some(found) = version.system(system) else {
            return Err(IndexError::UnknownSystem(system.to_string()));
        };
        if !found.options.iter().any(|o| o == option) {
            return Err(IndexError::UnknownOption { system: system.to_string(), option: option.to_string() });
        }
    }
    let chosen = selection.chosen_options();
    let mut violations = Vec::new();
    for system in version.systems() {
        let entered = system.entry.evaluate(&chosen);
        let selected = selection.option_for(&system.name).is_some();
        if entered && !selected {
            violations.push(Violation::EnteredButUnselected(system.name.clone()));
        } else if !entered && selected {
            violations.push(Violation::NotEntered(system.name.clone()));
        }
    }
    Ok(violations)
}

pub fn is_valid_selection(version: &NetworkVersion, selection: &Selection) -> bool {
    matches!(validate_selection(version, selection), Ok(v) if v.is_empty())
}

/// Every valid selection of a version, walking systems in dependency order
/// so each system's entry condition is decided by earlier choices.
pub fn enumerate_valid_selections(version: &NetworkVersion, bound: usize) -> Result<BTreeSet<Selection>, IndexError> {
    let systems = version.systems().len();
    if systems > bound {
        return Err(IndexError::BoundExceeded { systems, bound });
    }
    let ordered: Vec<_> = version.ordered_systems().collect();
    let mut out = BTreeSet::new();
    let mut stack = vec![(0usize, Selection::new())];
    while let Some((depth, partial)) = stack.pop() {
        let Some(system) = ordered.get(depth) else {
            out.insert(partial);
            continue;
        };
        if system.entry.evaluate(&partial.chosen_options()) {
            for option in &system.options {
                stack.push((depth + 1, partial.clone().with(&system.name, option)));
            }
        } else {
            stack.push((depth + 1, partial));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{decision_network_systems, EntryCondition, System};

    fn decision() -> NetworkVersion {
        NetworkVersion::new(1, decision_network_systems()).unwrap()
    }

    fn sel(pairs: &[(&str, &str)]) -> Selection {
        Selection::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn decision_examples() {
        let v = decision();
        assert!(validate_selection(&v, &sel(&[("MOVE", "decision"), ("REALISATION", "mental")])).unwrap().is_empty());
        assert_eq!(
            validate_selection(&v, &sel(&[("MOVE", "issue"), ("REALISATION", "verbal")])).unwrap(),
            [Violation::NotEntered("REALISATION".into())]
        );
        assert_eq!(
            validate_selection(&v, &sel(&[("REALISATION", "verbal")])).unwrap(),
            [Violation::EnteredButUnselected("MOVE".into()), Violation::NotEntered("REALISATION".into())]
        );
    }

    #[test]
    fn unknown_names() {
        let v = decision();
        assert!(matches!(validate_selection(&v, &sel(&[("NOPE", "x")])), Err(IndexError::UnknownSystem(_))));
        assert!(matches!(validate_selection(&v, &sel(&[("MOVE", "verbal")])), Err(IndexError::UnknownOption { .. })));
    }

    #[test]
    fn enumerations() {
        let all = enumerate_valid_selections(&decision(), DEFAULT_ENUMERATION_BOUND).unwrap();
        let expected: BTreeSet<Selection> = [
            sel(&[("MOVE", "issue")]),
            sel(&[("MOVE", "action")]),
            sel(&[("MOVE", "decision"), ("REALISATION", "verbal")]),
            sel(&[("MOVE", "decision"), ("REALISATION", "mental")]),
        ]
        .into();
        assert_eq!(all, expected);

        let single = NetworkVersion::new(1, vec![System::new("S", EntryCondition::True, &["a", "b"])]).unwrap();
        assert_eq!(enumerate_valid_selections(&single, 12).unwrap().len(), 2);

        let empty = NetworkVersion::new(1, vec![]).unwrap();
        assert_eq!(enumerate_valid_selections(&empty, 12).unwrap(), [Selection::new()].into());

        assert!(matches!(enumerate_valid_selections(&decision(), 1), Err(IndexError::BoundExceeded { .. })));
    }

    #[test]
    fn duplicate_system_pairs_rejected() {
        assert!(Selection::from_pairs([("A", "x"), ("A", "y")]).is_none());
    }
}
