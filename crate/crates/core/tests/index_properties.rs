use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sla_core::index::{
    enumerate_valid_selections, validate_selection, EntryCondition, NetworkVersion, Selection, System,
    DEFAULT_ENUMERATION_BOUND,
};

/// Entry condition drawn from the options of earlier systems.
fn condition(earlier: Vec<String>) -> BoxedStrategy<EntryCondition> {
    if earlier.is_empty() {
        return Just(EntryCondition::True).boxed();
    }
    let leaf = prop_oneof![
        1 => Just(EntryCondition::True),
        4 => proptest::sample::select(earlier).prop_map(|o| EntryCondition::option(&o)),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(EntryCondition::All),
            proptest::collection::vec(inner, 2..=3).prop_map(EntryCondition::Any),
        ]
    })
    .boxed()
}

fn network() -> impl Strategy<Value = NetworkVersion> {
    proptest::collection::vec(2usize..=3, 0..=4)
        .prop_flat_map(|sizes| {
            let mut names: Vec<Vec<String>> = Vec::new();
            for (s, &n) in sizes.iter().enumerate() {
                names.push((0..n).map(|o| format!("s{s}o{o}")).collect());
            }
            let conds: Vec<_> = (0..sizes.len()).map(|s| condition(names[..s].concat())).collect();
            (Just(names), conds, any::<u64>())
        })
        .prop_map(|(names, conds, seed)| {
            let mut systems: Vec<System> = names
                .iter()
                .zip(conds)
                .enumerate()
                .map(|(s, (opts, entry))| {
                    let opts: Vec<&str> = opts.iter().map(String::as_str).collect();
                    System::new(&format!("S{s}"), entry, &opts)
                })
                .collect();
            if !systems.is_empty() {
                let len = systems.len();
                systems.rotate_left(seed as usize % len);
            }
            NetworkVersion::new(1, systems).unwrap()
        })
}

fn holds(cond: &EntryCondition, chosen: &BTreeSet<String>) -> bool {
    match cond {
        EntryCondition::True => true,
        EntryCondition::Option(r) => chosen.contains(&r.option),
        EntryCondition::All(parts) => parts.iter().all(|p| holds(p, chosen)),
        EntryCondition::Any(parts) => parts.iter().any(|p| holds(p, chosen)),
    }
}

/// Every assignment of at most one option per system, each marked valid or
/// not by checking entry conditions directly.
fn brute_force(version: &NetworkVersion) -> Vec<(Selection, bool)> {
    let mut all = vec![BTreeMap::<String, String>::new()];
    for system in version.systems() {
        let mut next = Vec::new();
        for partial in &all {
            next.push(partial.clone());
            for option in &system.options {
                let mut with = partial.clone();
                with.insert(system.name.clone(), option.clone());
                next.push(with);
            }
        }
        all = next;
    }
    all.into_iter()
        .map(|map| {
            let chosen: BTreeSet<String> = map.values().cloned().collect();
            let valid = version
                .systems()
                .iter()
                .all(|s| holds(&s.entry, &chosen) == map.contains_key(&s.name));
            let selection = Selection::from_pairs(map.iter().map(|(s, o)| (s.as_str(), o.as_str()))).unwrap();
            (selection, valid)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn validation_agrees_with_brute_force(version in network()) {
        let mut expected = BTreeSet::new();
        for (selection, valid) in brute_force(&version) {
            prop_assert_eq!(validate_selection(&version, &selection).unwrap().is_empty(), valid, "{:?}", selection);
            if valid {
                expected.insert(selection);
            }
        }
        prop_assert_eq!(enumerate_valid_selections(&version, DEFAULT_ENUMERATION_BOUND).unwrap(), expected);
    }

    #[test]
    fn versions_survive_serde(version in network()) {
        let json = serde_json::to_string(&version).unwrap();
        prop_assert_eq!(serde_json::from_str::<NetworkVersion>(&json).unwrap(), version);
    }

    #[test]
    fn entry_conditions_print_and_parse(version in network()) {
        for system in version.systems() {
            prop_assert_eq!(&system.entry.to_string().parse::<EntryCondition>().unwrap(), &system.entry);
        }
    }
}
