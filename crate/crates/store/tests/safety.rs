use std::collections::BTreeSet;
use std::sync::{Arc, Barrier};
use std::thread;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use sla_core::xml::Element;
use sla_store::{ContactDraft, DocId, FaultPoint, ResourceDraft, ResourceKind, Store, StoreError};

fn places_with(n: usize) -> Element {
    let mut root = Element::new("places");
    for i in 0..n {
        root.push(Element::new("place").attr("id", format!("pl{i}")).attr("situation", "x".repeat(200 + i)));
    }
    root
}

#[test]
fn two_writers_one_conflict() {
    for _ in 0..20 {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::init(dir.path()).unwrap());
        let barrier = Arc::new(Barrier::new(2));
        let handles: Vec<_> = (0..2)
            .map(|i| {
                let (store, barrier) = (store.clone(), barrier.clone());
                thread::spawn(move || {
                    barrier.wait();
                    store.put_document(&DocId::Places, places_with(i + 1), 1)
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let conflicts = results.iter().filter(|r| matches!(r, Err(StoreError::Conflict { .. }))).count();
        let commits: Vec<u64> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        assert_eq!((conflicts, commits), (1, vec![2]));
    }
}

#[test]
fn retrying_writers_commit_gap_free() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::init(dir.path()).unwrap());
    let handles: Vec<_> = (0..4)
        .map(|w| {
            let store = store.clone();
            thread::spawn(move || {
                let mut mine = Vec::new();
                for n in 0..10 {
                    loop {
                        let (_, rev) = store.get_document(&DocId::Places).unwrap();
                        match store.put_document(&DocId::Places, places_with(w * 10 + n), rev) {
                            Ok(new) => {
                                assert_eq!(new, rev + 1);
                                mine.push(new);
                                break;
                            }
                            Err(StoreError::Conflict { .. }) => continue,
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
                mine
            })
        })
        .collect();
    let all: BTreeSet<u64> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
    assert_eq!(all, (2..=41).collect());
}

#[test]
fn interrupted_writes_never_tear_reads() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::init(dir.path()).unwrap());
    let reader = {
        let store = store.clone();
        thread::spawn(move || {
            for _ in 0..400 {
                let (el, rev) = store.get_document(&DocId::Places).unwrap();
                let n = el.children.len();
                assert!(el.children.iter().enumerate().all(|(i, c)| c.get("situation").map(str::len) == Some(200 + i)));
                assert!(rev >= 1 && n < 60);
            }
        })
    };
    let mut committed = 1;
    for i in 0..60 {
        if i % 3 == 1 {
            store.inject_fault(if i % 2 == 0 { FaultPoint::PartialTemp } else { FaultPoint::BeforeRename });
        }
        match store.put_document(&DocId::Places, places_with(i), committed) {
            Ok(rev) => committed = rev,
            Err(StoreError::Interrupted { .. }) => {
                let (el, rev) = store.get_document(&DocId::Places).unwrap();
                assert_eq!(rev, committed);
                assert_ne!(el.children.len(), i);
            }
            Err(e) => panic!("{e}"),
        }
    }
    reader.join().unwrap();
    drop(store);
    let reopened = Store::open(dir.path()).unwrap();
    assert_eq!(reopened.get_document(&DocId::Places).unwrap().1, committed);
    let leftovers = walk(dir.path()).into_iter().filter(|p| p.contains(".tmp-")).count();
    assert_eq!(leftovers, 0);
}

fn walk(dir: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path.to_string_lossy().into_owned());
        }
    }
    out
}

#[derive(Debug, Clone)]
enum Op {
    NewContact(String),
    Revise(usize, String),
    Resource(String),
    DeleteResource(usize),
    Faulted(String),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        "[A-Z][a-z]{2,6}".prop_map(Op::NewContact),
        (0usize..8, "[A-Z][a-z]{2,6}").prop_map(|(i, r)| Op::Revise(i, r)),
        "[a-z]{3,8}\\.png".prop_map(Op::Resource),
        (0usize..8).prop_map(Op::DeleteResource),
        "[A-Z][a-z]{2,6}".prop_map(Op::Faulted),
    ]
}

fn contact(role: &str) -> ContactDraft {
    ContactDraft { code: "ANN".into(), name: "Anna".into(), role: role.into(), birth: None, age: None, ses: None, sex: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn registries_are_append_only(ops in proptest::collection::vec(op(), 1..30)) {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::init(dir.path()).unwrap();
        let now = Utc.with_ymd_and_hms(2026, 2, 2, 0, 0, 0).unwrap();
        for op in ops {
            let contacts_before = store.contact_log().unwrap();
            let resources_before = store.resources().unwrap();
            let ids: Vec<String> = store.contacts().unwrap().into_iter().map(|c| c.contact_id).collect();
            match op {
                Op::NewContact(role) => { store.upsert_contact(None, contact(&role), now).unwrap(); }
                Op::Revise(i, role) if !ids.is_empty() => {
                    let id = &ids[i % ids.len()];
                    let rec = store.upsert_contact(Some(id), contact(&role), now).unwrap();
                    let previous = contacts_before.iter().filter(|c| &c.contact_id == id).count() as u32;
                    prop_assert_eq!(rec.revision, previous + 1);
                }
                Op::Revise(..) => {}
                Op::Resource(location) => {
                    let draft = ResourceDraft { kind: ResourceKind::Image, location, description: String::new(), collected_at: now, occasion_ids: vec![] };
                    store.log_resource(draft).unwrap();
                }
                Op::DeleteResource(i) => {
                    if let Some(r) = resources_before.get(i % resources_before.len().max(1)) {
                        prop_assert!(matches!(store.delete_resource(&r.resource_id), Err(StoreError::Unsupported(_))));
                    }
                }
                Op::Faulted(role) => {
                    store.inject_fault(FaultPoint::BeforeRename);
                    prop_assert!(store.upsert_contact(None, contact(&role), now).is_err());
                }
            }
            let contacts_after = store.contact_log().unwrap();
            let resources_after = store.resources().unwrap();
            prop_assert!(contacts_after.len() >= contacts_before.len());
            prop_assert_eq!(&contacts_after[..contacts_before.len()], &contacts_before[..]);
            prop_assert_eq!(&resources_after[..resources_before.len()], &resources_before[..]);
        }
    }
}
