use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sla_core::chat::{filter_view, from_sla_xml, lint_chat, parse_chat, validate, Diagnostic, ViewCriteria};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn files(dir: &str) -> Vec<PathBuf> {
    let mut out: Vec<_> = fs::read_dir(fixtures().join(dir)).unwrap().map(|e| e.unwrap().path()).collect();
    out.sort();
    out
}

/// Diagnostics for one fixture, whatever its kind.
fn diagnose(path: &Path) -> Vec<Diagnostic> {
    let text = fs::read_to_string(path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("cha") => lint_chat(&text),
        Some("xml") => from_sla_xml(&text).err().unwrap_or_default(),
        Some("json") => {
            let spec: serde_json::Value = serde_json::from_str(&text).unwrap();
            let transcript = fs::read_to_string(fixtures().join(spec["transcript"].as_str().unwrap())).unwrap();
            let doc = parse_chat(&transcript).unwrap();
            let criteria: ViewCriteria = serde_json::from_value(spec["criteria"].clone()).unwrap();
            filter_view(&doc, &criteria).err().into_iter().collect()
        }
        other => panic!("unexpected fixture type {other:?}"),
    }
}

#[test]
fn each_invalid_fixture_yields_exactly_its_code() {
    let mut seen = BTreeSet::new();
    for path in files("invalid") {
        let name = path.file_name().unwrap().to_str().unwrap();
        let expected = name.split('_').next().unwrap().to_uppercase();
        let codes: BTreeSet<String> = diagnose(&path).iter().map(|d| d.code.to_string()).collect();
        assert_eq!(codes, BTreeSet::from([expected.clone()]), "{name}");
        seen.insert(expected);
    }
    let all: BTreeSet<String> = ["E001", "E002", "E003", "E004", "E005", "E006", "E007", "W008", "E009", "E010", "E011", "E012"]
        .map(String::from)
        .into();
    assert_eq!(seen, all);
}

#[test]
fn valid_corpus_is_clean() {
    let valid = files("valid");
    assert!(valid.len() >= 4);
    for path in valid {
        assert_eq!(diagnose(&path), vec![], "{}", path.display());
        if path.extension().is_some_and(|e| e == "cha") {
            let doc = parse_chat(&fs::read_to_string(&path).unwrap()).unwrap();
            assert!(validate(&doc).is_empty());
        }
    }
}
