mod common;

use axum::http::StatusCode;
use common::TestApp;
use proptest::prelude::*;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
enum Op {
    Append { speaker: &'static str, text: String, terminator: &'static str, span: Option<(u64, u64)> },
    Attach { index: usize, code: &'static str, content: &'static str },
    Episode { header: Option<(&'static str, &'static str)> },
}

fn op() -> impl Strategy<Value = Op> {
    let words = prop::collection::vec(prop::sample::select(vec!["we", "agree", "so", "fine", "?", "ok", "x\ty", "."]), 0..4);
    prop_oneof![
        4 => (
            prop::sample::select(vec!["ROD", "CHA", "XYZ", "rod"]),
            words,
            prop::sample::select(vec![".", "?", "!", "", ";"]),
            prop::option::of((0u64..20_000, 0u64..3_000)),
        )
            .prop_map(|(speaker, words, terminator, span)| Op::Append {
                speaker,
                text: words.join(" "),
                terminator,
                span: span.map(|(s, len)| (s, s + len)),
            }),
        2 => (
            0usize..8,
            prop::sample::select(vec!["com", "act", "tim", "ind", "XY", "spaa"]),
            prop::sample::select(vec!["note", "", "dm:v1 MOVE=issue 0_10", "dm:v1 MOVE= 0_10", "two\nlines"]),
        )
            .prop_map(|(index, code, content)| Op::Attach { index, code, content }),
        1 => prop::option::of(prop::sample::select(vec![
            ("situation", "after lunch"),
            ("languages", "en"),
            ("date", "02-MAR-2026"),
            ("comment", "late start"),
        ]))
        .prop_map(|header| Op::Episode { header }),
    ]
}

async fn apply(app: &TestApp, occasion: &str, op: &Op) -> common::Reply {
    match op {
        Op::Append { speaker, text, terminator, span } => {
            let mut body = json!({"speaker": speaker, "text": text, "terminator": terminator});
            if let Some((s, e)) = span {
                body["span"] = json!({"start_ms": s, "end_ms": e});
            }
            app.post(&format!("/occasions/{occasion}/utterances"), body).await
        }
        Op::Attach { index, code, content } => {
            app.post(&format!("/utterances/{occasion}:{index}/tiers"), json!({"code": code, "content": content})).await
        }
        Op::Episode { header } => {
            let headers: Vec<Value> = header.iter().map(|(k, v)| json!({"kind": k, "value": v})).collect();
            app.post(&format!("/occasions/{occasion}/episodes"), json!({"headers": headers})).await
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Whatever the clients send, the stored transcript stays valid, and a
    /// refused edit changes nothing.
    #[test]
    fn api_calls_never_persist_an_invalid_transcript(ops in prop::collection::vec(op(), 1..16)) {
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        runtime.block_on(async {
            let mut app = TestApp::new();
            let s = app.seeded().await;
            let mut revision = 1u64;
            for op in &ops {
                let reply = apply(&app, &s.occasion, op).await;
                let validation = app.get(&format!("/occasions/{}/validate", s.occasion)).await.json();
                let errors: Vec<&Value> = validation["diagnostics"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .filter(|d| d["severity"] == "error")
                    .collect();
                assert!(errors.is_empty(), "{op:?} left {errors:?}");
                if reply.status == StatusCode::CREATED {
                    revision += 1;
                } else {
                    assert!(reply.status.is_client_error(), "{op:?}: {} {}", reply.status, reply.text());
                    assert!(!reply.code().is_empty());
                }
                assert_eq!(validation["revision"], revision, "{op:?}");
            }
            let chat = app.get(&format!("/occasions/{}/export?format=chat", s.occasion)).await.text();
            assert!(sla_core::chat::lint_chat(&chat).iter().all(|d| !d.is_error()), "{chat}");
        });
    }
}
