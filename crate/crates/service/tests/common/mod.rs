#![allow(dead_code)]

use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use sla_core::media::{encode_wav, PcmAudio};
use sla_service::{router, AppState, Config};
use sla_store::Store;
use tempfile::TempDir;
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub headers: axum::http::HeaderMap,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.bytes).into_owned()
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_string()
    }
}

pub struct TestApp {
    pub dir: TempDir,
    pub app: Router,
    pub session: Option<String>,
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_config(|_| {})
    }

    pub fn with_config(tweak: impl FnOnce(&mut Config)) -> Self {
        let dir = TempDir::new().unwrap();
        let root = dir.path().join("store");
        let store = Store::init(&root).unwrap();
        let mut config = Config { store_root: root, ..Config::default() };
        tweak(&mut config);
        TestApp { app: router(AppState::new(store, config)), dir, session: None }
    }

    pub async fn send(&self, method: Method, path: &str, body: Body, content_type: Option<&str>) -> Reply {
        let mut request = Request::builder().method(method).uri(path);
        if let Some(ct) = content_type {
            request = request.header(header::CONTENT_TYPE, ct);
        }
        if let Some(s) = &self.session {
            request = request.header("x-session", s);
        }
        let response = self.app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
        let status = response.status();
        let headers = response.headers().clone();
        let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("").to_string();
        let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, content_type, headers, bytes }
    }

    pub async fn get(&self, path: &str) -> Reply {
        self.send(Method::GET, path, Body::empty(), None).await
    }

    pub async fn post(&self, path: &str, body: Value) -> Reply {
        self.send(Method::POST, path, Body::from(body.to_string()), Some("application/json")).await
    }

    pub async fn put(&self, path: &str, body: Value) -> Reply {
        self.send(Method::PUT, path, Body::from(body.to_string()), Some("application/json")).await
    }

    pub async fn patch(&self, path: &str, body: Value) -> Reply {
        self.send(Method::PATCH, path, Body::from(body.to_string()), Some("application/json")).await
    }

    pub async fn delete(&self, path: &str) -> Reply {
        self.send(Method::DELETE, path, Body::empty(), None).await
    }

    pub async fn upload(&self, path: &str, bytes: Vec<u8>) -> Reply {
        self.send(Method::POST, path, Body::from(bytes), Some("audio/wav")).await
    }

    /// Asserts the status and returns the JSON body.
    pub async fn ok(&self, reply: Reply, status: StatusCode) -> Value {
        assert_eq!(reply.status, status, "{}", reply.text());
        reply.json()
    }

    pub async fn contact(&self, code: &str, name: &str, role: &str) -> String {
        let r = self.post("/contacts", json!({"code": code, "name": name, "role": role})).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["contact_id"].as_str().unwrap().to_string()
    }

    pub async fn project(&self, title: &str) -> String {
        let r = self.post("/projects", json!({"title": title})).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["project_id"].as_str().unwrap().to_string()
    }

    pub async fn occasion(&self, project: &str, title: &str, contacts: &[&str]) -> String {
        let r = self.post(&format!("/projects/{project}/occasions"), json!({"title": title, "contact_ids": contacts})).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["occasion_id"].as_str().unwrap().to_string()
    }

    pub async fn open_session(&mut self, contact: &str, occasion: Option<&str>) -> String {
        let r = self.post("/sessions", json!({"contact_id": contact, "occasion_id": occasion})).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        let id = r.json()["session_id"].as_str().unwrap().to_string();
        self.session = Some(id.clone());
        id
    }

    /// Polls until the waveform sidecar is ready.
    pub async fn waveform(&self, occasion: &str, query: &str) -> Value {
        for _ in 0..500 {
            let r = self.get(&format!("/occasions/{occasion}/waveform?{query}")).await;
            if r.status == StatusCode::CONFLICT && r.code() == "WAVEFORM_PENDING" {
                tokio::time::sleep(Duration::from_millis(10)).await;
                continue;
            }
            assert_eq!(r.status, StatusCode::OK, "{}", r.text());
            return r.json();
        }
        panic!("waveform never became ready");
    }

    /// A project, two contacts and one occasion with both as participants.
    pub async fn seeded(&mut self) -> Seeded {
        let analyst = self.contact("ROD", "Rodney", "Analyst").await;
        let chair = self.contact("CHA", "Chris", "Chair").await;
        let project = self.project("Board meetings").await;
        let occasion = self.occasion(&project, "March board", &[&analyst, &chair]).await;
        Seeded { analyst, chair, project, occasion }
    }
}

pub struct Seeded {
    pub analyst: String,
    pub chair: String,
    pub project: String,
    pub occasion: String,
}

pub fn sine_wav(rate: u32, ms: u64, hz: f32) -> Vec<u8> {
    let n = (rate as u64 * ms / 1000) as usize;
    let samples = (0..n).map(|i| 0.5 * (2.0 * std::f32::consts::PI * hz * i as f32 / rate as f32).sin()).collect();
    encode_wav(&PcmAudio::new(rate, samples).unwrap())
}

pub fn silence_wav(rate: u32, ms: u64) -> Vec<u8> {
    encode_wav(&PcmAudio::new(rate, vec![0.0; (rate as u64 * ms / 1000) as usize]).unwrap())
}

pub fn decision_network() -> Value {
    json!({
        "id": "dm",
        "name": "Decision making",
        "systems": [
            {"name": "MOVE", "entry": "TRUE", "options": ["issue", "action", "decision"]},
            {"name": "REALISATION", "entry": "decision", "options": ["verbal", "mental"]}
        ]
    })
}
