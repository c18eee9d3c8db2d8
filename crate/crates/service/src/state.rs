//! Shared service state: the store, loop sessions and background jobs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::http::StatusCode;
use sla_core::media::{build_waveform_cache, LoopState, PcmAudio};
use sla_store::{Store, StoreError};
use tokio::sync::{Mutex as AsyncMutex, OwnedMutexGuard};

use crate::config::Config;
use crate::error::ApiError;

pub type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone)]
pub struct Session {
    pub session_id: String,
    pub contact_id: String,
    pub occasion_id: Option<String>,
    pub active_loop: Option<String>,
    last_seen: Instant,
}

#[derive(Debug, Clone)]
pub struct LoopEntry {
    pub loop_id: String,
    pub occasion_id: String,
    pub session_id: String,
    pub state: LoopState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaveformJob {
    Pending,
    Ready,
    Failed(String),
}

#[derive(Default)]
struct Sessions {
    sessions: HashMap<String, Session>,
    loops: HashMap<String, LoopEntry>,
}

pub struct AppState {
    pub store: Arc<Store>,
    pub config: Config,
    sessions: Mutex<Sessions>,
    writers: Mutex<HashMap<String, Arc<AsyncMutex<()>>>>,
    /// Sidecar job status keyed by media hash.
    jobs: Arc<Mutex<HashMap<String, WaveformJob>>>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(store: Store, config: Config) -> SharedState {
        Arc::new(AppState {
            store: Arc::new(store),
            config,
            sessions: Mutex::default(),
            writers: Mutex::default(),
            jobs: Arc::default(),
        })
    }

    /// Runs blocking store work off the async workers.
    pub async fn run<T, F>(&self, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&Store) -> Result<T, ApiError> + Send + 'static,
    {
        let store = Arc::clone(&self.store);
        tokio::task::spawn_blocking(move || f(&store)).await?
    }

    /// Waits for the occasion's writer slot. Mutations to one occasion run
    /// one at a time in arrival order.
    pub async fn writer(&self, occasion_id: &str) -> OwnedMutexGuard<()> {
        let slot = {
            let mut writers = self.writers.lock().expect("writers lock");
            Arc::clone(writers.entry(occasion_id.to_string()).or_default())
        };
        slot.lock_owned().await
    }

    pub fn open_session(&self, contact_id: String, occasion_id: Option<String>) -> Session {
        let mut guard = self.sessions.lock().expect("sessions lock");
        self.expire(&mut guard);
        let session = Session {
            session_id: uuid::Uuid::new_v4().simple().to_string(),
            contact_id,
            occasion_id,
            active_loop: None,
            last_seen: Instant::now(),
        };
        guard.sessions.insert(session.session_id.clone(), session.clone());
        session
    }

    /// Looks up a session and marks it as used.
    pub fn touch_session(&self, session_id: &str) -> ApiResult<Session> {
        let mut guard = self.sessions.lock().expect("sessions lock");
        let timeout = self.config.session_timeout();
        let Some(session) = guard.sessions.get_mut(session_id) else {
            return Err(ApiError::new(StatusCode::UNAUTHORIZED, "SESSION_UNKNOWN", "no such session"));
        };
        if session.last_seen.elapsed() > timeout {
            let id = session.session_id.clone();
            drop_session(&mut guard, &id);
            return Err(ApiError::new(StatusCode::UNAUTHORIZED, "SESSION_EXPIRED", "session expired"));
        }
        session.last_seen = Instant::now();
        Ok(session.clone())
    }

    pub fn close_session(&self, session_id: &str) -> bool {
        let mut guard = self.sessions.lock().expect("sessions lock");
        drop_session(&mut guard, session_id)
    }

    pub fn set_session_occasion(&self, session_id: &str, occasion_id: &str) {
        if let Some(s) = self.sessions.lock().expect("sessions lock").sessions.get_mut(session_id) {
            s.occasion_id = Some(occasion_id.to_string());
        }
    }

    fn expire(&self, guard: &mut Sessions) {
        let timeout = self.config.session_timeout();
        let stale: Vec<String> = guard
            .sessions
            .values()
            .filter(|s| s.last_seen.elapsed() > timeout)
            .map(|s| s.session_id.clone())
            .collect();
        for id in stale {
            drop_session(guard, &id);
        }
    }

    /// Installs a loop as the session's only active loop; any previous one
    /// is discarded.
    pub fn install_loop(&self, session_id: &str, occasion_id: &str, state: LoopState) -> LoopEntry {
        let mut guard = self.sessions.lock().expect("sessions lock");
        let entry = LoopEntry {
            loop_id: uuid::Uuid::new_v4().simple().to_string(),
            occasion_id: occasion_id.to_string(),
            session_id: session_id.to_string(),
            state,
        };
        let previous = guard.sessions.get_mut(session_id).and_then(|s| {
            s.occasion_id = Some(occasion_id.to_string());
            s.active_loop.replace(entry.loop_id.clone())
        });
        if let Some(old) = previous {
            guard.loops.remove(&old);
        }
        guard.loops.insert(entry.loop_id.clone(), entry.clone());
        entry
    }

    /// A loop owned by `session_id`.
    pub fn owned_loop(&self, session_id: &str, loop_id: &str) -> ApiResult<LoopEntry> {
        let guard = self.sessions.lock().expect("sessions lock");
        match guard.loops.get(loop_id) {
            None => Err(ApiError::not_found(format!("loop {loop_id}"))),
            Some(entry) if entry.session_id != session_id => {
                Err(ApiError::new(StatusCode::FORBIDDEN, "LOOP_NOT_OWNED", "loop belongs to another session"))
            }
            Some(entry) => Ok(entry.clone()),
        }
    }

    pub fn store_loop_state(&self, loop_id: &str, state: LoopState) {
        if let Some(entry) = self.sessions.lock().expect("sessions lock").loops.get_mut(loop_id) {
            entry.state = state;
        }
    }

    pub fn remove_loop(&self, session_id: &str, loop_id: &str) -> ApiResult<()> {
        self.owned_loop(session_id, loop_id)?;
        let mut guard = self.sessions.lock().expect("sessions lock");
        guard.loops.remove(loop_id);
        if let Some(s) = guard.sessions.get_mut(session_id) {
            if s.active_loop.as_deref() == Some(loop_id) {
                s.active_loop = None;
            }
        }
        Ok(())
    }

    /// The session's active loop, if it is on `occasion_id`.
    pub fn active_loop(&self, session: &Session, occasion_id: &str) -> Option<LoopEntry> {
        let guard = self.sessions.lock().expect("sessions lock");
        let entry = guard.loops.get(session.active_loop.as_ref()?)?;
        (entry.occasion_id == occasion_id).then(|| entry.clone())
    }

    pub fn job(&self, sha256: &str) -> Option<WaveformJob> {
        self.jobs.lock().expect("jobs lock").get(sha256).cloned()
    }

    /// Builds the waveform sidecar for freshly stored media in the background.
    pub fn spawn_sidecar(&self, occasion_id: String, sha256: String, pcm: PcmAudio) {
        self.jobs.lock().expect("jobs lock").insert(sha256.clone(), WaveformJob::Pending);
        let store = Arc::clone(&self.store);
        let jobs = Arc::clone(&self.jobs);
        let base_bucket = self.config.base_bucket;
        tokio::task::spawn_blocking(move || {
            let outcome = build_waveform_cache(&pcm, base_bucket)
                .map_err(StoreError::from)
                .and_then(|cache| store.put_sidecar(&occasion_id, &sha256, &cache));
            let status = match outcome {
                Ok(_) => WaveformJob::Ready,
                Err(e) => {
                    tracing::warn!(occasion = %occasion_id, error = %e, "waveform sidecar build failed");
                    WaveformJob::Failed(e.to_string())
                }
            };
            jobs.lock().expect("jobs lock").insert(sha256, status);
        });
    }
}

fn drop_session(guard: &mut Sessions, session_id: &str) -> bool {
    match guard.sessions.remove(session_id) {
        Some(session) => {
            if let Some(l) = session.active_loop {
                guard.loops.remove(&l);
            }
            true
        }
        None => false,
    }
}
