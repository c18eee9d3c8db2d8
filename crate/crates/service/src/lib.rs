//! HTTP/JSON service over the transcript, media, indexing and report
//! modules and the corpus store.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

pub use api::router;
pub use config::Config;
pub use error::ApiError;
pub use state::{AppState, SharedState};
