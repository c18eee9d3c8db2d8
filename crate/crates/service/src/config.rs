use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use sla_core::index::DEFAULT_ENUMERATION_BOUND;
use sla_core::media::DEFAULT_BASE_BUCKET;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {name}: {message}")]
    Env { name: &'static str, message: String },
    #[error("base_bucket must be a power of two, got {0}")]
    BaseBucket(u32),
}

/// Service settings, from a TOML file and `SLA_*` environment variables
/// (the environment wins).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub store_root: PathBuf,
    pub bind: String,
    pub session_timeout_secs: u64,
    pub enumeration_bound: usize,
    pub base_bucket: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            store_root: PathBuf::from("sla-store"),
            bind: "127.0.0.1:8080".into(),
            session_timeout_secs: 1800,
            enumeration_bound: DEFAULT_ENUMERATION_BOUND,
            base_bucket: DEFAULT_BASE_BUCKET,
        }
    }
}

fn env_parse<T: std::str::FromStr>(name: &'static str, lookup: &impl Fn(&str) -> Option<String>) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    lookup(name)
        .map(|v| v.parse().map_err(|e: T::Err| ConfigError::Env { name, message: e.to_string() }))
        .transpose()
}

impl Config {
    pub fn load(file: Option<&Path>) -> Result<Config, ConfigError> {
        Config::load_with(file, |name| std::env::var(name).ok())
    }

    pub fn load_with(file: Option<&Path>, lookup: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?
            }
            None => Config::default(),
        };
        if let Some(v) = lookup("SLA_STORE_ROOT") {
            config.store_root = v.into();
        }
        if let Some(v) = lookup("SLA_BIND") {
            config.bind = v;
        }
        if let Some(v) = env_parse("SLA_SESSION_TIMEOUT_SECS", &lookup)? {
            config.session_timeout_secs = v;
        }
        if let Some(v) = env_parse("SLA_ENUMERATION_BOUND", &lookup)? {
            config.enumeration_bound = v;
        }
        if let Some(v) = env_parse("SLA_BASE_BUCKET", &lookup)? {
            config.base_bucket = v;
        }
        if !config.base_bucket.is_power_of_two() {
            return Err(ConfigError::BaseBucket(config.base_bucket));
        }
        Ok(config)
    }

    pub fn session_timeout(&self) -> Duration {
        Duration::from_secs(self.session_timeout_secs)
    }
}
