use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Http,
    #[default]
    Mock,
}

/// Wire format spoken by an HTTP backend.
///
/// `minimal` is the in-repo contract documented in `docs/backends.md`;
/// `openai` adapts the common hosted chat, images and embeddings APIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ApiFlavor {
    #[default]
    Minimal,
    Openai,
}

/// Where and how to reach one backend. Holds the *name* of the environment
/// variable carrying the credential, never the credential itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub auth_env_var: Option<String>,
    #[serde(default)]
    pub model_id: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub flavor: ApiFlavor,
    /// Sampling temperature forwarded to chat backends. Unset means the
    /// backend default.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Vector length of an embedding backend. When unset, the first
    /// response fixes it.
    #[serde(default)]
    pub dimensions: Option<usize>,
    /// Fixture directory for mock backends.
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    500
}

fn default_max_in_flight() -> usize {
    4
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            endpoint: None,
            auth_env_var: None,
            model_id: String::new(),
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            backoff_ms: default_backoff_ms(),
            max_in_flight: default_max_in_flight(),
            flavor: ApiFlavor::Minimal,
            temperature: None,
            dimensions: None,
            fixtures: None,
        }
    }
}

impl BackendConfig {
    pub fn http(endpoint: impl Into<String>, model_id: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: Some(endpoint.into()),
            model_id: model_id.into(),
            ..BackendConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == BackendKind::Http && self.endpoint.as_deref().is_none_or(|e| e.trim().is_empty()) {
            return Err(Error::invalid("http backend requires an endpoint"));
        }
        if self.max_in_flight == 0 {
            return Err(Error::invalid("max_in_flight must be at least 1"));
        }
        Ok(())
    }

    /// Reads the credential from the environment at call time.
    pub(crate) fn secret(&self) -> Option<String> {
        self.auth_env_var
            .as_deref()
            .and_then(|name| std::env::var(name).ok())
            .filter(|s| !s.is_empty())
    }
}
