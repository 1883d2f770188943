//! TOML configuration and the wiring from it to a [`Studio`].
//!
//! ```toml
//! fixtures = "fixtures"            # root holding llm/ and wiki/ recordings
//! suggestion_count = 8
//!
//! [server]
//! bind = "127.0.0.1:8080"
//! data_dir = "data"                # sessions/, images/, cache/
//!
//! [chat]
//! kind = "http"
//! endpoint = "https://api.example.org/v1"
//! flavor = "openai"
//! model_id = "gpt-4o"
//! auth_env_var = "AGORA_CHAT_KEY"
//!
//! [pipeline]
//! rng_seed = 1
//! ```
//!
//! Every backend section accepts the keys of `BackendConfig`; omitted
//! sections are mock backends fed from `fixtures`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use agora_core::clock::Clock;
use agora_core::gateways::cache::{CacheStore, CachedChat, CachedImages};
use agora_core::gateways::config::{BackendConfig, BackendKind};
use agora_core::gateways::http::{HttpChat, HttpEmbedder, HttpImages};
use agora_core::gateways::mock::{MockChat, MockEmbedder, MockImages};
use agora_core::gateways::store::ImageStore;
use agora_core::gateways::{ChatBackend, Embedder, Gateways, ImageBackend};
use agora_core::modes::DEFAULT_SUGGESTIONS;
use agora_core::session::Studio;
use agora_core::wiki::{FixtureWiki, HttpWiki, PipelineConfig, WikiBackend};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    pub data_dir: PathBuf,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("data"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub fixtures: PathBuf,
    pub suggestion_count: usize,
    pub server: ServerConfig,
    pub chat: BackendConfig,
    pub images: BackendConfig,
    pub embedder: BackendConfig,
    pub wiki: BackendConfig,
    pub pipeline: PipelineConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fixtures: PathBuf::from("fixtures"),
            suggestion_count: DEFAULT_SUGGESTIONS,
            server: ServerConfig::default(),
            chat: BackendConfig::default(),
            images: BackendConfig::default(),
            embedder: BackendConfig::default(),
            wiki: BackendConfig::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Config = toml::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, b) in self.backends() {
            b.validate().with_context(|| format!("[{name}]"))?;
        }
        self.pipeline.validate().context("[pipeline]")?;
        if !(6..=10).contains(&self.suggestion_count) {
            bail!("suggestion_count must be within 6..=10, got {}", self.suggestion_count);
        }
        Ok(())
    }

    fn backends(&self) -> [(&'static str, &BackendConfig); 4] {
        [
            ("chat", &self.chat),
            ("images", &self.images),
            ("embedder", &self.embedder),
            ("wiki", &self.wiki),
        ]
    }

    fn fixture_dir(&self, b: &BackendConfig, sub: &str) -> PathBuf {
        b.fixtures.clone().unwrap_or_else(|| self.fixtures.join(sub))
    }

    pub fn chat_fixtures(&self) -> PathBuf {
        self.fixture_dir(&self.chat, "llm")
    }

    pub fn wiki_fixtures(&self) -> PathBuf {
        self.fixture_dir(&self.wiki, "wiki")
    }

    fn cache(&self, persist: bool) -> anyhow::Result<CacheStore> {
        Ok(if persist {
            CacheStore::on_disk(self.server.data_dir.join("cache"))?
        } else {
            CacheStore::in_memory()
        })
    }

    /// Builds the gateways. `persist` puts the image store and the response
    /// cache under `server.data_dir`; otherwise both live in memory.
    pub fn gateways(&self, clock: Arc<dyn Clock>, persist: bool) -> anyhow::Result<Gateways> {
        let chat: Arc<dyn ChatBackend> = match self.chat.kind {
            BackendKind::Mock => Arc::new(MockChat::from_dir(self.chat_fixtures())),
            BackendKind::Http => Arc::new(CachedChat::new(
                HttpChat::new(self.chat.clone())?,
                format!("chat:{}", self.chat.model_id),
                self.cache(persist)?,
            )),
        };
        let images: Arc<dyn ImageBackend> = match self.images.kind {
            BackendKind::Mock => Arc::new(MockImages),
            BackendKind::Http => Arc::new(CachedImages::new(
                HttpImages::new(self.images.clone())?,
                format!("images:{}", self.images.model_id),
                self.cache(persist)?,
            )),
        };
        let embedder: Arc<dyn Embedder> = match self.embedder.kind {
            BackendKind::Mock => Arc::new(MockEmbedder::default()),
            BackendKind::Http => Arc::new(HttpEmbedder::new(self.embedder.clone())?),
        };
        let store = if persist {
            ImageStore::on_disk(self.server.data_dir.join("images"))?
        } else {
            ImageStore::in_memory()
        };
        Ok(Gateways {
            chat,
            images,
            embedder,
            store: Arc::new(store),
            clock,
            max_in_flight: self.chat.max_in_flight.min(self.images.max_in_flight),
        })
    }

    pub fn wiki_backend(&self) -> anyhow::Result<Arc<dyn WikiBackend>> {
        Ok(match self.wiki.kind {
            BackendKind::Mock => Arc::new(FixtureWiki::new(self.wiki_fixtures())),
            BackendKind::Http => Arc::new(HttpWiki::new(self.wiki.clone())?),
        })
    }

    pub fn studio(&self, clock: Arc<dyn Clock>, persist: bool) -> anyhow::Result<Studio> {
        let mut studio = Studio::new(self.gateways(clock, persist)?, self.wiki_backend()?);
        studio.pipeline = self.pipeline;
        studio.suggestion_count = self.suggestion_count;
        Ok(studio)
    }
}
