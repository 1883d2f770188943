//! Response cache keyed by the stable hash of the full request.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::RwLock;

use base64::Engine;

use super::{ChatBackend, Completion, ImageBackend, ImageRequest, LlmRequest};
use crate::error::{Error, Result};
use crate::ids::stable_hash;

/// Content-addressed blob store: in memory, or one file per key on disk.
#[derive(Debug)]
pub struct CacheStore {
    dir: Option<PathBuf>,
    mem: RwLock<HashMap<String, String>>,
}

impl CacheStore {
    pub fn in_memory() -> Self {
        CacheStore {
            dir: None,
            mem: RwLock::default(),
        }
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(CacheStore {
            dir: Some(dir),
            mem: RwLock::default(),
        })
    }

    fn get(&self, key: &str) -> Option<String> {
        if let Some(v) = self.mem.read().expect("cache lock").get(key) {
            return Some(v.clone());
        }
        let v = fs::read_to_string(self.dir.as_ref()?.join(format!("{key}.json"))).ok()?;
        self.mem.write().expect("cache lock").insert(key.to_string(), v.clone());
        Some(v)
    }

    fn put(&self, key: &str, value: String) -> Result<()> {
        if let Some(dir) = &self.dir {
            let tmp = dir.join(format!("{key}.json.tmp"));
            fs::write(&tmp, &value)?;
            fs::rename(tmp, dir.join(format!("{key}.json")))?;
        }
        self.mem.write().expect("cache lock").insert(key.to_string(), value);
        Ok(())
    }
}

/// `scope` separates entries of different models sharing one store.
pub struct CachedChat<B> {
    inner: B,
    scope: String,
    store: CacheStore,
}

impl<B: ChatBackend> CachedChat<B> {
    pub fn new(inner: B, scope: impl Into<String>, store: CacheStore) -> Self {
        CachedChat {
            inner,
            scope: scope.into(),
            store,
        }
    }

    fn key(&self, req: &LlmRequest) -> String {
        let structured = if req.expects_structured { "1" } else { "0" };
        stable_hash([
            "chat-cache-v1",
            &self.scope,
            &req.system_prompt,
            &req.user_prompt,
            structured,
            req.schema_name.as_deref().unwrap_or(""),
        ])
    }
}

impl<B: ChatBackend> ChatBackend for CachedChat<B> {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        let key = self.key(req);
        if let Some(raw) = self.store.get(&key) {
            let text: String = serde_json::from_str(&raw).map_err(|e| Error::Storage(e.to_string()))?;
            return Ok(Completion { text, attempts: 0 });
        }
        let out = self.inner.complete_raw(req)?;
        self.store
            .put(&key, serde_json::to_string(&out.text).map_err(|e| Error::Storage(e.to_string()))?)?;
        Ok(out)
    }
}

pub struct CachedImages<B> {
    inner: B,
    scope: String,
    store: CacheStore,
}

impl<B: ImageBackend> CachedImages<B> {
    pub fn new(inner: B, scope: impl Into<String>, store: CacheStore) -> Self {
        CachedImages {
            inner,
            scope: scope.into(),
            store,
        }
    }

    fn key(&self, req: &ImageRequest) -> String {
        let seed = req.seed.map(|s| s.to_string()).unwrap_or_default();
        stable_hash(["image-cache-v1", &self.scope, &req.prompt, &req.count.to_string(), &seed])
    }
}

impl<B: ImageBackend> ImageBackend for CachedImages<B> {
    fn render(&self, req: &ImageRequest) -> Result<Vec<Vec<u8>>> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let key = self.key(req);
        if let Some(raw) = self.store.get(&key) {
            let encoded: Vec<String> = serde_json::from_str(&raw).map_err(|e| Error::Storage(e.to_string()))?;
            return encoded
                .iter()
                .map(|s| b64.decode(s).map_err(|e| Error::Storage(e.to_string())))
                .collect();
        }
        let out = self.inner.render(req)?;
        let encoded: Vec<String> = out.iter().map(|b| b64.encode(b)).collect();
        self.store
            .put(&key, serde_json::to_string(&encoded).map_err(|e| Error::Storage(e.to_string()))?)?;
        Ok(out)
    }
}
