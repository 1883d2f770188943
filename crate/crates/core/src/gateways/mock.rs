//! Deterministic backends for offline runs and tests.
//!
//! [`MockChat`] replays completions recorded as files named by the stable
//! hash of `(system_prompt, user_prompt)`. It never invents text: an unknown
//! request fails with `fixture-missing`.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{ChatBackend, Completion, Embedder, ImageBackend, ImageRequest, LlmRequest};
use crate::error::{Error, Result};
use crate::ids::{seed_from, stable_hash};
use crate::text::word_tokens;

/// File name stem of the fixture answering `req`.
pub fn fixture_key(req: &LlmRequest) -> String {
    stable_hash(["chat-fixture-v1", req.system_prompt.as_str(), req.user_prompt.as_str()])
}

/// On-disk fixture. The request is stored alongside the answer so a stale
/// fixture can be diagnosed by reading it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatFixture {
    pub system_prompt: String,
    pub user_prompt: String,
    pub response: String,
}

#[derive(Debug, Default)]
pub struct MockChat {
    dir: Option<PathBuf>,
    mem: RwLock<HashMap<String, String>>,
}

impl MockChat {
    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        MockChat {
            dir: Some(dir.into()),
            mem: RwLock::default(),
        }
    }

    pub fn in_memory() -> Self {
        MockChat::default()
    }

    pub fn insert(&self, system_prompt: &str, user_prompt: &str, response: &str) {
        let key = fixture_key(&LlmRequest::text(system_prompt, user_prompt));
        self.mem.write().expect("mock lock").insert(key, response.to_string());
    }
}

impl ChatBackend for MockChat {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        let key = fixture_key(req);
        if let Some(text) = self.mem.read().expect("mock lock").get(&key) {
            return Ok(Completion {
                text: text.clone(),
                attempts: 1,
            });
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{key}.json"));
            if let Ok(raw) = fs::read_to_string(&path) {
                let fixture: ChatFixture = serde_json::from_str(&raw)
                    .map_err(|e| Error::Storage(format!("{}: {e}", path.display())))?;
                self.mem.write().expect("mock lock").insert(key, fixture.response.clone());
                return Ok(Completion {
                    text: fixture.response,
                    attempts: 1,
                });
            }
        }
        log::warn!("no chat fixture for key {key} (schema {:?})", req.schema_name);
        Err(Error::FixtureMissing { key })
    }
}

/// Answers requests from a queue, in order. Useful for scripted failures.
#[derive(Debug, Default)]
pub struct ScriptedChat {
    queue: Mutex<VecDeque<Result<String>>>,
}

impl ScriptedChat {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedChat {
            queue: Mutex::new(responses.into_iter().map(|s| Ok(s.into())).collect()),
        }
    }

    pub fn push(&self, response: impl Into<String>) {
        self.queue.lock().expect("script lock").push_back(Ok(response.into()));
    }

    pub fn push_err(&self, err: Error) {
        self.queue.lock().expect("script lock").push_back(Err(err));
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("script lock").len()
    }
}

impl ChatBackend for ScriptedChat {
    fn complete_raw(&self, _req: &LlmRequest) -> Result<Completion> {
        match self.queue.lock().expect("script lock").pop_front() {
            Some(Ok(text)) => Ok(Completion { text, attempts: 1 }),
            Some(Err(e)) => Err(e),
            None => Err(Error::GatewayUnavailable("scripted chat exhausted".into())),
        }
    }
}

/// Chat backend backed by a closure over the request.
pub struct FnChat<F>(pub F);

impl<F> ChatBackend for FnChat<F>
where
    F: Fn(&LlmRequest) -> Result<String> + Send + Sync,
{
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        (self.0)(req).map(|text| Completion { text, attempts: 1 })
    }
}

/// Passes requests to `inner` and writes each answered request as a fixture
/// file under `dir`. This is how the bundled fixtures are authored.
pub struct RecordingChat<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: ChatBackend> RecordingChat<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RecordingChat { inner, dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl<B: ChatBackend> ChatBackend for RecordingChat<B> {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        let out = self.inner.complete_raw(req)?;
        let fixture = ChatFixture {
            system_prompt: req.system_prompt.clone(),
            user_prompt: req.user_prompt.clone(),
            response: out.text.clone(),
        };
        let body = serde_json::to_string_pretty(&fixture).map_err(|e| Error::Storage(e.to_string()))?;
        fs::write(self.dir.join(format!("{}.json", fixture_key(req))), body + "\n")?;
        Ok(out)
    }
}

const MOCK_SIDE: u32 = 16;

/// Single-colour PNGs. The colour comes from a hash of `(prompt, seed,
/// index)`; the same hash is embedded as a text chunk so distinct requests
/// never share bytes even when their colours coincide.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockImages;

impl MockImages {
    pub fn render_one(prompt: &str, seed: u64, index: u32) -> Result<Vec<u8>> {
        let key = stable_hash(["mock-image-v1", prompt, &seed.to_string(), &index.to_string()]);
        let rgb = hex::decode(&key[..6]).expect("hex digest");
        let mut data = Vec::with_capacity((MOCK_SIDE * MOCK_SIDE * 3) as usize);
        for _ in 0..MOCK_SIDE * MOCK_SIDE {
            data.extend_from_slice(&rgb);
        }
        let mut buf = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut buf, MOCK_SIDE, MOCK_SIDE);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.add_text_chunk("agora-mock".to_string(), key)
                .map_err(|e| Error::GatewayUnavailable(e.to_string()))?;
            let mut writer = enc.write_header().map_err(|e| Error::GatewayUnavailable(e.to_string()))?;
            writer
                .write_image_data(&data)
                .map_err(|e| Error::GatewayUnavailable(e.to_string()))?;
        }
        Ok(buf)
    }

    /// RGB of a PNG produced by this backend.
    pub fn colour_of(png_bytes: &[u8]) -> Option<[u8; 3]> {
        let decoder = png::Decoder::new(std::io::Cursor::new(png_bytes));
        let mut reader = decoder.read_info().ok()?;
        let mut buf = vec![0; reader.output_buffer_size()?];
        reader.next_frame(&mut buf).ok()?;
        Some([buf[0], buf[1], buf[2]])
    }
}

impl ImageBackend for MockImages {
    fn render(&self, req: &ImageRequest) -> Result<Vec<Vec<u8>>> {
        let seed = req.seed.unwrap_or(0);
        (0..req.count).map(|i| MockImages::render_one(&req.prompt, seed, i)).collect()
    }
}

/// Hashed bag-of-words vectors.
#[derive(Debug, Clone, Copy)]
pub struct MockEmbedder {
    pub dims: usize,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        MockEmbedder { dims: 64 }
    }
}

impl MockEmbedder {
    pub fn bucket(&self, token: &str) -> usize {
        (seed_from(["bow-v1", token]) % self.dims as u64) as usize
    }
}

impl Embedder for MockEmbedder {
    fn dimensions(&self) -> usize {
        self.dims
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        let tokens = word_tokens(text);
        if tokens.is_empty() {
            return Err(Error::invalid("text has no word tokens"));
        }
        let mut v = vec![0.0; self.dims];
        for t in tokens {
            v[self.bucket(&t)] += 1.0;
        }
        Ok(v)
    }
}
