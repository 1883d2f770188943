//! Uniform clients for the three external capabilities: chat completion,
//! text-to-image and text embedding.
//!
//! Each capability is a trait with an HTTP implementation and a deterministic
//! mock. Wrappers add response caching ([`cache`]) and call metering
//! ([`metered`]) without the callers knowing.

pub mod cache;
pub mod config;
pub mod http;
pub mod metered;
pub mod mock;
pub mod store;
mod structured;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::ids::ImageId;
use crate::model::{GeneratedImage, Mode};

pub use config::{ApiFlavor, BackendConfig, BackendKind};
pub use structured::parse_structured;

use store::ImageStore;

pub const MAX_IMAGES_PER_REQUEST: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub expects_structured: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_name: Option<String>,
}

impl LlmRequest {
    pub fn text(system_prompt: impl Into<String>, user_prompt: impl Into<String>) -> Self {
        LlmRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            expects_structured: false,
            schema_name: None,
        }
    }

    pub fn structured(system_prompt: impl Into<String>, user_prompt: impl Into<String>, schema: &str) -> Self {
        LlmRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            expects_structured: true,
            schema_name: Some(schema.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<Value>,
    /// Outbound attempts spent on this response (0 when served from cache).
    #[serde(default)]
    pub attempts: u32,
}

/// Raw completion returned by a backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
}

pub trait ChatBackend: Send + Sync {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub prompt: String,
    pub count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ImageRequest {
    pub fn new(prompt: impl Into<String>, count: u32, seed: Option<u64>) -> Self {
        ImageRequest {
            prompt: prompt.into(),
            count,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_IMAGES_PER_REQUEST).contains(&self.count) {
            return Err(Error::invalid(format!(
                "image count {} is outside 1..={MAX_IMAGES_PER_REQUEST}",
                self.count
            )));
        }
        if self.prompt.trim().is_empty() {
            return Err(Error::invalid("image prompt is empty"));
        }
        Ok(())
    }
}

/// Renders PNG bytes. Backends return exactly `count` images or an error.
pub trait ImageBackend: Send + Sync {
    fn render(&self, req: &ImageRequest) -> Result<Vec<Vec<u8>>>;
}

pub trait Embedder: Send + Sync {
    fn dimensions(&self) -> usize;
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>>;
}

/// Sends a chat request; when structured output is expected the completion
/// is parsed leniently and a parse failure becomes `StructuredParse`.
pub fn complete(chat: &dyn ChatBackend, req: &LlmRequest) -> Result<LlmResponse> {
    if req.user_prompt.trim().is_empty() {
        return Err(Error::invalid("user prompt is empty"));
    }
    let Completion { text, attempts } = chat.complete_raw(req)?;
    let parsed = if req.expects_structured {
        Some(parse_structured(&text)?)
    } else {
        None
    };
    Ok(LlmResponse { text, parsed, attempts })
}

/// Renders `req.count` images, stores their bytes and wraps them as
/// [`GeneratedImage`]s tagged with `mode`.
pub fn generate_image(
    backend: &dyn ImageBackend,
    store: &ImageStore,
    clock: &dyn Clock,
    req: &ImageRequest,
    mode: Mode,
) -> Result<Vec<GeneratedImage>> {
    req.validate()?;
    let rendered = backend.render(req)?;
    if rendered.len() != req.count as usize {
        return Err(Error::GatewayUnavailable(format!(
            "image backend returned {} images, expected {}",
            rendered.len(),
            req.count
        )));
    }
    let now = clock.now();
    rendered
        .into_iter()
        .map(|bytes| {
            let id: ImageId = store.put(&bytes)?;
            Ok(GeneratedImage {
                id: id.clone(),
                prompt_used: req.prompt.clone(),
                mode,
                bytes_ref: id,
                created_at: now,
            })
        })
        .collect()
}

pub fn embed(embedder: &dyn Embedder, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::invalid("cannot embed empty text"));
    }
    let v = embedder.embed_raw(text)?;
    if v.len() != embedder.dimensions() {
        return Err(Error::GatewayUnavailable(format!(
            "embedder returned {} dimensions, expected {}",
            v.len(),
            embedder.dimensions()
        )));
    }
    Ok(v)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("vectors differ in length".into()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::invalid("cannot compare a zero vector"));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// The set of backends a run talks to.
#[derive(Clone)]
pub struct Gateways {
    pub chat: Arc<dyn ChatBackend>,
    pub images: Arc<dyn ImageBackend>,
    pub embedder: Arc<dyn Embedder>,
    pub store: Arc<ImageStore>,
    pub clock: Arc<dyn Clock>,
    /// Upper bound on concurrent calls issued by one pipeline step.
    pub max_in_flight: usize,
}

impl Gateways {
    /// Mock images and embeddings with an in-memory image store; only the
    /// chat backend and the clock are chosen by the caller.
    pub fn offline(chat: Arc<dyn ChatBackend>, clock: Arc<dyn Clock>) -> Self {
        Gateways {
            chat,
            images: Arc::new(mock::MockImages),
            embedder: Arc::new(mock::MockEmbedder::default()),
            store: Arc::new(ImageStore::in_memory()),
            clock,
            max_in_flight: 4,
        }
    }

    pub fn complete(&self, req: &LlmRequest) -> Result<LlmResponse> {
        complete(self.chat.as_ref(), req)
    }

    pub fn generate_image(&self, req: &ImageRequest, mode: Mode) -> Result<Vec<GeneratedImage>> {
        generate_image(self.images.as_ref(), &self.store, self.clock.as_ref(), req, mode)
    }

    pub fn embed(&self, text: &str) -> Result<Vec<f64>> {
        embed(self.embedder.as_ref(), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::gateways::mock::{MockChat, MockEmbedder, MockImages};

    #[test]
    fn mock_chat_returns_fixture_verbatim() {
        let chat = MockChat::in_memory();
        chat.insert("sys", "user", "  fixture text\n");
        let resp = complete(&chat, &LlmRequest::text("sys", "user")).unwrap();
        assert_eq!(resp.text, "  fixture text\n");
        let err = complete(&chat, &LlmRequest::text("sys", "other")).unwrap_err();
        assert_eq!(err.code(), "fixture-missing");
    }

    #[test]
    fn structured_failure_is_an_error() {
        let chat = MockChat::in_memory();
        chat.insert("s", "u", "no json here");
        let err = complete(&chat, &LlmRequest::structured("s", "u", "x")).unwrap_err();
        assert_eq!(err.code(), "structured-parse");
    }

    #[test]
    fn empty_user_prompt_rejected() {
        let chat = MockChat::in_memory();
        assert_eq!(complete(&chat, &LlmRequest::text("s", " ")).unwrap_err().code(), "invalid-request");
    }

    #[test]
    fn image_count_bounds() {
        let store = ImageStore::in_memory();
        let clock = ManualClock::default();
        for bad in [0, 9] {
            let err = generate_image(&MockImages, &store, &clock, &ImageRequest::new("x", bad, None), Mode::Baseline)
                .unwrap_err();
            assert_eq!(err.code(), "invalid-request");
        }
        let imgs = generate_image(&MockImages, &store, &clock, &ImageRequest::new("x", 8, None), Mode::Baseline)
            .unwrap();
        assert_eq!(imgs.len(), 8);
        for i in &imgs {
            assert!(store.get(&i.bytes_ref).is_some());
        }
    }

    #[test]
    fn embed_rejects_empty_text() {
        assert_eq!(embed(&MockEmbedder::default(), "").unwrap_err().code(), "invalid-request");
    }

    #[test]
    fn cosine_of_zero_vector_is_an_error() {
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!((cosine_similarity(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.0).abs() < 1e-12);
    }
}
