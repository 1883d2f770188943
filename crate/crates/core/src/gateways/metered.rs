//! Call recording for backends, used to assert how many outbound calls a
//! pipeline makes and in what order.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{ChatBackend, Completion, Embedder, ImageBackend, ImageRequest, LlmRequest};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Chat,
    Image,
    Embed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Call {
    pub kind: CallKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
}

/// Shared, ordered record of calls across several metered backends.
#[derive(Debug, Default)]
pub struct Traffic(Mutex<Vec<Call>>);

impl Traffic {
    fn push(&self, call: Call) {
        self.0.lock().expect("traffic lock").push(call);
    }

    pub fn calls(&self) -> Vec<Call> {
        self.0.lock().expect("traffic lock").clone()
    }

    pub fn count(&self, kind: CallKind) -> usize {
        self.0.lock().expect("traffic lock").iter().filter(|c| c.kind == kind).count()
    }

    pub fn reset(&self) {
        self.0.lock().expect("traffic lock").clear();
    }
}

pub struct MeteredChat<B> {
    inner: B,
    traffic: Arc<Traffic>,
}

impl<B> MeteredChat<B> {
    pub fn new(inner: B, traffic: Arc<Traffic>) -> Self {
        MeteredChat { inner, traffic }
    }
}

impl<B: ChatBackend> ChatBackend for MeteredChat<B> {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        self.traffic.push(Call {
            kind: CallKind::Chat,
            system_prompt: Some(req.system_prompt.clone()),
            prompt: req.user_prompt.clone(),
            schema_name: req.schema_name.clone(),
            count: None,
        });
        self.inner.complete_raw(req)
    }
}

pub struct MeteredImages<B> {
    inner: B,
    traffic: Arc<Traffic>,
}

impl<B> MeteredImages<B> {
    pub fn new(inner: B, traffic: Arc<Traffic>) -> Self {
        MeteredImages { inner, traffic }
    }
}

impl<B: ImageBackend> ImageBackend for MeteredImages<B> {
    fn render(&self, req: &ImageRequest) -> Result<Vec<Vec<u8>>> {
        self.traffic.push(Call {
            kind: CallKind::Image,
            system_prompt: None,
            prompt: req.prompt.clone(),
            schema_name: None,
            count: Some(req.count),
        });
        self.inner.render(req)
    }
}

pub struct MeteredEmbedder<B> {
    inner: B,
    traffic: Arc<Traffic>,
}

impl<B> MeteredEmbedder<B> {
    pub fn new(inner: B, traffic: Arc<Traffic>) -> Self {
        MeteredEmbedder { inner, traffic }
    }
}

impl<B: Embedder> Embedder for MeteredEmbedder<B> {
    fn dimensions(&self) -> usize {
        self.inner.dimensions()
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        self.traffic.push(Call {
            kind: CallKind::Embed,
            system_prompt: None,
            prompt: text.to_string(),
            schema_name: None,
            count: None,
        });
        self.inner.embed_raw(text)
    }
}
