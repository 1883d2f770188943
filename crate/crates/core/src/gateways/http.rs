//! HTTP backends.
//!
//! Two wire formats are spoken. The `minimal` contract (see
//! `docs/backends.md`) is one POST per capability:
//!
//! | capability | request body                                   | response body              |
//! |------------|------------------------------------------------|----------------------------|
//! | chat       | `{model, system, prompt, temperature?}`        | `{text}`                   |
//! | image      | `{model, prompt, count, seed?}`                | `{images: [base64 png]}`   |
//! | embedding  | `{model, text}`                                | `{embedding: [f64]}`       |
//!
//! The `openai` flavor maps the same calls onto `/chat/completions`,
//! `/images/generations` and `/embeddings` under the configured endpoint.
//!
//! Transport errors, 429 and 5xx are retried with exponential backoff up to
//! `max_retries` times; any other status fails at once.

use std::sync::OnceLock;
use std::thread;
use std::time::Duration;

use base64::Engine;
use serde_json::{json, Value};

use super::config::{ApiFlavor, BackendConfig};
use super::{ChatBackend, Completion, Embedder, ImageBackend, ImageRequest, LlmRequest};
use crate::error::{Error, Result};
use crate::parallel::Limiter;

/// Shared plumbing: lazily built client, concurrency cap and retry loop.
pub struct HttpTransport {
    cfg: BackendConfig,
    client: OnceLock<reqwest::blocking::Client>,
    limiter: Limiter,
}

impl HttpTransport {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        cfg.validate()?;
        let limiter = Limiter::new(cfg.max_in_flight);
        Ok(HttpTransport {
            cfg,
            client: OnceLock::new(),
            limiter,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    fn client(&self) -> Result<&reqwest::blocking::Client> {
        if let Some(c) = self.client.get() {
            return Ok(c);
        }
        let built = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(self.cfg.timeout_ms))
            .user_agent(concat!("agora-studio/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::GatewayUnavailable(format!("cannot build http client: {e}")))?;
        Ok(self.client.get_or_init(|| built))
    }

    fn url(&self, path: &str) -> String {
        let base = self.cfg.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        if path.is_empty() {
            base.to_string()
        } else {
            format!("{base}/{path}")
        }
    }

    /// POSTs `body` and returns the decoded JSON response plus the number of
    /// attempts spent.
    pub fn post_json(&self, path: &str, body: &Value) -> Result<(Value, u32)> {
        let url = self.url(path);
        self.execute("POST", &url, |c| c.post(&url).json(body))
    }

    /// GETs `path` with the given query pairs. A 404 becomes `NotFound`.
    pub fn get_json(&self, path: &str, query: &[(&str, &str)]) -> Result<(Value, u32)> {
        let mut url = reqwest::Url::parse(&self.url(path)).map_err(|e| Error::invalid(format!("bad url: {e}")))?;
        if !query.is_empty() {
            url.query_pairs_mut().extend_pairs(query);
        }
        self.execute("GET", url.as_str(), |c| c.get(url.clone()))
    }

    fn execute<F>(&self, method: &str, url: &str, build: F) -> Result<(Value, u32)>
    where
        F: Fn(&reqwest::blocking::Client) -> reqwest::blocking::RequestBuilder,
    {
        let _permit = self.limiter.acquire();
        let client = self.client()?;
        let total = self.cfg.max_retries + 1;
        let mut last_err = String::new();
        for attempt in 1..=total {
            let mut req = build(client);
            if let Some(secret) = self.cfg.secret() {
                req = req.bearer_auth(secret);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    log::info!("{method} {url} attempt {attempt}/{total}: {status}");
                    if status.is_success() {
                        let v = resp
                            .json::<Value>()
                            .map_err(|e| Error::GatewayUnavailable(format!("bad response body from {url}: {e}")))?;
                        return Ok((v, attempt));
                    }
                    if status.as_u16() == 404 {
                        return Err(Error::NotFound(url.to_string()));
                    }
                    last_err = format!("{url} returned {status}");
                    if !(status.as_u16() == 429 || status.is_server_error()) {
                        return Err(Error::GatewayUnavailable(last_err));
                    }
                }
                Err(e) => {
                    log::info!("{method} {url} attempt {attempt}/{total}: transport error");
                    last_err = format!("{url}: {}", e.without_url());
                }
            }
            if attempt < total {
                let wait = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                thread::sleep(Duration::from_millis(wait));
            }
        }
        Err(Error::GatewayUnavailable(format!("{last_err} after {total} attempts")))
    }
}

fn missing(what: &str) -> Error {
    Error::GatewayUnavailable(format!("response lacks {what}"))
}

pub struct HttpChat(pub HttpTransport);

impl HttpChat {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        HttpTransport::new(cfg).map(HttpChat)
    }
}

impl ChatBackend for HttpChat {
    fn complete_raw(&self, req: &LlmRequest) -> Result<Completion> {
        let cfg = self.0.config();
        let (path, mut body) = match cfg.flavor {
            ApiFlavor::Minimal => (
                "",
                json!({"model": cfg.model_id, "system": req.system_prompt, "prompt": req.user_prompt}),
            ),
            ApiFlavor::Openai => (
                "chat/completions",
                json!({
                    "model": cfg.model_id,
                    "messages": [
                        {"role": "system", "content": req.system_prompt},
                        {"role": "user", "content": req.user_prompt},
                    ],
                }),
            ),
        };
        if let Some(t) = cfg.temperature {
            body["temperature"] = json!(t);
        }
        let (v, attempts) = self.0.post_json(path, &body)?;
        let text = match cfg.flavor {
            ApiFlavor::Minimal => v["text"].as_str(),
            ApiFlavor::Openai => v["choices"][0]["message"]["content"].as_str(),
        }
        .ok_or_else(|| missing("completion text"))?;
        Ok(Completion {
            text: text.to_string(),
            attempts,
        })
    }
}

pub struct HttpImages(pub HttpTransport);

impl HttpImages {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        HttpTransport::new(cfg).map(HttpImages)
    }
}

impl ImageBackend for HttpImages {
    fn render(&self, req: &ImageRequest) -> Result<Vec<Vec<u8>>> {
        let cfg = self.0.config();
        let (path, mut body) = match cfg.flavor {
            ApiFlavor::Minimal => ("", json!({"model": cfg.model_id, "prompt": req.prompt, "count": req.count})),
            ApiFlavor::Openai => (
                "images/generations",
                json!({"model": cfg.model_id, "prompt": req.prompt, "n": req.count, "response_format": "b64_json"}),
            ),
        };
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        let (v, _) = self.0.post_json(path, &body)?;
        let encoded: Vec<&str> = match cfg.flavor {
            ApiFlavor::Minimal => v["images"]
                .as_array()
                .ok_or_else(|| missing("images"))?
                .iter()
                .filter_map(Value::as_str)
                .collect(),
            ApiFlavor::Openai => v["data"]
                .as_array()
                .ok_or_else(|| missing("data"))?
                .iter()
                .filter_map(|d| d["b64_json"].as_str())
                .collect(),
        };
        encoded
            .into_iter()
            .map(|s| {
                base64::engine::general_purpose::STANDARD
                    .decode(s)
                    .map_err(|e| Error::GatewayUnavailable(format!("image is not base64: {e}")))
            })
            .collect()
    }
}

pub struct HttpEmbedder {
    transport: HttpTransport,
    dims: OnceLock<usize>,
}

impl HttpEmbedder {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        let dims = OnceLock::new();
        if let Some(d) = cfg.dimensions {
            let _ = dims.set(d);
        }
        Ok(HttpEmbedder {
            transport: HttpTransport::new(cfg)?,
            dims,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn dimensions(&self) -> usize {
        self.dims.get().copied().unwrap_or(0)
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        let cfg = self.transport.config();
        let (path, body, pointer) = match cfg.flavor {
            ApiFlavor::Minimal => ("", json!({"model": cfg.model_id, "text": text}), "/embedding"),
            ApiFlavor::Openai => ("embeddings", json!({"model": cfg.model_id, "input": text}), "/data/0/embedding"),
        };
        let (v, _) = self.transport.post_json(path, &body)?;
        let vector: Vec<f64> = v
            .pointer(pointer)
            .and_then(Value::as_array)
            .ok_or_else(|| missing("embedding"))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| missing("numeric embedding")))
            .collect::<Result<_>>()?;
        self.dims.get_or_init(|| vector.len());
        Ok(vector)
    }
}
