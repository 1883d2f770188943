//! Wiki data sources: recorded fixtures on disk or a live MediaWiki.
//!
//! Fixture layout (response bodies are the live API's, verbatim):
//!
//! ```text
//! <dir>/search/<slug>.json              REST search/page response
//! <dir>/pages/<key>/edits.json          REST history/counts/edits response
//! <dir>/pages/<key>/editors.json        REST history/counts/editors response
//! <dir>/pages/<key>/extract.json        action API prop=extracts response
//! ```
//!
//! `<slug>` is [`search_slug`] of the query and `<key>` is [`title_key`] of
//! the page title.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::PageRef;
use crate::error::{Error, Result};
use crate::gateways::http::HttpTransport;
use crate::gateways::BackendConfig;

pub const DEFAULT_WIKI_BASE: &str = "https://en.wikipedia.org";

pub trait WikiBackend: Send + Sync {
    /// Pages matching `query`, in the backend's relevance order.
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PageRef>>;
    /// Raw `(edits, editors)` counts as reported by the backend.
    fn edit_counts(&self, page: &PageRef) -> Result<(u64, u64)>;
    /// Plain-text page body with `== Heading ==` section markers.
    fn page_text(&self, page: &PageRef) -> Result<String>;
}

/// Title as it appears in wiki URLs: spaces become underscores.
pub fn title_key(title: &str) -> String {
    title.trim().replace(' ', "_")
}

pub fn page_url(base: &str, title: &str) -> String {
    let mut url = reqwest::Url::parse(base).expect("valid wiki base url");
    url.path_segments_mut()
        .expect("wiki base url can have a path")
        .pop_if_empty()
        .push("wiki")
        .push(&title_key(title));
    url.to_string()
}

/// File-name-safe form of a search query.
pub fn search_slug(query: &str) -> String {
    let mut out = String::new();
    for c in query.trim().chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn fixture_dir_name(title: &str) -> String {
    title_key(title).replace('/', "%2F")
}

fn parse_search(v: &Value, base: &str) -> Result<Vec<PageRef>> {
    let pages = v["pages"]
        .as_array()
        .ok_or_else(|| Error::GatewayUnavailable("search response lacks pages".into()))?;
    pages
        .iter()
        .map(|p| {
            let page_id = p["id"].as_u64().filter(|id| *id > 0);
            let title = p["title"].as_str().filter(|t| !t.trim().is_empty());
            match (page_id, title) {
                (Some(page_id), Some(title)) => Ok(PageRef {
                    page_id,
                    title: title.to_string(),
                    url: page_url(base, title),
                }),
                _ => Err(Error::GatewayUnavailable(format!("malformed search hit {p}"))),
            }
        })
        .collect()
}

fn parse_count(v: &Value, what: &str, page: &PageRef) -> Result<u64> {
    v["count"]
        .as_u64()
        .ok_or_else(|| Error::MalformedStats(format!("{}: {what} count missing", page.title)))
}

fn parse_extract(v: &Value, page: &PageRef) -> Result<String> {
    let first = v
        .pointer("/query/pages/0")
        .ok_or_else(|| Error::PageMissing(page.title.clone()))?;
    if first["missing"].as_bool().unwrap_or(false) || first.get("invalid").is_some() {
        return Err(Error::PageMissing(page.title.clone()));
    }
    first["extract"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::PageMissing(page.title.clone()))
}

/// Replays recorded responses from disk.
#[derive(Debug, Clone)]
pub struct FixtureWiki {
    dir: PathBuf,
    base: String,
}

impl FixtureWiki {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureWiki {
            dir: dir.into(),
            base: DEFAULT_WIKI_BASE.to_string(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn page_file(&self, page: &PageRef, name: &str) -> Result<Value> {
        let path = self.dir.join("pages").join(fixture_dir_name(&page.title)).join(name);
        let raw = fs::read_to_string(&path).map_err(|_| Error::PageMissing(page.title.clone()))?;
        serde_json::from_str(&raw).map_err(|e| Error::Storage(format!("{}: {e}", path.display())))
    }
}

impl WikiBackend for FixtureWiki {
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PageRef>> {
        let slug = search_slug(query);
        let path = self.dir.join("search").join(format!("{slug}.json"));
        let raw = fs::read_to_string(&path).map_err(|_| {
            log::warn!("no wiki search fixture at {}", path.display());
            Error::FixtureMissing { key: format!("search/{slug}") }
        })?;
        let v: Value = serde_json::from_str(&raw).map_err(|e| Error::Storage(format!("{}: {e}", path.display())))?;
        let mut pages = parse_search(&v, &self.base)?;
        pages.truncate(limit);
        Ok(pages)
    }

    fn edit_counts(&self, page: &PageRef) -> Result<(u64, u64)> {
        let edits = parse_count(&self.page_file(page, "edits.json")?, "edits", page)?;
        let editors = parse_count(&self.page_file(page, "editors.json")?, "editors", page)?;
        Ok((edits, editors))
    }

    fn page_text(&self, page: &PageRef) -> Result<String> {
        parse_extract(&self.page_file(page, "extract.json")?, page)
    }
}

/// Live MediaWiki: REST search and history counts, action API extracts.
pub struct HttpWiki {
    transport: HttpTransport,
    base: String,
}

impl HttpWiki {
    /// `cfg.endpoint` is the wiki origin, e.g. `https://en.wikipedia.org`.
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        let base = cfg
            .endpoint
            .clone()
            .unwrap_or_else(|| DEFAULT_WIKI_BASE.to_string())
            .trim_end_matches('/')
            .to_string();
        reqwest::Url::parse(&base).map_err(|e| Error::invalid(format!("bad wiki base url: {e}")))?;
        let cfg = BackendConfig {
            endpoint: Some(base.clone()),
            ..cfg
        };
        Ok(HttpWiki {
            transport: HttpTransport::new(cfg)?,
            base,
        })
    }

    fn counts_path(page: &PageRef, which: &str) -> String {
        let mut url = reqwest::Url::parse("http://x/").expect("static url");
        url.path_segments_mut()
            .expect("static url")
            .pop_if_empty()
            .extend(["w", "rest.php", "v1", "page"])
            .push(&title_key(&page.title))
            .extend(["history", "counts", which]);
        url.path().trim_start_matches('/').to_string()
    }

    fn missing_as_page(err: Error, page: &PageRef) -> Error {
        match err {
            Error::NotFound(_) => Error::PageMissing(page.title.clone()),
            other => other,
        }
    }
}

impl WikiBackend for HttpWiki {
    fn search(&self, query: &str, limit: usize) -> Result<Vec<PageRef>> {
        let limit = limit.to_string();
        let (v, _) = self
            .transport
            .get_json("w/rest.php/v1/search/page", &[("q", query), ("limit", &limit)])?;
        parse_search(&v, &self.base)
    }

    fn edit_counts(&self, page: &PageRef) -> Result<(u64, u64)> {
        let (e, _) = self
            .transport
            .get_json(&Self::counts_path(page, "edits"), &[])
            .map_err(|e| Self::missing_as_page(e, page))?;
        let (u, _) = self
            .transport
            .get_json(&Self::counts_path(page, "editors"), &[])
            .map_err(|e| Self::missing_as_page(e, page))?;
        Ok((parse_count(&e, "edits", page)?, parse_count(&u, "editors", page)?))
    }

    fn page_text(&self, page: &PageRef) -> Result<String> {
        let (v, _) = self
            .transport
            .get_json(
                "w/api.php",
                &[
                    ("action", "query"),
                    ("prop", "extracts"),
                    ("explaintext", "1"),
                    ("exsectionformat", "wiki"),
                    ("redirects", "1"),
                    ("format", "json"),
                    ("formatversion", "2"),
                    ("titles", &page.title),
                ],
            )
            .map_err(|e| Self::missing_as_page(e, page))?;
        parse_extract(&v, page)
    }
}
