//! Controversy retrieval: search a wiki for pages about a subject, keep the
//! ones relevant to the prompt, score each by edits per unique editor, and
//! draw a seeded sample from the most contested.

pub mod backend;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateways::{complete, ChatBackend, LlmRequest};
use crate::parallel::map_bounded;
use crate::prompts;
use crate::text::{split_sentences, truncate_chars};

pub use backend::{page_url, search_slug, title_key, FixtureWiki, HttpWiki, WikiBackend, DEFAULT_WIKI_BASE};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PageRef {
    pub page_id: u64,
    pub title: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageControversy {
    pub page: PageRef,
    pub edit_count: u64,
    pub unique_editors: u64,
    pub score: f64,
}

impl PageControversy {
    pub fn new(page: PageRef, edit_count: u64, unique_editors: u64) -> Result<Self> {
        let score = controversy_score(edit_count, unique_editors)?;
        Ok(PageControversy {
            page,
            edit_count,
            unique_editors,
            score,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub search_limit: usize,
    pub relevance_keep: usize,
    pub top_k: usize,
    pub sample_k: usize,
    pub rng_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            search_limit: 50,
            relevance_keep: 40,
            top_k: 20,
            sample_k: 10,
            rng_seed: 1,
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        PipelineConfig {
            rng_seed: seed,
            ..PipelineConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0 < self.sample_k
            && self.sample_k <= self.top_k
            && self.top_k <= self.relevance_keep
            && self.relevance_keep <= self.search_limit;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "need 0 < sample_k <= top_k <= relevance_keep <= search_limit, got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub page: PageRef,
    pub section_title: String,
    pub extract: String,
}

pub const LEAD_SECTION: &str = "Introduction";

impl Section {
    /// Link to the section anchor; the lead links to the page itself.
    pub fn url(&self) -> String {
        if self.section_title == LEAD_SECTION {
            self.page.url.clone()
        } else {
            format!("{}#{}", self.page.url, title_key(&self.section_title))
        }
    }
}

/// Edits per unique editor.
pub fn controversy_score(edit_count: u64, unique_editors: u64) -> Result<f64> {
    if unique_editors == 0 {
        return Err(Error::InvalidInput("unique_editors must be at least 1".into()));
    }
    Ok(edit_count as f64 / unique_editors as f64)
}

/// Search hits for `subject`, deduplicated by page id, at most `search_limit`.
pub fn search_pages(wiki: &dyn WikiBackend, subject: &str, cfg: &PipelineConfig) -> Result<Vec<PageRef>> {
    let subject = subject.trim();
    if subject.is_empty() {
        return Err(Error::invalid("subject is empty"));
    }
    let mut seen = BTreeSet::new();
    let mut pages: Vec<PageRef> = wiki
        .search(subject, cfg.search_limit)?
        .into_iter()
        .filter(|p| seen.insert(p.page_id))
        .collect();
    pages.truncate(cfg.search_limit);
    if pages.is_empty() {
        return Err(Error::EmptyResult(subject.to_string()));
    }
    Ok(pages)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceOutcome {
    pub pages: Vec<PageRef>,
    /// Titles the model returned that were not among the candidates.
    pub unknown_titles: Vec<String>,
    /// Candidates appended from the input order to reach the wanted count.
    pub padded: usize,
    /// True when too few titles survived and the input order was used.
    pub degraded: bool,
}

fn normalize_title(t: &str) -> String {
    let t = t.trim();
    let t = t.trim_start_matches(|c: char| c.is_ascii_digit());
    let t = t.strip_prefix('.').or_else(|| t.strip_prefix(')')).unwrap_or(t);
    t.trim().trim_matches('"').to_lowercase()
}

fn relevance_request(pages: &[PageRef], prompt: &str, keep: usize) -> LlmRequest {
    let mut user = format!("Prompt: {prompt}\nTitles:\n");
    for (i, p) in pages.iter().enumerate() {
        user.push_str(&format!("{}. {}\n", i + 1, p.title));
    }
    LlmRequest::structured(
        prompts::fill(prompts::RELEVANCE, &[("keep", &keep.to_string())]),
        user.trim_end(),
        "relevant_titles",
    )
}

/// Asks the model for the `relevance_keep` titles most relevant to `prompt`.
/// Only titles are sent. The model's order is kept.
pub fn filter_relevant(
    chat: &dyn ChatBackend,
    pages: &[PageRef],
    prompt: &str,
    cfg: &PipelineConfig,
) -> Result<RelevanceOutcome> {
    if pages.is_empty() {
        return Err(Error::invalid("no pages to filter"));
    }
    let want = cfg.relevance_keep.min(pages.len());
    if pages.len() <= cfg.relevance_keep {
        return Ok(RelevanceOutcome {
            pages: pages.to_vec(),
            unknown_titles: Vec::new(),
            padded: 0,
            degraded: false,
        });
    }
    let req = relevance_request(pages, prompt, want);
    let titles = match complete(chat, &req).or_else(|first| {
        log::warn!("relevance filter failed ({first}); retrying once");
        let mut retry = req.clone();
        retry.user_prompt.push_str(prompts::RETRY_NOTE);
        complete(chat, &retry)
    }) {
        Ok(resp) => resp.parsed.and_then(|v| {
            v["titles"]
                .as_array()
                .map(|a| a.iter().filter_map(|t| t.as_str().map(str::to_string)).collect::<Vec<_>>())
        }),
        Err(e @ (Error::GatewayUnavailable(_) | Error::FixtureMissing { .. })) => return Err(e),
        Err(e) => {
            log::warn!("relevance filter unusable after retry: {e}");
            None
        }
    }
    .unwrap_or_default();

    let exact: HashMap<&str, &PageRef> = pages.iter().map(|p| (p.title.as_str(), p)).collect();
    let loose: HashMap<String, &PageRef> = pages.iter().map(|p| (normalize_title(&p.title), p)).collect();
    let mut chosen: Vec<PageRef> = Vec::new();
    let mut taken = BTreeSet::new();
    let mut unknown = Vec::new();
    for t in titles {
        match exact.get(t.as_str()).or_else(|| loose.get(&normalize_title(&t))) {
            Some(p) => {
                if chosen.len() < want && taken.insert(p.page_id) {
                    chosen.push((*p).clone());
                }
            }
            None => unknown.push(t),
        }
    }
    if !unknown.is_empty() {
        log::warn!("relevance filter dropped {} unknown titles: {unknown:?}", unknown.len());
    }
    if chosen.len() * 2 < want {
        log::warn!(
            "relevance-filter-degraded: only {} of {want} titles valid; using search order",
            chosen.len()
        );
        return Ok(RelevanceOutcome {
            pages: pages[..want].to_vec(),
            unknown_titles: unknown,
            padded: 0,
            degraded: true,
        });
    }
    let before = chosen.len();
    for p in pages {
        if chosen.len() >= want {
            break;
        }
        if taken.insert(p.page_id) {
            chosen.push(p.clone());
        }
    }
    let padded = chosen.len() - before;
    if padded > 0 {
        log::warn!("relevance filter returned {before} of {want} titles; padded {padded} from search order");
    }
    Ok(RelevanceOutcome {
        pages: chosen,
        unknown_titles: unknown,
        padded,
        degraded: false,
    })
}

/// Counts for one page; zero editors is reported as malformed.
pub fn fetch_edit_stats(wiki: &dyn WikiBackend, page: &PageRef) -> Result<(u64, u64)> {
    let (edits, editors) = wiki.edit_counts(page)?;
    if editors == 0 {
        return Err(Error::MalformedStats(format!("{} reports 0 editors", page.title)));
    }
    Ok((edits, editors))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPage {
    pub page: PageRef,
    pub reason: String,
    pub message: String,
}

/// Fetches stats for every page, at most `workers` at a time. Pages whose
/// stats cannot be read are dropped, never zero-scored.
pub fn score_pages(
    wiki: &dyn WikiBackend,
    pages: &[PageRef],
    workers: usize,
) -> Result<(Vec<PageControversy>, Vec<DroppedPage>)> {
    let results = map_bounded(pages, workers, |_, p| fetch_edit_stats(wiki, p));
    let mut scored = Vec::new();
    let mut dropped = Vec::new();
    for (page, r) in pages.iter().zip(results) {
        match r.and_then(|(e, u)| PageControversy::new(page.clone(), e, u)) {
            Ok(pc) => scored.push(pc),
            Err(e @ (Error::PageMissing(_) | Error::MalformedStats(_))) => {
                log::warn!("dropping page {} ({}): {e}", page.page_id, page.title);
                dropped.push(DroppedPage {
                    page: page.clone(),
                    reason: e.code().to_string(),
                    message: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok((scored, dropped))
}

/// Most contested first; equal scores by ascending page id.
pub fn rank(scored: &[PageControversy]) -> Vec<PageControversy> {
    let mut v = scored.to_vec();
    v.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.page.page_id.cmp(&b.page.page_id)));
    v
}

/// Seeded draw of `k` distinct positions from `0..n`: the first `k` steps of
/// a forward Fisher-Yates shuffle over ChaCha8.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let k = k.min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..k {
        let j = rng.random_range(i as u64..n as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Sort, keep the top `top_k`, and sample `sample_k` of those in sampled order.
pub fn rank_and_sample(scored: &[PageControversy], cfg: &PipelineConfig) -> Result<Vec<PageRef>> {
    if scored.is_empty() {
        return Err(Error::invalid("nothing to rank"));
    }
    let ranked = rank(scored);
    let top = &ranked[..cfg.top_k.min(ranked.len())];
    Ok(sample_indices(top.len(), cfg.sample_k, cfg.rng_seed)
        .into_iter()
        .map(|i| top[i].page.clone())
        .collect())
}

fn heading(line: &str) -> Option<(usize, &str)> {
    let t = line.trim();
    if !(t.starts_with("==") && t.ends_with("==") && t.len() > 4) {
        return None;
    }
    let level = t.chars().take_while(|&c| c == '=').count();
    let closing = t.chars().rev().take_while(|&c| c == '=').count();
    if level != closing {
        return None;
    }
    let title = t[level..t.len() - closing].trim();
    (!title.is_empty()).then_some((level, title))
}

/// First two sentences or first 400 characters, whichever is shorter.
pub fn lead_extract(body: &str) -> String {
    let collapsed = body.split_whitespace().collect::<Vec<_>>().join(" ");
    let two = split_sentences(&collapsed).into_iter().take(2).collect::<Vec<_>>().join(" ");
    let capped = truncate_chars(&collapsed, 400).trim_end();
    if two.chars().count() <= capped.chars().count() {
        two
    } else {
        capped.to_string()
    }
}

/// Splits a plain-text page into its lead and top-level sections.
/// Subsection text is folded into its parent; sections with no text are
/// omitted.
pub fn parse_sections(page: &PageRef, text: &str) -> Vec<Section> {
    let mut parts: Vec<(String, String)> = vec![(LEAD_SECTION.to_string(), String::new())];
    for line in text.lines() {
        match heading(line) {
            Some((2, title)) => parts.push((title.to_string(), String::new())),
            Some(_) => {}
            None => {
                let body = &mut parts.last_mut().expect("lead present").1;
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    parts
        .into_iter()
        .filter_map(|(title, body)| {
            let extract = lead_extract(&body);
            (!extract.is_empty()).then(|| Section {
                page: page.clone(),
                section_title: title,
                extract,
            })
        })
        .collect()
}

pub fn extract_sections(wiki: &dyn WikiBackend, page: &PageRef) -> Result<Vec<Section>> {
    let text = wiki.page_text(page)?;
    Ok(parse_sections(page, &text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub rank: usize,
    pub page_id: u64,
    pub title: String,
    pub url: String,
    pub edit_count: u64,
    pub unique_editors: u64,
    pub score: f64,
    pub sampled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_position: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControversyReport {
    pub subject: String,
    pub prompt: String,
    pub config: PipelineConfig,
    pub search_hits: usize,
    pub relevance: RelevanceOutcome,
    pub rows: Vec<ReportRow>,
    pub dropped: Vec<DroppedPage>,
    pub sampled: Vec<PageRef>,
}

/// Search, relevance filter, score, rank and sample.
pub fn run_pipeline(
    wiki: &dyn WikiBackend,
    chat: &dyn ChatBackend,
    subject: &str,
    prompt: &str,
    cfg: &PipelineConfig,
    workers: usize,
) -> Result<ControversyReport> {
    cfg.validate()?;
    let hits = search_pages(wiki, subject, cfg)?;
    let relevance = filter_relevant(chat, &hits, prompt, cfg)?;
    let (scored, dropped) = score_pages(wiki, &relevance.pages, workers)?;
    if scored.is_empty() {
        return Err(Error::EmptyResult(subject.to_string()));
    }
    let sampled = rank_and_sample(&scored, cfg)?;
    let positions: BTreeMap<u64, usize> = sampled.iter().enumerate().map(|(i, p)| (p.page_id, i)).collect();
    let rows = rank(&scored)
        .into_iter()
        .enumerate()
        .map(|(i, pc)| ReportRow {
            rank: i + 1,
            page_id: pc.page.page_id,
            title: pc.page.title,
            url: pc.page.url,
            edit_count: pc.edit_count,
            unique_editors: pc.unique_editors,
            score: pc.score,
            sampled: positions.contains_key(&pc.page.page_id),
            sample_position: positions.get(&pc.page.page_id).copied(),
        })
        .collect();
    Ok(ControversyReport {
        subject: subject.trim().to_string(),
        prompt: prompt.to_string(),
        config: *cfg,
        search_hits: hits.len(),
        relevance,
        rows,
        dropped,
        sampled,
    })
}
