//! The three non-agonistic generation modes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gateways::{complete, ChatBackend, Gateways, ImageRequest, LlmRequest};
use crate::ids::{seed_from, Token};
use crate::model::{GeneratedImage, Mode, Suggestion};
use crate::parallel::map_bounded;
use crate::prompts;
use crate::text::content_words;

pub const BASELINE_IMAGES: u32 = 4;
pub const DIVERSE_REWRITES: usize = 4;
pub const DEFAULT_SUGGESTIONS: usize = 8;
pub const MIN_SUGGESTIONS: usize = 3;

fn clean_prompt(prompt: &str) -> Result<&str> {
    let p = prompt.trim();
    if p.is_empty() {
        return Err(Error::invalid("prompt is empty"));
    }
    Ok(p)
}

/// Four images straight from the prompt, with no language model involved.
pub fn baseline_generate(gw: &Gateways, prompt: &str, seed: Option<u64>) -> Result<Vec<GeneratedImage>> {
    let p = clean_prompt(prompt)?;
    gw.generate_image(&ImageRequest::new(p, BASELINE_IMAGES, seed), Mode::Baseline)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rewrite {
    pub index: usize,
    pub text: String,
    /// The model handed back the original prompt.
    pub unchanged: bool,
}

/// The system prompt of every diverse rewrite call.
pub fn diverse_system_prompt(prompt: &str) -> String {
    prompts::fill(prompts::DIVERSE, &[("prompt", prompt)])
}

pub fn diverse_request(prompt: &str, index: usize) -> LlmRequest {
    LlmRequest::text(
        diverse_system_prompt(prompt),
        format!(
            "Write rewrite {} of {DIVERSE_REWRITES} of the prompt. Reply with the rewritten prompt only.",
            index + 1
        ),
    )
}

fn strip_wrapping(text: &str) -> String {
    let t = text.trim();
    let t = t.strip_prefix("Rewritten prompt:").unwrap_or(t).trim();
    t.trim_matches(|c| c == '"' || c == '\u{201C}' || c == '\u{201D}').trim().to_string()
}

fn rewrite_once(chat: &dyn ChatBackend, prompt: &str, index: usize) -> Result<Rewrite> {
    let req = diverse_request(prompt, index);
    let mut last = None;
    for r in [req.clone(), {
        let mut r = req;
        r.user_prompt.push_str(prompts::RETRY_NOTE);
        r
    }] {
        match complete(chat, &r) {
            Ok(resp) => {
                let text = strip_wrapping(&resp.text);
                if !text.is_empty() {
                    let unchanged = text == prompt;
                    if unchanged {
                        log::warn!("diverse rewrite {index} returned the prompt unchanged");
                    }
                    return Ok(Rewrite { index, text, unchanged });
                }
                log::warn!("diverse rewrite {index} was empty");
                last = Some(Error::GatewayUnavailable("empty rewrite".into()));
            }
            Err(e @ (Error::FixtureMissing { .. } | Error::InvalidRequest(_))) => return Err(e),
            Err(e) => {
                log::warn!("diverse rewrite {index} failed: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.expect("two attempts ran"))
}

/// Outcome of the diverse mode. `rewrites` holds only the calls that
/// succeeded, in index order; `images[i]` was rendered from `rewrites[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiverseRun {
    pub original: String,
    pub rewrites: Vec<Rewrite>,
    pub images: Vec<GeneratedImage>,
    /// `partial-rewrite` when some (not all) rewrite calls failed.
    pub error: Option<Error>,
}

fn rewrite_all(gw: &Gateways, prompt: &str) -> Result<(Vec<Rewrite>, Option<Error>)> {
    let indices: Vec<usize> = (0..DIVERSE_REWRITES).collect();
    let results = map_bounded(&indices, gw.max_in_flight, |_, &i| rewrite_once(gw.chat.as_ref(), prompt, i));
    let mut ok = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(rw) => ok.push(rw),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        None => Ok((ok, None)),
        Some(e) if ok.is_empty() => Err(e),
        Some(_) => {
            let succeeded = ok.iter().map(|r| r.index).collect();
            Ok((ok, Some(Error::PartialRewrite { succeeded })))
        }
    }
}

/// Four independent rewrites of the prompt under the fixed diversity
/// instructions. Fails with `partial-rewrite` unless all four succeed.
pub fn diverse_rewrite(gw: &Gateways, prompt: &str) -> Result<Vec<Rewrite>> {
    let p = clean_prompt(prompt)?;
    match rewrite_all(gw, p)? {
        (rw, None) => Ok(rw),
        (_, Some(e)) => Err(e),
    }
}

/// All rewrites first, then one image per rewrite. A partial failure still
/// yields the images of the rewrites that succeeded.
pub fn diverse_generate(gw: &Gateways, prompt: &str, seed: Option<u64>) -> Result<DiverseRun> {
    let p = clean_prompt(prompt)?;
    let (rewrites, error) = rewrite_all(gw, p)?;
    let images = map_bounded(&rewrites, gw.max_in_flight, |_, rw| {
        let s = seed.map(|s| seed_from(["diverse-v1", &s.to_string(), &rw.index.to_string()]));
        gw.generate_image(&ImageRequest::new(rw.text.clone(), 1, s), Mode::Diverse)
            .map(|mut v| v.remove(0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DiverseRun {
        original: p.to_string(),
        rewrites,
        images,
        error,
    })
}

pub fn reformulate_request(prompt: &str, count: usize) -> LlmRequest {
    LlmRequest::structured(
        prompts::fill(prompts::REFORMULATE, &[("count", &count.to_string())]),
        format!("Prompt: {prompt}"),
        "suggestions",
    )
}

/// A usable reformulation is strictly longer than the prompt and keeps at
/// least one of its content words.
pub fn adds_detail(prompt: &str, candidate: &str) -> bool {
    let (p, c) = (prompt.trim(), candidate.trim());
    if c.chars().count() <= p.chars().count() {
        return false;
    }
    let words = content_words(p);
    let lower = c.to_lowercase();
    words.is_empty() || words.iter().any(|w| lower.contains(w.as_str()))
}

fn valid_suggestions(v: &Value, prompt: &str, into: &mut Vec<String>) {
    for s in v["suggestions"].as_array().into_iter().flatten().filter_map(Value::as_str) {
        let s = s.trim().trim_start_matches(['-', '*']).trim();
        if s.is_empty() || into.iter().any(|o| o.eq_ignore_ascii_case(s)) {
            continue;
        }
        if adds_detail(prompt, s) {
            into.push(s.to_string());
        } else {
            log::info!("dropping reformulation {s:?}: adds no detail to {prompt:?}");
        }
    }
}

/// `count` (6 to 10) detail-adding reformulations, each with a thumbnail.
/// Fewer than three usable ones after a retry is a `generation-shortfall`.
pub fn reformulate(gw: &Gateways, prompt: &str, count: usize) -> Result<Vec<Suggestion>> {
    let p = clean_prompt(prompt)?;
    if !(6..=10).contains(&count) {
        return Err(Error::invalid(format!("suggestion count {count} is outside 6..=10")));
    }
    let req = reformulate_request(p, count);
    let mut texts = Vec::new();
    for (attempt, r) in [req.clone(), {
        let mut r = req;
        r.user_prompt.push_str(prompts::RETRY_NOTE);
        r
    }]
    .iter()
    .enumerate()
    {
        match complete(gw.chat.as_ref(), r) {
            Ok(resp) => valid_suggestions(resp.parsed.as_ref().expect("structured"), p, &mut texts),
            Err(Error::StructuredParse(e)) => log::warn!("reformulation attempt {} unparseable: {e}", attempt + 1),
            Err(e) => return Err(e),
        }
        if texts.len() >= MIN_SUGGESTIONS {
            break;
        }
        log::warn!("reformulation attempt {} left {} usable", attempt + 1, texts.len());
    }
    if texts.len() < MIN_SUGGESTIONS {
        return Err(Error::GenerationShortfall {
            wanted: MIN_SUGGESTIONS,
            got: texts.len(),
        });
    }
    texts.truncate(count);
    map_bounded(&texts, gw.max_in_flight, |_, text| {
        let id = Token::derived(["suggestion-v1", p, text.as_str()]);
        let thumbnail = gw
            .generate_image(&ImageRequest::new(text.clone(), 1, Some(id.seed())), Mode::Reformulative)?
            .remove(0);
        Ok(Suggestion {
            id,
            reformulated_prompt: text.clone(),
            thumbnail,
        })
    })
    .into_iter()
    .collect()
}
