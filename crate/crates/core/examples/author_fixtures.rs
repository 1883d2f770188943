//! Records the offline LLM fixtures under `fixtures/llm` from the
//! hand-written answers in `fixtures/authoring/llm_answers.json`.
//!
//! Every request the studio makes in its bundled demo flows is answered from
//! that file and saved under the request's fixture key, so `MockChat` can
//! replay it. Run from the repository root:
//!
//! ```text
//! cargo run -p agora-core --example author_fixtures
//! ```

use std::error::Error as StdError;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use agora_core::clock::ManualClock;
use agora_core::gateways::mock::{FnChat, MockEmbedder, MockImages, RecordingChat};
use agora_core::gateways::store::ImageStore;
use agora_core::gateways::{Gateways, LlmRequest};
use agora_core::interpret::build_interpretation_set;
use agora_core::modes::{diverse_rewrite, reformulate, DEFAULT_SUGGESTIONS};
use agora_core::wiki::{run_pipeline, FixtureWiki, PipelineConfig};
use agora_core::Error;
use serde_json::{json, Value};

const AGONISTIC_PROMPTS: &[&str] = &[
    "the signing of the Declaration of Independence",
    "a Roman gladiator",
    "a Founding Father signing documents",
];
const CONTROVERSY_SUBJECT: &str = "Declaration of Independence";

fn line_after<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(prefix)).map(str::trim)
}

fn missing(what: String) -> Error {
    eprintln!("no authored answer for {what}");
    Error::FixtureMissing { key: what }
}

fn answer(a: &Value, req: &LlmRequest) -> agora_core::Result<String> {
    let user = &req.user_prompt;
    let lookup = |table: &str, k: &str| a[table].get(k).cloned().ok_or_else(|| missing(format!("{table}[{k:?}]")));
    let v = match req.schema_name.as_deref() {
        Some("main_subject") => json!({"main_subject": lookup("subjects", line_after(user, "Prompt:").unwrap_or(""))?}),
        Some("mental_images") => json!({"mental_images": lookup("mental_images", line_after(user, "Subject:").unwrap_or(""))?}),
        Some("relevant_titles") => json!({"titles": a["relevance"].clone()}),
        Some("section_choice") => {
            let page = line_after(user, "Page:").unwrap_or("");
            let sections = lookup("interpretations", page)?;
            let chosen = sections.as_object().and_then(|m| m.keys().next().cloned());
            json!({"section_title": chosen.ok_or_else(|| missing(format!("section for {page}")))?})
        }
        Some("interpretation") => {
            let page = line_after(user, "Page:").unwrap_or("");
            let section = line_after(user, "Section:").unwrap_or("");
            let extract = line_after(user, "Extract:").unwrap_or("");
            a["interpretations"]
                .get(page)
                .and_then(|p| p.get(section))
                .cloned()
                .ok_or_else(|| missing(format!("interpretation {page} / {section}: {extract}")))?
        }
        Some("suggestions") => json!({"suggestions": lookup("reformulations", line_after(user, "Prompt:").unwrap_or(""))?}),
        Some(other) => return Err(missing(format!("schema {other}"))),
        None => {
            let prompt = req
                .system_prompt
                .strip_prefix("You are given the prompt \"")
                .and_then(|s| s.split_once(".\"\n"))
                .map(|(p, _)| p)
                .ok_or_else(|| missing("diverse system prompt".into()))?;
            let n: usize = user
                .strip_prefix("Write rewrite ")
                .and_then(|s| s.split_whitespace().next())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| missing("diverse index".into()))?;
            let text = lookup("diverse", prompt)?[n - 1].as_str().map(str::to_string);
            return text.ok_or_else(|| missing(format!("diverse[{prompt:?}][{}]", n - 1)));
        }
    };
    Ok(v.to_string())
}

fn main() -> Result<(), Box<dyn StdError>> {
    let root = Path::new("fixtures");
    let answers: Value = serde_json::from_str(&fs::read_to_string(root.join("authoring/llm_answers.json"))?)?;
    let out = root.join("llm");
    if out.exists() {
        fs::remove_dir_all(&out)?;
    }
    let a = answers.clone();
    let chat = RecordingChat::new(FnChat(move |req: &LlmRequest| answer(&a, req)), &out)?;
    let gw = Gateways {
        chat: Arc::new(chat),
        images: Arc::new(MockImages),
        embedder: Arc::new(MockEmbedder::default()),
        store: Arc::new(ImageStore::in_memory()),
        clock: Arc::new(ManualClock::default()),
        max_in_flight: 4,
    };
    let wiki = FixtureWiki::new(root.join("wiki"));
    let cfg = PipelineConfig::default();

    let report = run_pipeline(&wiki, gw.chat.as_ref(), CONTROVERSY_SUBJECT, CONTROVERSY_SUBJECT, &cfg, 4)?;
    println!("controversy {CONTROVERSY_SUBJECT:?}: {} sampled", report.sampled.len());
    for p in &report.sampled {
        println!("  {} ({})", p.title, p.page_id);
    }
    for prompt in AGONISTIC_PROMPTS {
        let set = build_interpretation_set(&gw, &wiki, prompt, &cfg)?;
        println!("agonistic {prompt:?}: {} interpretations, {} failures", set.interpretations.len(), set.failures.len());
        for f in &set.failures {
            println!("  failed {}: {}", f.page.title, f.message);
        }
    }
    for prompt in answers["diverse"].as_object().into_iter().flatten().map(|(k, _)| k) {
        println!("diverse {prompt:?}: {} rewrites", diverse_rewrite(&gw, prompt)?.len());
    }
    for prompt in answers["reformulations"].as_object().into_iter().flatten().map(|(k, _)| k) {
        println!("reformulate {prompt:?}: {} suggestions", reformulate(&gw, prompt, DEFAULT_SUGGESTIONS)?.len());
    }
    println!("{} fixtures in {}", fs::read_dir(&out)?.count(), out.display());
    Ok(())
}
