//! Generation half of the agonistic workflow: find the prompt's main
//! subject, elicit the mental images an average person holds of it, and
//! write one interpretation per sampled wiki page that challenges them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gateways::{complete, ChatBackend, Gateways, ImageRequest, LlmRequest};
use crate::ids::Token;
use crate::model::{matches_justification_template, Interpretation, Mode, Source};
use crate::parallel::map_bounded;
use crate::prompts;
use crate::wiki::{self, extract_sections, ControversyReport, PageRef, PipelineConfig, Section, WikiBackend};

pub const MENTAL_IMAGE_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectExtraction {
    pub prompt: String,
    pub main_subject: String,
    /// Set when the subject is not a literal substring of the prompt.
    pub paraphrased: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentalImageSet {
    pub subject: String,
    pub images: Vec<String>,
}

fn ask(chat: &dyn ChatBackend, req: &LlmRequest) -> Result<Value> {
    complete(chat, req)?
        .parsed
        .ok_or_else(|| Error::StructuredParse("no structured output".into()))
}

fn with_note(req: &LlmRequest, note: &str) -> LlmRequest {
    let mut r = req.clone();
    r.user_prompt.push_str(note);
    r
}

fn str_field(v: &Value, name: &str) -> Option<String> {
    v[name].as_str().map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

pub fn subject_request(prompt: &str) -> LlmRequest {
    LlmRequest::structured(prompts::SUBJECT, format!("Prompt: {prompt}"), "main_subject")
}

/// A one-word prompt is its own subject and costs no model call.
pub fn extract_main_subject(chat: &dyn ChatBackend, prompt: &str) -> Result<SubjectExtraction> {
    let prompt = prompt.trim();
    if prompt.is_empty() {
        return Err(Error::invalid("prompt is empty"));
    }
    if prompt.split_whitespace().count() == 1 {
        return Ok(SubjectExtraction {
            prompt: prompt.to_string(),
            main_subject: prompt.to_string(),
            paraphrased: false,
        });
    }
    let req = subject_request(prompt);
    let parse = |v: Value| str_field(&v, "main_subject").ok_or_else(|| Error::StructuredParse("main_subject missing".into()));
    let subject = match ask(chat, &req).and_then(parse) {
        Ok(s) => s,
        Err(e @ (Error::StructuredParse(_) | Error::InvalidInput(_))) => {
            log::warn!("subject extraction unusable ({e}); retrying once");
            ask(chat, &with_note(&req, prompts::RETRY_NOTE)).and_then(parse)?
        }
        Err(e) => return Err(e),
    };
    let subject = subject.trim_matches(|c| c == '"' || c == '.').trim().to_string();
    let paraphrased = !prompt.to_lowercase().contains(&subject.to_lowercase());
    if paraphrased {
        log::info!("subject {subject:?} is paraphrased from prompt {prompt:?}");
    }
    Ok(SubjectExtraction {
        prompt: prompt.to_string(),
        main_subject: subject,
        paraphrased,
    })
}

pub fn mental_images_request(subject: &str) -> LlmRequest {
    LlmRequest::structured(prompts::MENTAL_IMAGES, format!("Subject: {subject}"), "mental_images")
}

fn distinct_images(v: &Value) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in v["mental_images"].as_array().into_iter().flatten().filter_map(Value::as_str) {
        let s = s.trim();
        if !s.is_empty() && !out.iter().any(|o| o.eq_ignore_ascii_case(s)) {
            out.push(s.to_string());
        }
    }
    out
}

/// Exactly five distinct descriptions. Extra ones are cut; a short answer
/// is re-asked once.
pub fn elicit_mental_images(chat: &dyn ChatBackend, subject: &str) -> Result<MentalImageSet> {
    let subject = subject.trim();
    if subject.is_empty() {
        return Err(Error::invalid("subject is empty"));
    }
    let req = mental_images_request(subject);
    let mut got = 0;
    for (attempt, r) in [req.clone(), with_note(&req, prompts::RETRY_NOTE)].iter().enumerate() {
        let images = match ask(chat, r) {
            Ok(v) => distinct_images(&v),
            Err(Error::StructuredParse(e)) => {
                log::warn!("mental images attempt {} unparseable: {e}", attempt + 1);
                Vec::new()
            }
            Err(e) => return Err(e),
        };
        if images.len() >= MENTAL_IMAGE_COUNT {
            return Ok(MentalImageSet {
                subject: subject.to_string(),
                images: images.into_iter().take(MENTAL_IMAGE_COUNT).collect(),
            });
        }
        log::warn!("mental images attempt {} gave {} of {MENTAL_IMAGE_COUNT}", attempt + 1, images.len());
        got = got.max(images.len());
    }
    Err(Error::GenerationShortfall {
        wanted: MENTAL_IMAGE_COUNT,
        got,
    })
}

fn numbered(items: &[String]) -> String {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn section_choice_request(sections: &[Section], mental: &MentalImageSet) -> LlmRequest {
    let mut user = format!("Mental images:\n{}\n\nPage: {}\n", numbered(&mental.images), sections[0].page.title);
    for s in sections {
        user.push_str(&format!("\nSection: {}\nExtract: {}\n", s.section_title, s.extract));
    }
    LlmRequest::structured(prompts::SECTION_CHOICE, user.trim_end(), "section_choice")
}

/// Picks the section most likely to challenge the mental images. A page
/// with one section needs no call; an unusable answer falls back to the
/// first section.
pub fn choose_section(chat: &dyn ChatBackend, sections: &[Section], mental: &MentalImageSet) -> Result<Section> {
    match sections {
        [] => return Err(Error::invalid("page has no sections")),
        [only] => return Ok(only.clone()),
        _ => {}
    }
    let req = section_choice_request(sections, mental);
    let find = |v: &Value| {
        let t = str_field(v, "section_title")?;
        sections
            .iter()
            .find(|s| s.section_title == t)
            .or_else(|| sections.iter().find(|s| s.section_title.eq_ignore_ascii_case(&t)))
            .cloned()
    };
    for r in [req.clone(), with_note(&req, prompts::RETRY_NOTE)] {
        match ask(chat, &r) {
            Ok(v) => {
                if let Some(s) = find(&v) {
                    return Ok(s);
                }
                log::warn!("section choice named no known section of {}", sections[0].page.title);
            }
            Err(Error::StructuredParse(e)) => log::warn!("section choice unparseable: {e}"),
            Err(e) => return Err(e),
        }
    }
    log::warn!("falling back to first section of {}", sections[0].page.title);
    Ok(sections[0].clone())
}

pub fn interpretation_request(prompt: &str, section: &Section, mental: &MentalImageSet) -> LlmRequest {
    let user = format!(
        "Prompt: {prompt}\n\nMental images:\n{}\n\nPage: {}\nSection: {}\nExtract: {}",
        numbered(&mental.images),
        section.page.title,
        section.section_title,
        section.extract
    );
    LlmRequest::structured(prompts::INTERPRETATION, user, "interpretation")
}

pub const REPEATED_IMAGE_NOTE: &str =
    "\n\nYour visual description repeated one of the mental images. Write a description that differs from all of them.";

struct Draft {
    section_summary: String,
    visual_description: String,
    justification: String,
}

enum DraftError {
    Invalid(String),
    RepeatsMentalImage,
}

fn check_draft(v: &Value, mental: &MentalImageSet) -> Result<Draft, DraftError> {
    let field = |n: &str| str_field(v, n).ok_or_else(|| DraftError::Invalid(format!("{n} missing or empty")));
    let d = Draft {
        section_summary: field("section_summary")?,
        visual_description: field("visual_description")?,
        justification: field("justification")?,
    };
    if !matches_justification_template(&d.justification) {
        return Err(DraftError::Invalid("justification does not start with \"You may assume\"".into()));
    }
    if mental.images.iter().any(|m| m.trim() == d.visual_description) {
        return Err(DraftError::RepeatsMentalImage);
    }
    Ok(d)
}

/// One interpretation for one section, with a thumbnail rendered from its
/// description. Any defect is retried once; a second defect fails with
/// `interpretation-failed`.
pub fn generate_interpretation(
    gw: &Gateways,
    prompt: &str,
    section: &Section,
    mental: &MentalImageSet,
) -> Result<Interpretation> {
    if section.extract.trim().is_empty() {
        return Err(Error::invalid(format!("section {} has no extract", section.section_title)));
    }
    let req = interpretation_request(prompt, section, mental);
    let mut current = req.clone();
    let mut last = String::new();
    let mut draft = None;
    for attempt in 1..=2 {
        let problem = match ask(gw.chat.as_ref(), &current) {
            Ok(v) => match check_draft(&v, mental) {
                Ok(d) => {
                    draft = Some(d);
                    break;
                }
                Err(DraftError::RepeatsMentalImage) => {
                    current = with_note(&req, REPEATED_IMAGE_NOTE);
                    "description repeats a mental image".to_string()
                }
                Err(DraftError::Invalid(m)) => {
                    current = with_note(&req, prompts::RETRY_NOTE);
                    m
                }
            },
            Err(Error::StructuredParse(m)) => {
                current = with_note(&req, prompts::RETRY_NOTE);
                m
            }
            Err(e) => return Err(e),
        };
        log::warn!(
            "interpretation for {} / {} attempt {attempt}: {problem}",
            section.page.title,
            section.section_title
        );
        last = problem;
    }
    let d = draft.ok_or_else(|| {
        Error::InterpretationFailed(format!("{} / {}: {last}", section.page.title, section.section_title))
    })?;
    let id = Token::derived([
        "interpretation-v1",
        prompt,
        &section.page.page_id.to_string(),
        &section.section_title,
        &d.visual_description,
    ]);
    let thumbnail = gw
        .generate_image(&ImageRequest::new(d.visual_description.clone(), 1, Some(id.seed())), Mode::Agonistic)?
        .remove(0);
    let interp = Interpretation {
        id,
        section_summary: d.section_summary,
        visual_description: d.visual_description,
        source: Source {
            page_title: section.page.title.clone(),
            section_title: section.section_title.clone(),
            url: section.url(),
        },
        justification: d.justification,
        thumbnail,
    };
    interp.validate()?;
    Ok(interp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetStatus {
    Complete,
    Partial,
    EmptyResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageFailure {
    pub page: PageRef,
    pub reason: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationSet {
    pub prompt: String,
    pub status: SetStatus,
    pub subject: SubjectExtraction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mental_images: Option<MentalImageSet>,
    pub interpretations: Vec<Interpretation>,
    pub failures: Vec<PageFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<ControversyReport>,
}

fn interpret_page(gw: &Gateways, wiki: &dyn WikiBackend, prompt: &str, page: &PageRef, mental: &MentalImageSet) -> Result<Interpretation> {
    let sections = extract_sections(wiki, page)?;
    let section = choose_section(gw.chat.as_ref(), &sections, mental)?;
    generate_interpretation(gw, prompt, &section, mental)
}

/// The whole agonistic pipeline for one prompt. Results keep the sampled
/// page order; pages that fail are skipped and reported.
pub fn build_interpretation_set(
    gw: &Gateways,
    wiki: &dyn WikiBackend,
    prompt: &str,
    cfg: &PipelineConfig,
) -> Result<InterpretationSet> {
    let prompt = prompt.trim();
    if prompt.is_empty() {
        return Err(Error::invalid("prompt is empty"));
    }
    cfg.validate()?;
    let subject = extract_main_subject(gw.chat.as_ref(), prompt)?;
    let report = match wiki::run_pipeline(wiki, gw.chat.as_ref(), &subject.main_subject, prompt, cfg, gw.max_in_flight) {
        Ok(r) => r,
        Err(Error::EmptyResult(s)) => {
            log::warn!("no wiki results for {s:?}");
            return Ok(InterpretationSet {
                prompt: prompt.to_string(),
                status: SetStatus::EmptyResult,
                subject,
                mental_images: None,
                interpretations: Vec::new(),
                failures: Vec::new(),
                retrieval: None,
            });
        }
        Err(e) => return Err(e),
    };
    let mental = elicit_mental_images(gw.chat.as_ref(), &subject.main_subject)?;
    let results = map_bounded(&report.sampled, gw.max_in_flight, |_, page| {
        interpret_page(gw, wiki, prompt, page, &mental)
    });
    let mut interpretations = Vec::new();
    let mut failures = Vec::new();
    let mut first_err = None;
    for (page, r) in report.sampled.iter().zip(results) {
        match r {
            Ok(i) => interpretations.push(i),
            Err(e) => {
                log::warn!("skipping page {} ({}): {e}", page.page_id, page.title);
                failures.push(PageFailure {
                    page: page.clone(),
                    reason: e.code().to_string(),
                    message: e.to_string(),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    if interpretations.is_empty() {
        if let Some(e) = first_err {
            return Err(e);
        }
    }
    Ok(InterpretationSet {
        prompt: prompt.to_string(),
        status: if failures.is_empty() {
            SetStatus::Complete
        } else {
            SetStatus::Partial
        },
        subject,
        mental_images: Some(mental),
        interpretations,
        failures,
        retrieval: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::gateways::metered::{CallKind, MeteredChat, Traffic};
    use crate::gateways::mock::{MockEmbedder, MockImages, ScriptedChat};
    use crate::gateways::store::ImageStore;
    use crate::wiki::{page_url, DEFAULT_WIKI_BASE};
    use serde_json::json;
    use std::sync::Arc;

    fn gateways(chat: impl ChatBackend + 'static) -> Gateways {
        Gateways {
            chat: Arc::new(chat),
            images: Arc::new(MockImages),
            embedder: Arc::new(MockEmbedder::default()),
            store: Arc::new(ImageStore::in_memory()),
            clock: Arc::new(ManualClock::default()),
            max_in_flight: 1,
        }
    }

    fn mental() -> MentalImageSet {
        MentalImageSet {
            subject: "Declaration of Independence".into(),
            images: (1..=5).map(|i| format!("Mental image {i}")).collect(),
        }
    }

    fn section() -> Section {
        let title = "Haitian Declaration of Independence";
        Section {
            page: PageRef {
                page_id: 1120345,
                title: title.into(),
                url: page_url(DEFAULT_WIKI_BASE, title),
            },
            section_title: "Proclamation".into(),
            extract: "Dessalines read the act before a crowd of soldiers and citizens on the parade ground of Gonaïves.".into(),
        }
    }

    fn draft(desc: &str) -> String {
        json!({
            "section_summary": "Dessalines proclaimed independence at Gonaïves in 1804.",
            "visual_description": desc,
            "justification": "You may assume the signers were in Philadelphia, but Haiti declared independence in Gonaïves."
        })
        .to_string()
    }

    #[test]
    fn single_word_prompt_needs_no_call() {
        let traffic = Arc::new(Traffic::default());
        let chat = MeteredChat::new(ScriptedChat::default(), traffic.clone());
        let s = extract_main_subject(&chat, " Jesus ").unwrap();
        assert_eq!(s.main_subject, "Jesus");
        assert!(!s.paraphrased);
        assert_eq!(traffic.count(CallKind::Chat), 0);
        assert_eq!(extract_main_subject(&chat, "  ").unwrap_err().code(), "invalid-request");
    }

    #[test]
    fn paraphrase_is_flagged() {
        let chat = ScriptedChat::new([r#"{"main_subject": "Founding Father"}"#, r#"{"main_subject": "statesman"}"#]);
        assert!(!extract_main_subject(&chat, "a Founding Father signing documents").unwrap().paraphrased);
        assert!(extract_main_subject(&chat, "a Founding Father signing documents").unwrap().paraphrased);
    }

    #[test]
    fn mental_images_truncate_and_shortfall() {
        let seven = json!({"mental_images": (1..=7).map(|i| format!("m{i}")).collect::<Vec<_>>()}).to_string();
        let set = elicit_mental_images(&ScriptedChat::new([seven]), "x").unwrap();
        assert_eq!(set.images, ["m1", "m2", "m3", "m4", "m5"]);
        let three = json!({"mental_images": ["a", "b", "c"]}).to_string();
        let err = elicit_mental_images(&ScriptedChat::new([three.clone(), three]), "x").unwrap_err();
        assert_eq!(err, Error::GenerationShortfall { wanted: 5, got: 3 });
    }

    #[test]
    fn duplicates_do_not_count_toward_five() {
        let dup = json!({"mental_images": ["a", "A", "b", "c", "d"]}).to_string();
        let ok = json!({"mental_images": ["a", "b", "c", "d", "e"]}).to_string();
        let chat = ScriptedChat::new([dup, ok]);
        assert_eq!(elicit_mental_images(&chat, "x").unwrap().images.len(), 5);
        assert_eq!(chat.remaining(), 0);
    }

    #[test]
    fn interpretation_fields_and_source() {
        let gw = gateways(ScriptedChat::new([draft("Black and mixed-race veterans cheer on a parade ground in Gonaïves.")]));
        let i = generate_interpretation(&gw, "the signing of the Declaration of Independence", &section(), &mental()).unwrap();
        i.validate().unwrap();
        assert_eq!(i.source.page_title, "Haitian Declaration of Independence");
        assert_eq!(i.source.section_title, "Proclamation");
        assert_eq!(i.source.url, "https://en.wikipedia.org/wiki/Haitian_Declaration_of_Independence#Proclamation");
        assert_eq!(i.thumbnail.prompt_used, i.visual_description);
        assert!(gw.store.get(&i.thumbnail.bytes_ref).is_some());
    }

    #[test]
    fn repeated_mental_image_is_regenerated_once() {
        let traffic = Arc::new(Traffic::default());
        let chat = MeteredChat::new(ScriptedChat::new([draft("Mental image 1"), draft("Something new")]), traffic.clone());
        let i = generate_interpretation(&gateways(chat), "p", &section(), &mental()).unwrap();
        assert_eq!(i.visual_description, "Something new");
        let calls = traffic.calls();
        assert_eq!(calls.len(), 2);
        assert!(calls[1].prompt.ends_with(REPEATED_IMAGE_NOTE));

        let chat = ScriptedChat::new([draft("Mental image 1"), draft("Mental image 2")]);
        let err = generate_interpretation(&gateways(chat), "p", &section(), &mental()).unwrap_err();
        assert_eq!(err.code(), "interpretation-failed");
    }

    #[test]
    fn invalid_structure_twice_fails() {
        let chat = ScriptedChat::new(["not json", r#"{"section_summary": "s"}"#]);
        let err = generate_interpretation(&gateways(chat), "p", &section(), &mental()).unwrap_err();
        assert_eq!(err.code(), "interpretation-failed");
    }

    #[test]
    fn bad_template_is_retried() {
        let bad = json!({"section_summary": "s", "visual_description": "d", "justification": "Because."}).to_string();
        let chat = ScriptedChat::new([bad, draft("d2")]);
        let i = generate_interpretation(&gateways(chat), "p", &section(), &mental()).unwrap();
        assert_eq!(i.visual_description, "d2");
    }

    #[test]
    fn section_choice_falls_back_to_first() {
        let mut other = section();
        other.section_title = "Reception".into();
        let sections = vec![section(), other];
        let chat = ScriptedChat::new([r#"{"section_title": "Reception"}"#]);
        assert_eq!(choose_section(&chat, &sections, &mental()).unwrap().section_title, "Reception");
        let chat = ScriptedChat::new([r#"{"section_title": "Nope"}"#, "garbage"]);
        assert_eq!(choose_section(&chat, &sections, &mental()).unwrap().section_title, "Proclamation");
        let chat = ScriptedChat::default();
        assert_eq!(choose_section(&chat, &sections[..1], &mental()).unwrap().section_title, "Proclamation");
    }
}
