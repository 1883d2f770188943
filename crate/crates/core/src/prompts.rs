//! Versioned LLM prompt texts. Each lives in `prompts/` so that recorded
//! fixtures, which are keyed by the exact prompt bytes, can be kept in step.

pub const DIVERSE: &str = include_str!("../prompts/diverse_v1.txt");
pub const SUBJECT: &str = include_str!("../prompts/subject_v1.txt");
pub const MENTAL_IMAGES: &str = include_str!("../prompts/mental_images_v1.txt");
pub const RELEVANCE: &str = include_str!("../prompts/relevance_v1.txt");
pub const SECTION_CHOICE: &str = include_str!("../prompts/section_choice_v1.txt");
pub const INTERPRETATION: &str = include_str!("../prompts/interpretation_v1.txt");
pub const REFORMULATE: &str = include_str!("../prompts/reformulate_v1.txt");

/// Appended to the user prompt when a step is retried, so the retry is a
/// distinct request (and a distinct fixture).
pub const RETRY_NOTE: &str = "\n\nYour previous answer could not be used. Follow the required format exactly.";

/// Replaces each `{name}` placeholder. Other braces are left alone.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}
