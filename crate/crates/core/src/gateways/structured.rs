use serde_json::Value;

use crate::error::{Error, Result};

/// Lenient extraction of a JSON object from model output: code fences are
/// dropped, then the first balanced `{...}` that parses wins.
pub fn parse_structured(text: &str) -> Result<Value> {
    let stripped = strip_code_fences(text);
    if let Ok(v @ Value::Object(_)) = serde_json::from_str::<Value>(stripped.trim()) {
        return Ok(v);
    }
    let bytes = stripped.as_bytes();
    let mut start = 0;
    while let Some(offset) = stripped[start..].find('{') {
        let open = start + offset;
        if let Some(close) = matching_brace(bytes, open) {
            if let Ok(v @ Value::Object(_)) = serde_json::from_str::<Value>(&stripped[open..=close]) {
                return Ok(v);
            }
        }
        start = open + 1;
    }
    Err(Error::StructuredParse(format!(
        "no JSON object in completion starting {:?}",
        text.chars().take(60).collect::<String>()
    )))
}

fn strip_code_fences(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn matching_brace(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_object() {
        assert_eq!(parse_structured(r#"{"a": 1}"#).unwrap()["a"], 1);
    }

    #[test]
    fn fenced_object() {
        let text = "Here you go:\n```json\n{\"a\": [1, 2]}\n```\nanything else?";
        assert_eq!(parse_structured(text).unwrap()["a"][1], 2);
    }

    #[test]
    fn braces_inside_strings() {
        let text = r#"prefix {"s": "a } b { c", "n": {"x": 1}} suffix {"other": 2}"#;
        let v = parse_structured(text).unwrap();
        assert_eq!(v["s"], "a } b { c");
        assert_eq!(v["n"]["x"], 1);
    }

    #[test]
    fn skips_unparseable_candidates() {
        let v = parse_structured(r#"{not json} then {"ok": true}"#).unwrap();
        assert_eq!(v["ok"], true);
    }

    #[test]
    fn arrays_and_prose_fail() {
        assert!(parse_structured("[1, 2]").is_err());
        assert!(parse_structured("sorry, I can't").is_err());
        assert!(parse_structured(r#"{"unterminated": "#).is_err());
    }
}
