//! Line-delimited JSON, the canonical encoding for logs and reports.

use std::io::BufRead;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn encode<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn decode<T: DeserializeOwned>(line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Joins values into a document with one object per line and a trailing newline.
pub fn encode_all<'a, T, I>(values: I) -> Result<String>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut out = String::new();
    for v in values {
        out.push_str(&encode(v)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses every non-blank line. Errors carry the 1-based line number.
pub fn decode_all<T: DeserializeOwned>(doc: &str) -> Result<Vec<T>> {
    doc.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| decode(l).map_err(|e| Error::InvalidInput(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn read_all<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(decode(&line).map_err(|e| Error::InvalidInput(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}
