//! Text distances and per-participant scaling.

use std::collections::BTreeMap;

use agora_core::gateways::{cosine_similarity, embed, Embedder};
use agora_core::text::word_tokens;
use agora_core::{Error, Result};
use serde::Serialize;

/// Edit distance counted in words: insertions, deletions and substitutions
/// over lowercased, punctuation-free tokens.
pub fn levenshtein_words(a: &str, b: &str) -> usize {
    let a = word_tokens(a);
    let b = word_tokens(b);
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, wa) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, wb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(wa != wb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - cos(embed(a), embed(b))`, in [0, 2].
pub fn embedding_distance(embedder: &dyn Embedder, a: &str, b: &str) -> Result<f64> {
    let va = embed(embedder, a)?;
    let vb = embed(embedder, b)?;
    if va == vb {
        // cos(v, v) can round to just under 1
        return Ok(0.0);
    }
    Ok((1.0 - cosine_similarity(&va, &vb)?).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scaled<K: Ord> {
    pub values: BTreeMap<K, f64>,
    /// All inputs were equal, so every value was set to 0.5.
    pub constant: bool,
}

/// Maps one participant's values linearly onto [0, 1], lowest to 0 and
/// highest to 1. A constant vector maps to 0.5 throughout.
pub fn minmax_scale<K: Ord + Clone>(values: &BTreeMap<K, f64>) -> Result<Scaled<K>> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "min-max scaling needs at least 2 values, got {}",
            values.len()
        )));
    }
    if values.values().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("min-max scaling got a non-finite value".into()));
    }
    let lo = values.values().copied().fold(f64::INFINITY, f64::min);
    let hi = values.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let constant = hi == lo;
    let values = values
        .iter()
        .map(|(k, v)| {
            let s = if constant { 0.5 } else { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) };
            (k.clone(), s)
        })
        .collect();
    Ok(Scaled { values, constant })
}
