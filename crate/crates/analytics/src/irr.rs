//! Inter-rater reliability over two independent codings of the same images.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use agora_core::ids::ImageId;
use agora_core::model::{CodedImageEvent, IntentCode, ValueCode};
use agora_core::{Error, Result};
use serde::Serialize;

/// Agreement counts for one binary code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub both: u64,
    pub a_only: u64,
    pub b_only: u64,
    pub neither: u64,
}

impl ConfusionMatrix {
    pub fn new(both: u64, a_only: u64, b_only: u64, neither: u64) -> Self {
        ConfusionMatrix {
            both,
            a_only,
            b_only,
            neither,
        }
    }

    pub fn total(&self) -> u64 {
        self.both + self.a_only + self.b_only + self.neither
    }

    pub fn add(&mut self, a: bool, b: bool) {
        match (a, b) {
            (true, true) => self.both += 1,
            (true, false) => self.a_only += 1,
            (false, true) => self.b_only += 1,
            (false, false) => self.neither += 1,
        }
    }

    /// The same counts with the raters swapped.
    pub fn transposed(&self) -> Self {
        ConfusionMatrix::new(self.both, self.b_only, self.a_only, self.neither)
    }
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
///
/// Evaluated in integers scaled by `n^2` so that the degenerate case
/// `p_e == 1` is detected exactly; it returns 1.0 (both raters gave every
/// event the same constant label).
pub fn cohen_kappa(m: &ConfusionMatrix) -> Result<f64> {
    let n = m.total() as i128;
    if n == 0 {
        return Err(Error::InvalidInput("confusion matrix is empty".into()));
    }
    let a = (m.both + m.a_only) as i128;
    let b = (m.both + m.b_only) as i128;
    let agree = (m.both + m.neither) as i128;
    let chance = a * b + (n - a) * (n - b);
    let num = n * agree - chance;
    let den = n * n - chance;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

/// Frequency-weighted mean of per-code kappas, `sum(f * k) / sum(f)`.
pub fn weighted_irr<K: Ord + std::fmt::Debug>(kappas: &BTreeMap<K, f64>, freqs: &BTreeMap<K, u64>) -> Result<f64> {
    if kappas.is_empty() {
        return Err(Error::InvalidInput("no kappas to combine".into()));
    }
    if !kappas.keys().eq(freqs.keys()) {
        return Err(Error::InvalidInput(format!(
            "kappa codes {:?} do not match frequency codes {:?}",
            kappas.keys().collect::<Vec<_>>(),
            freqs.keys().collect::<Vec<_>>()
        )));
    }
    if let Some((k, _)) = freqs.iter().find(|(_, f)| **f == 0) {
        return Err(Error::InvalidInput(format!("frequency of {k:?} is zero")));
    }
    let total: f64 = freqs.values().map(|f| *f as f64).sum();
    let sum: f64 = kappas.iter().zip(freqs.values()).map(|((_, k), f)| k * *f as f64).sum();
    Ok(sum / total)
}

/// How each value code is counted when weighting its kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightBase {
    /// Events both raters coded positive.
    #[default]
    Consensus,
    /// Events either rater coded positive.
    Union,
    /// Positive labels from both raters added together.
    Pooled,
}

impl FromStr for WeightBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consensus" => Ok(WeightBase::Consensus),
            "union" => Ok(WeightBase::Union),
            "pooled" => Ok(WeightBase::Pooled),
            _ => Err(Error::InvalidInput(format!(
                "unknown weight base {s:?}; expected consensus, union or pooled"
            ))),
        }
    }
}

impl WeightBase {
    fn weight(self, m: &ConfusionMatrix) -> u64 {
        match self {
            WeightBase::Consensus => m.both,
            WeightBase::Union => m.both + m.a_only + m.b_only,
            WeightBase::Pooled => 2 * m.both + m.a_only + m.b_only,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeAgreement {
    pub code: String,
    pub matrix: ConfusionMatrix,
    pub kappa: f64,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrReport {
    pub rater_a: String,
    pub rater_b: String,
    pub co_rated: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub weight_base: WeightBase,
    pub values: Vec<CodeAgreement>,
    /// Reported for reference; not part of the combined score.
    pub intents: Vec<CodeAgreement>,
    pub irr: f64,
}

type Key = (Option<String>, ImageId);

fn index(events: &[CodedImageEvent], side: &str) -> Result<(String, BTreeMap<Key, CodedImageEvent>)> {
    let raters: BTreeSet<&str> = events.iter().map(|e| e.rater.as_str()).collect();
    if raters.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "coding {side} must come from exactly one rater, found {raters:?}"
        )));
    }
    let rater = raters.into_iter().next().unwrap_or_default().to_string();
    let mut map = BTreeMap::new();
    for e in events {
        let key = (e.session.clone(), e.image.clone());
        if map.insert(key, e.clone()).is_some() {
            return Err(Error::InvalidInput(format!("coding {side} codes image {} twice", e.image)));
        }
    }
    Ok((rater, map))
}

/// Compares two codings image by image. Value codes get one kappa each and
/// are combined with [`weighted_irr`]; codes that no weight base counts are
/// left out of the combination.
pub fn irr(a: &[CodedImageEvent], b: &[CodedImageEvent], base: WeightBase) -> Result<IrrReport> {
    let (rater_a, a) = index(a, "a")?;
    let (rater_b, b) = index(b, "b")?;
    let shared: Vec<&Key> = a.keys().filter(|k| b.contains_key(*k)).collect();
    if shared.is_empty() {
        return Err(Error::InvalidInput("the two codings share no images".into()));
    }
    let mut value_m: BTreeMap<ValueCode, ConfusionMatrix> = ValueCode::ALL.iter().map(|c| (*c, Default::default())).collect();
    let mut intent_m: BTreeMap<IntentCode, ConfusionMatrix> = IntentCode::ALL.iter().map(|c| (*c, Default::default())).collect();
    for k in &shared {
        let (ea, eb) = (&a[*k], &b[*k]);
        for (code, m) in value_m.iter_mut() {
            m.add(ea.values.contains(code), eb.values.contains(code));
        }
        for (code, m) in intent_m.iter_mut() {
            m.add(ea.intent == *code, eb.intent == *code);
        }
    }
    let agreement = |code: &str, m: &ConfusionMatrix| -> Result<CodeAgreement> {
        Ok(CodeAgreement {
            code: code.to_string(),
            matrix: *m,
            kappa: cohen_kappa(m)?,
            weight: base.weight(m),
        })
    };
    let values = value_m
        .iter()
        .map(|(c, m)| agreement(c.as_str(), m))
        .collect::<Result<Vec<_>>>()?;
    let intents = intent_m
        .iter()
        .map(|(c, m)| agreement(c.as_str(), m))
        .collect::<Result<Vec<_>>>()?;
    let kappas: BTreeMap<&str, f64> = values.iter().filter(|v| v.weight > 0).map(|v| (v.code.as_str(), v.kappa)).collect();
    let freqs: BTreeMap<&str, u64> = values.iter().filter(|v| v.weight > 0).map(|v| (v.code.as_str(), v.weight)).collect();
    let irr = weighted_irr(&kappas, &freqs)?;
    Ok(IrrReport {
        rater_a,
        rater_b,
        co_rated: shared.len(),
        only_a: a.len() - shared.len(),
        only_b: b.len() - shared.len(),
        weight_base: base,
        values,
        intents,
        irr,
    })
}
