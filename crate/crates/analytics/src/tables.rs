//! Summary tables over sessions and coded additions.

use std::collections::{BTreeMap, BTreeSet};

use agora_core::gateways::Embedder;
use agora_core::ids::ImageId;
use agora_core::model::{
    Category, CodedImageEvent, IntentCode, Measure, Mode, RankingDimension, RankingRecord, SurveyResponse, ValueCode,
};
use agora_core::session::Session;
use agora_core::{Error, Result};
use serde::Serialize;

use crate::metrics::{embedding_distance, levenshtein_words, minmax_scale};

/// The parts of one finished (or partial) session the tables read.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Participant {
    pub session: String,
    pub category: Category,
    /// Baseline first, then the session's mode order.
    pub stages: Vec<Mode>,
    pub surveys: BTreeMap<Mode, SurveyResponse>,
    pub rankings: Vec<RankingRecord>,
    pub statements: BTreeMap<Mode, String>,
    pub additions: Vec<Addition>,
}

/// An image entering the collage: the ten initial images count as baseline
/// additions, every replacement as an addition in its stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Addition {
    pub image: ImageId,
    pub mode: Mode,
}

impl Participant {
    pub fn from_session(s: &Session) -> Self {
        let mut additions = Vec::new();
        if let Some(c) = &s.collage {
            additions.extend(c.initial_slots().iter().map(|i| Addition {
                image: i.clone(),
                mode: Mode::Baseline,
            }));
            additions.extend(c.replacement_log().iter().map(|r| Addition {
                image: r.added.clone(),
                mode: r.stage,
            }));
        }
        Participant {
            session: s.id.clone(),
            category: s.prompt.category,
            stages: s.stages(),
            surveys: s.surveys.iter().map(|r| (r.stage, r.clone())).collect(),
            rankings: s.rankings.clone(),
            statements: s.design_statements.iter().map(|d| (d.stage, d.text.clone())).collect(),
            additions,
        }
    }

    /// Replacements made during `mode`.
    pub fn replacements(&self, mode: Mode) -> usize {
        if mode == Mode::Baseline {
            return 0;
        }
        self.additions.iter().filter(|a| a.mode == mode).count()
    }

    fn position(&self, mode: Mode) -> Option<usize> {
        self.stages.iter().position(|m| *m == mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

pub fn mean_std(xs: &[f64]) -> Option<MeanStd> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some(MeanStd {
        mean,
        std: var.sqrt(),
        n: xs.len(),
    })
}

/// An image addition joined with its coding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodedAddition {
    pub session: String,
    pub mode: Mode,
    pub event: CodedImageEvent,
}

/// Attaches each coded event to the collage addition it describes. Every
/// coded image must have been added in some session; an image added in
/// several sessions needs the event's `session` field. A re-added image is
/// attributed to its first addition.
pub fn join_codings(participants: &[Participant], coded: &[CodedImageEvent]) -> Result<Vec<CodedAddition>> {
    let mut first: BTreeMap<&ImageId, Vec<(&str, Mode)>> = BTreeMap::new();
    for p in participants {
        let mut seen = BTreeSet::new();
        for a in &p.additions {
            if seen.insert(&a.image) {
                first.entry(&a.image).or_default().push((p.session.as_str(), a.mode));
            }
        }
    }
    let mut taken = BTreeSet::new();
    let mut out = Vec::with_capacity(coded.len());
    for e in coded {
        let places = first.get(&e.image).map(Vec::as_slice).unwrap_or_default();
        let place = match &e.session {
            Some(sid) => places.iter().find(|(s, _)| s == sid),
            None if places.len() > 1 => {
                return Err(Error::InvalidInput(format!(
                    "image {} was added in {} sessions; the coded event must name its session",
                    e.image,
                    places.len()
                )))
            }
            None => places.first(),
        };
        let Some((session, mode)) = place else {
            return Err(Error::InvalidInput(format!(
                "coded image {} is not a collage addition in any session log",
                e.image
            )));
        };
        if !taken.insert((session.to_string(), e.image.clone())) {
            return Err(Error::InvalidInput(format!("image {} is coded twice", e.image)));
        }
        out.push(CodedAddition {
            session: session.to_string(),
            mode: *mode,
            event: e.clone(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionRow {
    pub label: String,
    pub n: usize,
    pub counts: Vec<usize>,
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<ProportionRow>,
}

impl ProportionTable {
    pub fn row(&self, label: &str) -> Option<&ProportionRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.row(row).map(|r| r.proportions[c])
    }
}

fn proportion_table<R, C>(
    title: &str,
    rows: &[(String, Vec<&R>)],
    columns: &[(String, C)],
) -> ProportionTable
where
    C: Fn(&R) -> bool,
{
    ProportionTable {
        title: title.into(),
        columns: columns.iter().map(|(c, _)| c.clone()).collect(),
        rows: rows
            .iter()
            .filter(|(_, items)| !items.is_empty())
            .map(|(label, items)| {
                let counts: Vec<usize> = columns
                    .iter()
                    .map(|(_, hit)| items.iter().filter(|i| hit(i)).count())
                    .collect();
                ProportionRow {
                    label: label.clone(),
                    n: items.len(),
                    proportions: counts.iter().map(|c| *c as f64 / items.len() as f64).collect(),
                    counts,
                }
            })
            .collect(),
    }
}

fn by_mode(events: &[CodedAddition]) -> Vec<(String, Vec<&CodedImageEvent>)> {
    Mode::ALL
        .iter()
        .map(|m| {
            let items = events.iter().filter(|e| e.mode == *m).map(|e| &e.event).collect();
            (m.as_str().to_string(), items)
        })
        .collect()
}

type Hit = Box<dyn Fn(&CodedImageEvent) -> bool>;

fn intent_columns() -> Vec<(String, Hit)> {
    IntentCode::ALL
        .iter()
        .map(|c| {
            let c = *c;
            (c.as_str().to_string(), Box::new(move |e: &CodedImageEvent| e.intent == c) as Hit)
        })
        .collect()
}

fn value_columns() -> Vec<(String, Hit)> {
    ValueCode::ALL
        .iter()
        .map(|c| {
            let c = *c;
            (c.as_str().to_string(), Box::new(move |e: &CodedImageEvent| e.values.contains(&c)) as Hit)
        })
        .collect()
}

/// Share of added images per intent code, by mode. Rows sum to 1.
pub fn intent_distribution(events: &[CodedAddition]) -> ProportionTable {
    proportion_table("intents by interface", &by_mode(events), &intent_columns())
}

/// Share of added images invoking each value code, by mode. Values are
/// non-exclusive, so rows need not sum to 1.
pub fn value_distribution(events: &[CodedAddition]) -> ProportionTable {
    proportion_table("values by interface", &by_mode(events), &value_columns())
}

/// For the images invoking each value, the share added with each intent.
pub fn value_intent_table(events: &[CodedAddition]) -> ProportionTable {
    let rows: Vec<(String, Vec<&CodedImageEvent>)> = ValueCode::ALL
        .iter()
        .map(|v| {
            let items = events.iter().map(|e| &e.event).filter(|e| e.values.contains(v)).collect();
            (v.as_str().to_string(), items)
        })
        .collect();
    proportion_table("intents by value", &rows, &intent_columns())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub mode: Mode,
    pub measures: BTreeMap<Measure, MeanStd>,
}

/// Mean and population standard deviation of each survey measure, by mode.
pub fn survey_summary(responses: &[SurveyResponse]) -> Vec<SurveyRow> {
    Mode::ALL
        .iter()
        .filter_map(|m| {
            let rs: Vec<&SurveyResponse> = responses.iter().filter(|r| r.stage == *m).collect();
            if rs.is_empty() {
                return None;
            }
            let measures = Measure::ALL
                .iter()
                .filter_map(|k| {
                    let xs: Vec<f64> = rs.iter().filter_map(|r| r.rating(*k)).map(f64::from).collect();
                    mean_std(&xs).map(|s| (*k, s))
                })
                .collect();
            Some(SurveyRow { mode: *m, measures })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRow {
    pub mode: Mode,
    pub overall: Option<MeanStd>,
    pub by_category: BTreeMap<Category, MeanStd>,
    pub scaled: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryTable {
    pub measure: Measure,
    pub rows: Vec<CategoryRow>,
    /// Participants whose ratings were all equal (scaled to 0.5).
    pub constant_participants: Vec<String>,
}

/// One measure broken down by prompt category, plus the per-participant
/// min-max scaled rating.
pub fn category_table(participants: &[Participant], measure: Measure) -> Result<CategoryTable> {
    let mut scaled: BTreeMap<Mode, Vec<f64>> = BTreeMap::new();
    let mut constant_participants = Vec::new();
    for p in participants {
        let ratings: BTreeMap<Mode, f64> = p
            .surveys
            .iter()
            .filter_map(|(m, r)| r.rating(measure).map(|v| (*m, f64::from(v))))
            .collect();
        if ratings.len() < 2 {
            continue;
        }
        let s = minmax_scale(&ratings)?;
        if s.constant {
            constant_participants.push(p.session.clone());
        }
        for (m, v) in s.values {
            scaled.entry(m).or_default().push(v);
        }
    }
    let rating = |p: &Participant, m: Mode| p.surveys.get(&m).and_then(|r| r.rating(measure)).map(f64::from);
    let rows = Mode::ALL
        .iter()
        .map(|m| {
            let all: Vec<f64> = participants.iter().filter_map(|p| rating(p, *m)).collect();
            let by_category = Category::ALL
                .iter()
                .filter_map(|c| {
                    let xs: Vec<f64> = participants
                        .iter()
                        .filter(|p| p.category == *c)
                        .filter_map(|p| rating(p, *m))
                        .collect();
                    mean_std(&xs).map(|s| (*c, s))
                })
                .collect();
            CategoryRow {
                mode: *m,
                overall: mean_std(&all),
                by_category,
                scaled: scaled.get(m).and_then(|xs| mean_std(xs)),
            }
        })
        .filter(|r| r.overall.is_some())
        .collect();
    Ok(CategoryTable {
        measure,
        rows,
        constant_participants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairShare {
    pub higher: Mode,
    pub lower: Mode,
    /// Fraction of participants who ranked `higher` strictly above `lower`.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankShareTable {
    pub dimension: RankingDimension,
    pub participants: usize,
    pub pairs: Vec<PairShare>,
}

/// For every ordered pair of modes, the share of rankings on `dimension`
/// that put the first strictly above the second (rank 1 is the top).
pub fn pairwise_rank_share(rankings: &[RankingRecord], dimension: RankingDimension) -> RankShareTable {
    let rs: Vec<&RankingRecord> = rankings.iter().filter(|r| r.dimension == dimension).collect();
    let mut pairs = Vec::new();
    if !rs.is_empty() {
        for a in Mode::ALL {
            for b in Mode::ALL {
                if a == b {
                    continue;
                }
                let above = rs.iter().filter(|r| matches!((r.ranks.get(&a), r.ranks.get(&b)), (Some(x), Some(y)) if x < y)).count();
                pairs.push(PairShare {
                    higher: a,
                    lower: b,
                    share: above as f64 / rs.len() as f64,
                });
            }
        }
    }
    RankShareTable {
        dimension,
        participants: rs.len(),
        pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEffect {
    pub target: Mode,
    pub other: Mode,
    pub measure: Measure,
    /// Ratings of `target` from participants who used it before `other`.
    pub before: Option<MeanStd>,
    /// Ratings of `target` from participants who used it after `other`.
    pub after: Option<MeanStd>,
    pub delta: Option<f64>,
    pub relative: Option<f64>,
}

/// How a mode's rating depends on whether it came before or after another.
pub fn order_effect(participants: &[Participant], target: Mode, other: Mode, measure: Measure) -> OrderEffect {
    let mut before = Vec::new();
    let mut after = Vec::new();
    for p in participants {
        let (Some(t), Some(o)) = (p.position(target), p.position(other)) else {
            continue;
        };
        let Some(v) = p.surveys.get(&target).and_then(|r| r.rating(measure)) else {
            continue;
        };
        if t < o {
            before.push(f64::from(v));
        } else {
            after.push(f64::from(v));
        }
    }
    let before = mean_std(&before);
    let after = mean_std(&after);
    let delta = before.zip(after).map(|(b, a)| a.mean - b.mean);
    let relative = before.zip(delta).filter(|(b, _)| b.mean != 0.0).map(|(b, d)| d / b.mean);
    OrderEffect {
        target,
        other,
        measure,
        before,
        after,
        delta,
        relative,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageDistance {
    pub mode: Mode,
    pub levenshtein: f64,
    pub embedding: f64,
    pub levenshtein_scaled: Option<f64>,
    pub embedding_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionDistances {
    pub session: String,
    pub stages: Vec<StageDistance>,
    /// Metrics whose values were all equal for this participant.
    pub constant: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMean {
    pub mode: Mode,
    pub levenshtein: MeanStd,
    pub embedding: MeanStd,
    pub levenshtein_scaled: Option<MeanStd>,
    pub embedding_scaled: Option<MeanStd>,
}

/// Change in design statement after each non-baseline stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub sessions: Vec<SessionDistances>,
    pub means: Vec<DistanceMean>,
}

/// Compares each stage's design statement with the one before it. Scaling
/// is per participant and needs at least two compared stages.
pub fn distance_report(participants: &[Participant], embedder: &dyn Embedder) -> Result<DistanceReport> {
    let mut sessions = Vec::new();
    for p in participants {
        let mut stages = Vec::new();
        for w in p.stages.windows(2) {
            let (Some(prev), Some(cur)) = (p.statements.get(&w[0]), p.statements.get(&w[1])) else {
                continue;
            };
            stages.push(StageDistance {
                mode: w[1],
                levenshtein: levenshtein_words(prev, cur) as f64,
                embedding: embedding_distance(embedder, prev, cur)?,
                levenshtein_scaled: None,
                embedding_scaled: None,
            });
        }
        let mut constant = Vec::new();
        if stages.len() >= 2 {
            let lev = minmax_scale(&stages.iter().map(|s| (s.mode, s.levenshtein)).collect())?;
            let emb = minmax_scale(&stages.iter().map(|s| (s.mode, s.embedding)).collect())?;
            for s in &mut stages {
                s.levenshtein_scaled = lev.values.get(&s.mode).copied();
                s.embedding_scaled = emb.values.get(&s.mode).copied();
            }
            if lev.constant {
                constant.push("levenshtein".to_string());
            }
            if emb.constant {
                constant.push("embedding".to_string());
            }
        }
        if !stages.is_empty() {
            sessions.push(SessionDistances {
                session: p.session.clone(),
                stages,
                constant,
            });
        }
    }
    let means = Mode::NON_BASELINE
        .iter()
        .filter_map(|m| {
            let rows: Vec<&StageDistance> = sessions.iter().flat_map(|s| &s.stages).filter(|s| s.mode == *m).collect();
            let col = |f: &dyn Fn(&StageDistance) -> Option<f64>| mean_std(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            Some(DistanceMean {
                mode: *m,
                levenshtein: col(&|r| Some(r.levenshtein))?,
                embedding: col(&|r| Some(r.embedding))?,
                levenshtein_scaled: col(&|r| r.levenshtein_scaled),
                embedding_scaled: col(&|r| r.embedding_scaled),
            })
        })
        .collect();
    Ok(DistanceReport { sessions, means })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplacementRow {
    pub mode: Mode,
    pub per_participant: MeanStd,
}

/// Images replaced per participant in each non-baseline stage.
pub fn replacement_counts(participants: &[Participant]) -> Vec<ReplacementRow> {
    Mode::NON_BASELINE
        .iter()
        .filter_map(|m| {
            let xs: Vec<f64> = participants
                .iter()
                .filter(|p| p.position(*m).is_some() && p.statements.contains_key(m))
                .map(|p| p.replacements(*m) as f64)
                .collect();
            mean_std(&xs).map(|s| ReplacementRow {
                mode: *m,
                per_participant: s,
            })
        })
        .collect()
}
