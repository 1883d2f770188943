//! Batch entry points: load exported logs and codings, build every table,
//! write them as line-delimited JSON and as plain text.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use agora_core::gateways::Embedder;
use agora_core::jsonl;
use agora_core::model::{CodedImageEvent, Measure, Mode, RankingDimension};
use agora_core::session::Session;
use agora_core::{Error, Result};
use serde::Serialize;

use crate::irr::IrrReport;
use crate::tables::{
    category_table, distance_report, intent_distribution, join_codings, order_effect, pairwise_rank_share,
    replacement_counts, survey_summary, value_distribution, value_intent_table, CategoryTable, DistanceReport,
    MeanStd, OrderEffect, Participant, ProportionTable, RankShareTable, ReplacementRow, SurveyRow,
};

/// Every `.jsonl` file under `dir` (one level of subdirectories, which
/// covers both a folder of exports and a session store directory).
pub fn find_logs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            for inner in fs::read_dir(&path)? {
                let p = inner?.path();
                if p.extension().is_some_and(|e| e == "jsonl") {
                    out.push(p);
                }
            }
        } else if path.extension().is_some_and(|e| e == "jsonl") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Replays every log under `dir`. A log that fails to replay is an error:
/// tables over a silently shortened corpus would be wrong.
pub fn load_sessions(dir: &Path) -> Result<Vec<Session>> {
    let mut sessions = Vec::new();
    for path in find_logs(dir)? {
        let doc = fs::read_to_string(&path)?;
        let s = Session::import(&doc).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        sessions.push(s);
    }
    let mut ids: Vec<&str> = sessions.iter().map(|s| s.id.as_str()).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("session {} appears in more than one log", w[0])));
    }
    Ok(sessions)
}

pub fn load_coded(path: &Path) -> Result<Vec<CodedImageEvent>> {
    let doc = fs::read_to_string(path)?;
    jsonl::decode_all(&doc).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// The full table suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub sessions: usize,
    pub coded_additions: usize,
    pub survey: Vec<SurveyRow>,
    pub rethinking_by_category: CategoryTable,
    pub intents: Option<ProportionTable>,
    pub values: Option<ProportionTable>,
    pub value_intents: Option<ProportionTable>,
    pub replacements: Vec<ReplacementRow>,
    pub rankings: Vec<RankShareTable>,
    pub order_effects: Vec<OrderEffect>,
    pub distances: DistanceReport,
}

/// Builds every table. Coding tables are present only when codings are given.
pub fn analyze(sessions: &[Session], coded: Option<&[CodedImageEvent]>, embedder: &dyn Embedder) -> Result<Report> {
    let participants: Vec<Participant> = sessions.iter().map(Participant::from_session).collect();
    let responses: Vec<_> = participants.iter().flat_map(|p| p.surveys.values().cloned()).collect();
    let rankings: Vec<_> = participants.iter().flat_map(|p| p.rankings.iter().cloned()).collect();
    let joined = coded.map(|c| join_codings(&participants, c)).transpose()?;
    let mut order_effects = Vec::new();
    for (i, a) in Mode::NON_BASELINE.iter().enumerate() {
        for b in &Mode::NON_BASELINE[i + 1..] {
            order_effects.push(order_effect(&participants, *a, *b, Measure::Rethinking));
            order_effects.push(order_effect(&participants, *b, *a, Measure::Rethinking));
        }
    }
    Ok(Report {
        sessions: sessions.len(),
        coded_additions: joined.as_ref().map_or(0, Vec::len),
        survey: survey_summary(&responses),
        rethinking_by_category: category_table(&participants, Measure::Rethinking)?,
        intents: joined.as_deref().map(intent_distribution),
        values: joined.as_deref().map(value_distribution),
        value_intents: joined.as_deref().map(value_intent_table),
        replacements: replacement_counts(&participants),
        rankings: RankingDimension::ALL.iter().map(|d| pairwise_rank_share(&rankings, *d)).collect(),
        order_effects,
        distances: distance_report(&participants, embedder)?,
    })
}

#[derive(Serialize)]
struct Line<'a, T: Serialize> {
    table: &'a str,
    #[serde(flatten)]
    row: T,
}

impl Report {
    /// One JSON object per table row, each tagged with its table name.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let mut push = |table: &str, row: &dyn erased::Row| -> Result<()> {
            out.push_str(&row.line(table)?);
            out.push('\n');
            Ok(())
        };
        push("summary", &serde_json::json!({"sessions": self.sessions, "coded_additions": self.coded_additions}))?;
        for r in &self.survey {
            push("survey", r)?;
        }
        for r in &self.rethinking_by_category.rows {
            push("rethinking_by_category", r)?;
        }
        for t in [&self.intents, &self.values, &self.value_intents].into_iter().flatten() {
            for r in &t.rows {
                push(&t.title.replace(' ', "_"), &serde_json::json!({"label": r.label, "n": r.n, "columns": t.columns, "counts": r.counts, "proportions": r.proportions}))?;
            }
        }
        for r in &self.replacements {
            push("replacements", r)?;
        }
        for t in &self.rankings {
            for p in &t.pairs {
                push("rankings", &serde_json::json!({"dimension": t.dimension, "participants": t.participants, "higher": p.higher, "lower": p.lower, "share": p.share}))?;
            }
        }
        for r in &self.order_effects {
            push("order_effects", r)?;
        }
        for r in &self.distances.means {
            push("design_statement_change", r)?;
        }
        for s in &self.distances.sessions {
            push("design_statement_change_by_session", s)?;
        }
        Ok(out)
    }

    /// Plain-text tables laid out like the published ones.
    pub fn to_text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "{} sessions, {} coded additions\n", self.sessions, self.coded_additions);

        let _ = writeln!(t, "Survey ratings (mean ± std)");
        let _ = writeln!(t, "{:<15}{:>14}{:>16}{:>14}{:>16}", "Interface", "Rethink", "Appropriateness", "Control", "Interestingness");
        for r in &self.survey {
            let cell = |m| r.measures.get(&m).map_or("---".to_string(), fmt_ms);
            let _ = writeln!(
                t,
                "{:<15}{:>14}{:>16}{:>14}{:>16}",
                r.mode.as_str(),
                cell(Measure::Rethinking),
                cell(Measure::Appropriateness),
                cell(Measure::Control),
                cell(Measure::Interest)
            );
        }

        let c = &self.rethinking_by_category;
        let _ = writeln!(t, "\nRethinking by prompt category (mean ± std)");
        let _ = writeln!(t, "{:<15}{:>14}{:>14}{:>14}{:>14}{:>14}{:>16}", "Interface", "Overall", "Identity", "Politics", "History", "Custom", "Min-Max Scaled");
        for r in &c.rows {
            let cat = |k| r.by_category.get(&k).map_or("---".to_string(), fmt_ms);
            use agora_core::model::Category::*;
            let _ = writeln!(
                t,
                "{:<15}{:>14}{:>14}{:>14}{:>14}{:>14}{:>16}",
                r.mode.as_str(),
                r.overall.as_ref().map_or("---".to_string(), fmt_ms),
                cat(Identity),
                cat(Politics),
                cat(History),
                cat(Custom),
                r.scaled.as_ref().map_or("---".to_string(), fmt_ms)
            );
        }
        if !c.constant_participants.is_empty() {
            let _ = writeln!(t, "constant ratings scaled to 0.5: {}", c.constant_participants.join(", "));
        }

        for table in [&self.intents, &self.values, &self.value_intents].into_iter().flatten() {
            let _ = writeln!(t, "\nProportion of added images: {}", table.title);
            let _ = write!(t, "{:<15}{:>6}", "", "n");
            for col in &table.columns {
                let _ = write!(t, "{col:>12}");
            }
            let _ = writeln!(t);
            for r in &table.rows {
                let _ = write!(t, "{:<15}{:>6}", r.label, r.n);
                for p in &r.proportions {
                    let _ = write!(t, "{p:>12.2}");
                }
                let _ = writeln!(t);
            }
        }

        let _ = writeln!(t, "\nImages replaced per participant (mean ± std)");
        for r in &self.replacements {
            let _ = writeln!(t, "{:<15}{:>14}", r.mode.as_str(), fmt_ms(&r.per_participant));
        }

        for table in &self.rankings {
            let _ = writeln!(t, "\nRanked higher on {} ({} participants)", table.dimension.as_str(), table.participants);
            for p in &table.pairs {
                let _ = writeln!(t, "{:<15} over {:<15}{:>6.0}%", p.higher.as_str(), p.lower.as_str(), p.share * 100.0);
            }
        }

        let _ = writeln!(t, "\nOrder effects on rethinking");
        for e in &self.order_effects {
            let m = |x: &Option<MeanStd>| x.map_or("---".to_string(), |s| format!("{:.2} (n={})", s.mean, s.n));
            let _ = writeln!(
                t,
                "{:<15} before {:<15}{:>12}   after{:>12}   change {}",
                e.target.as_str(),
                e.other.as_str(),
                m(&e.before),
                m(&e.after),
                match (e.delta, e.relative) {
                    (Some(d), Some(r)) => format!("{d:+.2} ({:+.0}%)", r * 100.0),
                    (Some(d), None) => format!("{d:+.2}"),
                    _ => "---".into(),
                }
            );
        }

        let _ = writeln!(t, "\nChange in design statement");
        let _ = writeln!(t, "{:<15}{:>10}{:>10}{:>10}{:>10}", "Interface", "Lev raw", "scaled", "Emb raw", "scaled");
        for r in &self.distances.means {
            let s = |x: &Option<MeanStd>| x.map_or("---".to_string(), |s| format!("{:.2}", s.mean));
            let _ = writeln!(
                t,
                "{:<15}{:>10.2}{:>10}{:>10.2}{:>10}",
                r.mode.as_str(),
                r.levenshtein.mean,
                s(&r.levenshtein_scaled),
                r.embedding.mean,
                s(&r.embedding_scaled)
            );
        }
        t
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        fs::create_dir_all(out)?;
        fs::write(out.join("tables.jsonl"), self.to_jsonl()?)?;
        fs::write(out.join("tables.txt"), self.to_text())?;
        Ok(())
    }
}

impl IrrReport {
    pub fn to_text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(
            t,
            "raters {} / {}: {} co-rated images ({} only in a, {} only in b)",
            self.rater_a, self.rater_b, self.co_rated, self.only_a, self.only_b
        );
        let _ = writeln!(t, "{:<14}{:>8}{:>8}{:>8}{:>8}{:>10}{:>8}", "code", "both", "a only", "b only", "neither", "kappa", "weight");
        for (section, rows) in [("value codes", &self.values), ("intent codes (not weighted)", &self.intents)] {
            let _ = writeln!(t, "{section}");
            for r in rows {
                let m = &r.matrix;
                let _ = writeln!(
                    t,
                    "{:<14}{:>8}{:>8}{:>8}{:>8}{:>10.2}{:>8}",
                    r.code, m.both, m.a_only, m.b_only, m.neither, r.kappa, r.weight
                );
            }
        }
        let _ = writeln!(t, "weighted IRR ({:?} weights): {:.2}", self.weight_base, self.irr);
        t
    }
}

fn fmt_ms(s: &MeanStd) -> String {
    format!("{:.2} ± {:.2}", s.mean, s.std)
}

mod erased {
    use serde::Serialize;

    use super::Line;
    use agora_core::{jsonl, Result};

    pub trait Row {
        fn line(&self, table: &str) -> Result<String>;
    }

    impl<T: Serialize> Row for T {
        fn line(&self, table: &str) -> Result<String> {
            jsonl::encode(&Line { table, row: self })
        }
    }
}
