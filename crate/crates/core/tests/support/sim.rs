//! Randomized participants and an audit of exported logs that reads the raw
//! JSON lines instead of trusting the session state machine.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use agora_core::clock::{ManualClock, Timestamp};
use agora_core::gateways::mock::{MockChat, MockEmbedder, MockImages};
use agora_core::gateways::store::ImageStore;
use agora_core::gateways::Gateways;
use agora_core::ids::{ImageId, Token};
use agora_core::model::{Category, Mode, RankingDimension, RankingRecord, SurveyResponse};
use agora_core::session::{Command, Session, StageOutput, Studio};
use agora_core::wiki::{FixtureWiki, PageRef, WikiBackend};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub const PROMPT: &str = "the signing of the Declaration of Independence";

pub fn studio(fixtures: &Path) -> (Studio, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(Timestamp(1_700_000_000_000)));
    let gw = Gateways {
        chat: Arc::new(MockChat::from_dir(fixtures.join("llm"))),
        images: Arc::new(MockImages),
        embedder: Arc::new(MockEmbedder::default()),
        store: Arc::new(ImageStore::in_memory()),
        clock: clock.clone(),
        max_in_flight: 4,
    };
    (Studio::new(gw, Arc::new(MemoWiki::new(FixtureWiki::new(fixtures.join("wiki"))))), clock)
}

/// Remembers every answer of the wrapped wiki; simulations rerun the same
/// retrieval thousands of times.
pub struct MemoWiki<W> {
    inner: W,
    search: Mutex<HashMap<(String, usize), Vec<PageRef>>>,
    counts: Mutex<HashMap<PageRef, (u64, u64)>>,
    text: Mutex<HashMap<PageRef, String>>,
}

impl<W> MemoWiki<W> {
    pub fn new(inner: W) -> Self {
        MemoWiki {
            inner,
            search: Mutex::default(),
            counts: Mutex::default(),
            text: Mutex::default(),
        }
    }
}

fn memo<K: std::hash::Hash + Eq, V: Clone>(map: &Mutex<HashMap<K, V>>, key: K, f: impl FnOnce() -> agora_core::Result<V>) -> agora_core::Result<V> {
    if let Some(v) = map.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = f()?;
    map.lock().unwrap().insert(key, v.clone());
    Ok(v)
}

impl<W: WikiBackend> WikiBackend for MemoWiki<W> {
    fn search(&self, query: &str, limit: usize) -> agora_core::Result<Vec<PageRef>> {
        memo(&self.search, (query.to_string(), limit), || self.inner.search(query, limit))
    }

    fn edit_counts(&self, page: &PageRef) -> agora_core::Result<(u64, u64)> {
        memo(&self.counts, page.clone(), || self.inner.edit_counts(page))
    }

    fn page_text(&self, page: &PageRef) -> agora_core::Result<String> {
        memo(&self.text, page.clone(), || self.inner.page_text(page))
    }
}

/// What a simulated session went through.
#[derive(Debug, Default)]
pub struct Outcome {
    pub accepted: usize,
    pub gate_rejections: usize,
    pub rejected: usize,
    pub applied: usize,
}

fn survey(rng: &mut ChaCha8Rng, stage: Mode) -> SurveyResponse {
    let mut r = || rng.random_range(1..=5);
    SurveyResponse {
        stage,
        satisfaction: r(),
        rethinking: r(),
        appropriateness: r(),
        control: r(),
        interest: stage.collects_interest().then(r),
    }
}

fn interpretation_ids(s: &Session) -> Vec<Token> {
    s.runs
        .iter()
        .filter_map(|r| match &r.output {
            StageOutput::Interpretations { set } => Some(set.interpretations.iter().map(|i| i.id.clone())),
            _ => None,
        })
        .flatten()
        .collect()
}

fn suggestion_ids(s: &Session) -> Vec<Token> {
    s.runs
        .iter()
        .filter_map(|r| match &r.output {
            StageOutput::Suggestions { suggestions } => Some(suggestions.iter().map(|x| x.id.clone())),
            _ => None,
        })
        .flatten()
        .collect()
}

/// Runs one randomized session for `steps` commands. Most commands are the
/// ones a participant in that state would plausibly send; the rest are
/// arbitrary, including ones the service must refuse. Clock jumps cluster
/// around the accept gate.
pub fn simulate(st: &Studio, clock: &ManualClock, seed: u64, steps: usize) -> (Session, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Mode::NON_BASELINE.to_vec();
    order.sort_by_key(|_| rng.random::<u32>());
    let mut s = st
        .new_session(format!("sim{seed}"), PROMPT, Category::History, Some(order), None)
        .expect("session");
    let mut out = Outcome::default();
    for _ in 0..steps {
        if s.finished && rng.random_bool(0.5) {
            break;
        }
        let dt = match rng.random_range(0..4) {
            0 => 0,
            1 => rng.random_range(2990..3010),
            2 => rng.random_range(0..1500),
            _ => rng.random_range(0..6000),
        };
        clock.advance(dt);
        let stage = s.current_stage;
        let images: Vec<ImageId> = s.images.keys().cloned().collect();
        let interps = interpretation_ids(&s);
        let suggs = suggestion_ids(&s);
        let cmd = match rng.random_range(0..14) {
            0 | 1 => {
                // participants rerun a stage a couple of times at most
                let runs = s.runs.iter().filter(|r| r.stage == stage).count();
                let mode = if runs < 2 && rng.random_bool(0.85) { stage } else { *Mode::ALL.choose(&mut rng).unwrap() };
                Command::RunStage { mode, prompt: None }
            }
            2 | 3 => match interps.choose(&mut rng) {
                Some(id) => Command::Expand { interpretation_id: id.clone() },
                None => Command::OpenWorkspace { text: "a parchment".into() },
            },
            4 | 5 => match interps.choose(&mut rng) {
                Some(id) => Command::Accept { interpretation_id: id.clone() },
                None => Command::Accept { interpretation_id: Token("0".repeat(32)) },
            },
            6 => match suggs.choose(&mut rng) {
                Some(id) => Command::SelectSuggestion { suggestion_id: id.clone() },
                None => Command::OpenWorkspace { text: "an inkwell".into() },
            },
            7 => Command::WorkspaceGenerate { text: format!("take {}", rng.random::<u16>()) },
            8 => {
                let k = if rng.random_bool(0.9) { 10 } else { rng.random_range(0..12) };
                Command::InitCollage { images: images.choose_multiple(&mut rng, k).cloned().collect() }
            }
            9 | 10 => match images.choose(&mut rng) {
                Some(img) => Command::ReplaceImage { slot: rng.random_range(0..11), image: img.clone() },
                None => Command::ReplaceImage { slot: 0, image: ImageId("f".repeat(64)) },
            },
            11 => Command::DesignStatement { text: format!("statement {}", rng.random::<u16>()) },
            12 => {
                let target = if rng.random_bool(0.9) { stage } else { *Mode::ALL.choose(&mut rng).unwrap() };
                Command::Survey { survey: survey(&mut rng, target) }
            }
            _ => {
                let mut ranks: Vec<u32> = (1..=4).collect();
                ranks.sort_by_key(|_| rng.random::<u32>());
                Command::Rankings {
                    ranking: RankingRecord {
                        dimension: *RankingDimension::ALL.choose(&mut rng).unwrap(),
                        ranks: Mode::ALL.into_iter().zip(ranks).collect(),
                    },
                }
            }
        };
        let accepting = matches!(cmd, Command::Accept { .. });
        match st.execute(&mut s, cmd) {
            Ok(Some(_)) => {
                out.applied += 1;
                out.accepted += usize::from(accepting);
            }
            Ok(None) => {}
            Err(agora_core::Error::GateNotElapsed { .. }) => out.gate_rejections += 1,
            Err(_) => out.rejected += 1,
        }
    }
    (s, out)
}

/// Violations found by reading an exported log line by line.
#[derive(Debug, Default, PartialEq)]
pub struct Audit {
    pub entries: usize,
    pub accepts: usize,
    pub gate_violations: Vec<String>,
    pub order_violations: Vec<String>,
}

pub fn audit(doc: &str) -> Audit {
    let mut a = Audit::default();
    let mut order: Vec<String> = Vec::new();
    let mut position = 0usize;
    let mut expanded: BTreeMap<String, i64> = BTreeMap::new();
    let mut last_at = i64::MIN;
    for (n, line) in doc.lines().enumerate() {
        let v: Value = serde_json::from_str(line).expect("log line is json");
        a.entries += 1;
        let at = v["at"].as_i64().expect("at");
        let stage = v["stage"].as_str().expect("stage").to_string();
        let ev = &v["event"];
        let kind = ev["type"].as_str().expect("type");
        if v["seq"].as_u64() != Some(n as u64) {
            a.order_violations.push(format!("line {n}: seq {}", v["seq"]));
        }
        if at < last_at {
            a.order_violations.push(format!("line {n}: time went backwards"));
        }
        last_at = at;
        if kind == "session_created" {
            order = std::iter::once("baseline".to_string())
                .chain(ev["mode_order"].as_array().expect("order").iter().map(|m| m.as_str().unwrap().to_string()))
                .collect();
            continue;
        }
        match order.iter().position(|m| *m == stage) {
            Some(p) if p >= position => position = p,
            _ => a.order_violations.push(format!("line {n}: {kind} tagged {stage} after stage {}", order[position])),
        }
        if kind == "stage_run" && ev["mode"].as_str() != Some(&stage) {
            a.order_violations.push(format!("line {n}: {} run inside {stage}", ev["mode"]));
        }
        if kind == "survey_recorded" && ev["survey"]["stage"].as_str() != Some(&stage) {
            a.order_violations.push(format!("line {n}: survey for {} inside {stage}", ev["survey"]["stage"]));
        }
        let iid = ev["interpretation_id"].as_str().map(str::to_string);
        match kind {
            "interpretation_expanded" => {
                expanded.entry(iid.expect("id")).or_insert(at);
            }
            "interpretation_accepted" => {
                a.accepts += 1;
                let id = iid.expect("id");
                match expanded.get(&id) {
                    Some(t) if at - t >= 3000 => {}
                    Some(t) => a.gate_violations.push(format!("line {n}: accepted {} ms after expand", at - t)),
                    None => a.gate_violations.push(format!("line {n}: accepted without expand")),
                }
            }
            _ => {}
        }
    }
    a
}
