//! One participant's run through the collage task, kept as an append-only
//! event log. [`Session::apply`] is the only place state changes, so every
//! rule (stage order, accept gate, collage shape) holds for live requests
//! and for replayed logs alike.

mod store;
mod studio;

pub use store::{IdSource, SessionStore, SNAPSHOT_EVERY};
pub use studio::{Command, Studio};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{ImageId, Token};
use crate::interpret::{InterpretationSet, PageFailure, SetStatus, SubjectExtraction};
use crate::jsonl;
use crate::model::{
    Collage, DesignStatement, GeneratedImage, Interpretation, InterpretationCard, Mode, PromptRecord, RankingRecord,
    Source, Suggestion, SurveyResponse,
};
use crate::modes::Rewrite;
use crate::wiki::sample_indices;

pub const ACCEPT_GATE_MS: i64 = 3000;
pub const WORKSPACE_IMAGES: u32 = 4;

/// What a stage run produced. Stored whole in the log; see [`StageView`]
/// for the part that is shown to participants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageOutput {
    Images {
        images: Vec<GeneratedImage>,
    },
    Diverse {
        rewrites: Vec<Rewrite>,
        images: Vec<GeneratedImage>,
        /// Rewrite indices whose calls failed.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        failed: Vec<usize>,
    },
    Suggestions {
        suggestions: Vec<Suggestion>,
    },
    Interpretations {
        set: InterpretationSet,
    },
}

impl StageOutput {
    fn mode_matches(&self, mode: Mode) -> bool {
        matches!(
            (self, mode),
            (StageOutput::Images { .. }, Mode::Baseline)
                | (StageOutput::Diverse { .. }, Mode::Diverse)
                | (StageOutput::Suggestions { .. }, Mode::Reformulative)
                | (StageOutput::Interpretations { .. }, Mode::Agonistic)
        )
    }

    /// Images a participant can place on the collage. Thumbnails are
    /// previews and do not count.
    pub fn collage_images(&self) -> &[GeneratedImage] {
        match self {
            StageOutput::Images { images } | StageOutput::Diverse { images, .. } => images,
            _ => &[],
        }
    }

    pub fn view(&self) -> StageView {
        match self {
            StageOutput::Images { images } => StageView::Images { images: images.clone() },
            StageOutput::Diverse {
                rewrites,
                images,
                failed,
            } => StageView::Diverse {
                rewrites: rewrites.clone(),
                images: images.clone(),
                failed: failed.clone(),
            },
            StageOutput::Suggestions { suggestions } => StageView::Suggestions {
                suggestions: suggestions.clone(),
            },
            StageOutput::Interpretations { set } => StageView::Interpretations {
                status: set.status,
                subject: set.subject.clone(),
                cards: set.interpretations.iter().map(Interpretation::card).collect(),
                failures: set.failures.clone(),
            },
        }
    }
}

/// Participant-facing form of a [`StageOutput`]. Interpretations appear as
/// collapsed cards only.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageView {
    Images {
        images: Vec<GeneratedImage>,
    },
    Diverse {
        rewrites: Vec<Rewrite>,
        images: Vec<GeneratedImage>,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        failed: Vec<usize>,
    },
    Suggestions {
        suggestions: Vec<Suggestion>,
    },
    Interpretations {
        status: SetStatus,
        subject: SubjectExtraction,
        cards: Vec<InterpretationCard>,
        failures: Vec<PageFailure>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        prompt: PromptRecord,
        mode_order: Vec<Mode>,
        /// Present when the order was drawn rather than given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order_seed: Option<u64>,
    },
    StageRun {
        run_id: Token,
        mode: Mode,
        prompt: String,
        output: StageOutput,
        latency_ms: u64,
    },
    InterpretationExpanded {
        interpretation_id: Token,
    },
    InterpretationAccepted {
        interpretation_id: Token,
        expanded_at: Timestamp,
        workspace_id: Token,
    },
    SuggestionSelected {
        suggestion_id: Token,
        workspace_id: Token,
    },
    WorkspaceOpened {
        workspace_id: Token,
        text: String,
    },
    WorkspaceGenerated {
        workspace_id: Token,
        text: String,
        images: Vec<GeneratedImage>,
    },
    CollageInitialized {
        images: Vec<ImageId>,
    },
    CollageReplaced {
        slot: usize,
        removed: ImageId,
        added: ImageId,
    },
    DesignStatementRecorded {
        text: String,
    },
    SurveyRecorded {
        survey: SurveyResponse,
    },
    RankingsRecorded {
        ranking: RankingRecord,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::SessionCreated { .. } => "session_created",
            Event::StageRun { .. } => "stage_run",
            Event::InterpretationExpanded { .. } => "interpretation_expanded",
            Event::InterpretationAccepted { .. } => "interpretation_accepted",
            Event::SuggestionSelected { .. } => "suggestion_selected",
            Event::WorkspaceOpened { .. } => "workspace_opened",
            Event::WorkspaceGenerated { .. } => "workspace_generated",
            Event::CollageInitialized { .. } => "collage_initialized",
            Event::CollageReplaced { .. } => "collage_replaced",
            Event::DesignStatementRecorded { .. } => "design_statement_recorded",
            Event::SurveyRecorded { .. } => "survey_recorded",
            Event::RankingsRecorded { .. } => "rankings_recorded",
        }
    }
}

/// One line of the exported log. `stage` is the stage the session was in
/// when the event was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub at: Timestamp,
    pub stage: Mode,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationView {
    pub interpretation_id: Token,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WorkspaceSource {
    Suggestion { id: Token },
    Interpretation { id: Token },
    Prompt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workspace {
    pub id: Token,
    pub stage: Mode,
    pub source: WorkspaceSource,
    pub editable_text: String,
    /// Append-only.
    pub generated: Vec<GeneratedImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRunRecord {
    pub run_id: Token,
    pub stage: Mode,
    pub prompt: String,
    pub at: Timestamp,
    pub latency_ms: u64,
    pub output: StageOutput,
}

/// Session state as derived from its log. `events` is the log itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub prompt: PromptRecord,
    pub mode_order: Vec<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_seed: Option<u64>,
    pub current_stage: Mode,
    pub finished: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collage: Option<Collage>,
    pub design_statements: Vec<DesignStatement>,
    pub surveys: Vec<SurveyResponse>,
    pub rankings: Vec<RankingRecord>,
    pub runs: Vec<StageRunRecord>,
    pub interpretation_views: BTreeMap<Token, InterpretationView>,
    pub workspaces: Vec<Workspace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_workspace: Option<Token>,
    /// Every collage-eligible image and the stage it was generated in.
    pub images: BTreeMap<ImageId, Mode>,
    #[serde(skip)]
    pub events: Vec<LogEntry>,
}

/// Draws the order of the three non-baseline stages from `seed`.
pub fn seeded_mode_order(seed: u64) -> Vec<Mode> {
    sample_indices(Mode::NON_BASELINE.len(), Mode::NON_BASELINE.len(), seed)
        .into_iter()
        .map(|i| Mode::NON_BASELINE[i])
        .collect()
}

pub fn validate_mode_order(order: &[Mode]) -> Result<()> {
    let mut sorted = order.to_vec();
    sorted.sort();
    if sorted != Mode::NON_BASELINE {
        return Err(Error::invalid(format!(
            "mode order must be a permutation of diverse, reformulative, agonistic; got {order:?}"
        )));
    }
    Ok(())
}

fn violation(msg: impl Into<String>) -> Error {
    Error::StageViolation(msg.into())
}

impl Session {
    /// Starts a session from its first log entry.
    pub fn create(entry: LogEntry) -> Result<Session> {
        let Event::SessionCreated {
            session_id,
            prompt,
            mode_order,
            order_seed,
        } = &entry.event
        else {
            return Err(Error::InvalidInput("a log must start with session_created".into()));
        };
        if entry.seq != 0 || entry.stage != Mode::Baseline {
            return Err(Error::InvalidInput("session_created must be entry 0 in the baseline stage".into()));
        }
        if session_id.trim().is_empty() {
            return Err(Error::invalid("session id is empty"));
        }
        validate_mode_order(mode_order)?;
        Ok(Session {
            id: session_id.clone(),
            prompt: prompt.clone(),
            mode_order: mode_order.clone(),
            order_seed: *order_seed,
            current_stage: Mode::Baseline,
            finished: false,
            collage: None,
            design_statements: Vec::new(),
            surveys: Vec::new(),
            rankings: Vec::new(),
            runs: Vec::new(),
            interpretation_views: BTreeMap::new(),
            workspaces: Vec::new(),
            active_workspace: None,
            images: BTreeMap::new(),
            events: vec![entry],
        })
    }

    /// Rebuilds a session from a full log, enforcing every rule on the way.
    pub fn replay(entries: impl IntoIterator<Item = LogEntry>) -> Result<Session> {
        let mut it = entries.into_iter();
        let first = it.next().ok_or_else(|| Error::InvalidInput("empty session log".into()))?;
        let mut s = Session::create(first)?;
        for e in it {
            s.apply(e)?;
        }
        Ok(s)
    }

    pub fn import(doc: &str) -> Result<Session> {
        Session::replay(jsonl::decode_all::<LogEntry>(doc)?)
    }

    /// The log as line-delimited JSON, one entry per line.
    pub fn export(&self) -> Result<String> {
        jsonl::encode_all(&self.events)
    }

    pub fn next_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn last_at(&self) -> Timestamp {
        self.events.last().map(|e| e.at).unwrap_or(Timestamp(i64::MIN))
    }

    /// Wraps `event` as the next entry without applying it.
    pub fn entry(&self, event: Event, at: Timestamp) -> LogEntry {
        LogEntry {
            seq: self.next_seq(),
            at,
            stage: self.current_stage,
            event,
        }
    }

    pub fn stage_position(&self) -> usize {
        match self.current_stage {
            Mode::Baseline => 0,
            m => 1 + self.mode_order.iter().position(|x| *x == m).expect("stage is in mode order"),
        }
    }

    /// Stages in the order this session visits them, baseline first.
    pub fn stages(&self) -> Vec<Mode> {
        std::iter::once(Mode::Baseline).chain(self.mode_order.iter().copied()).collect()
    }

    pub fn interpretation(&self, id: &Token) -> Option<&Interpretation> {
        self.runs.iter().rev().find_map(|r| match &r.output {
            StageOutput::Interpretations { set } => set.interpretations.iter().find(|i| &i.id == id),
            _ => None,
        })
    }

    pub fn suggestion(&self, id: &Token) -> Option<&Suggestion> {
        self.runs.iter().rev().find_map(|r| match &r.output {
            StageOutput::Suggestions { suggestions } => suggestions.iter().find(|s| &s.id == id),
            _ => None,
        })
    }

    pub fn workspace(&self, id: &Token) -> Option<&Workspace> {
        self.workspaces.iter().find(|w| &w.id == id)
    }

    pub fn active_workspace(&self) -> Option<&Workspace> {
        self.active_workspace.as_ref().and_then(|id| self.workspace(id))
    }

    pub fn statement_for(&self, stage: Mode) -> Option<&DesignStatement> {
        self.design_statements.iter().find(|d| d.stage == stage)
    }

    pub fn survey_for(&self, stage: Mode) -> Option<&SurveyResponse> {
        self.surveys.iter().find(|s| s.stage == stage)
    }

    /// Checks `entry` against the current state and, if it is allowed,
    /// appends it and updates the state. A rejected entry changes nothing.
    pub fn apply(&mut self, entry: LogEntry) -> Result<()> {
        if entry.seq != self.next_seq() {
            return Err(Error::InvalidInput(format!(
                "entry seq {} out of order, expected {}",
                entry.seq,
                self.next_seq()
            )));
        }
        if entry.at < self.last_at() {
            return Err(Error::InvalidInput(format!("entry {} is earlier than its predecessor", entry.seq)));
        }
        if entry.stage != self.current_stage {
            return Err(violation(format!(
                "entry {} is tagged {} but the session is in {}",
                entry.seq, entry.stage, self.current_stage
            )));
        }
        let stage = self.current_stage;
        let at = entry.at;
        if self.finished && !matches!(entry.event, Event::RankingsRecorded { .. }) {
            return Err(violation(format!("session is finished; {} not allowed", entry.event.name())));
        }
        match &entry.event {
            Event::SessionCreated { .. } => return Err(violation("session already created")),
            Event::StageRun {
                run_id,
                mode,
                prompt,
                output,
                latency_ms,
            } => {
                if *mode != stage {
                    return Err(violation(format!("cannot run {mode} while the current stage is {stage}")));
                }
                if !output.mode_matches(*mode) {
                    return Err(Error::InvalidInput(format!("{mode} run carries the wrong output kind")));
                }
                if prompt.trim().is_empty() {
                    return Err(Error::invalid("stage prompt is empty"));
                }
                if let Some(img) = output.collage_images().iter().find(|i| i.mode != stage) {
                    return Err(Error::InvalidInput(format!("image {} is tagged {}", img.id, img.mode)));
                }
                for img in output.collage_images() {
                    self.images.entry(img.id.clone()).or_insert(stage);
                }
                self.runs.push(StageRunRecord {
                    run_id: run_id.clone(),
                    stage,
                    prompt: prompt.clone(),
                    at,
                    latency_ms: *latency_ms,
                    output: output.clone(),
                });
            }
            Event::InterpretationExpanded { interpretation_id } => {
                self.require_stage(Mode::Agonistic, "expand an interpretation")?;
                if self.interpretation(interpretation_id).is_none() {
                    return Err(Error::NotFound(format!("interpretation {interpretation_id}")));
                }
                let view = self
                    .interpretation_views
                    .entry(interpretation_id.clone())
                    .or_insert_with(|| InterpretationView {
                        interpretation_id: interpretation_id.clone(),
                        expanded_at: None,
                        accepted_at: None,
                    });
                view.expanded_at.get_or_insert(at);
            }
            Event::InterpretationAccepted {
                interpretation_id,
                expanded_at,
                workspace_id,
            } => {
                self.require_stage(Mode::Agonistic, "accept an interpretation")?;
                let interp = self
                    .interpretation(interpretation_id)
                    .ok_or_else(|| Error::NotFound(format!("interpretation {interpretation_id}")))?;
                let text = interp.visual_description.clone();
                let view = self.interpretation_views.get(interpretation_id);
                let Some(opened) = view.and_then(|v| v.expanded_at) else {
                    return Err(Error::NotExpanded(interpretation_id.to_string()));
                };
                if opened != *expanded_at {
                    return Err(Error::InvalidInput(format!(
                        "accept names expansion at {} but it happened at {}",
                        expanded_at.0, opened.0
                    )));
                }
                let elapsed = at.since(opened);
                if elapsed < ACCEPT_GATE_MS {
                    return Err(Error::GateNotElapsed {
                        elapsed_ms: elapsed,
                        required_ms: ACCEPT_GATE_MS,
                    });
                }
                self.check_new_workspace(workspace_id)?;
                let view = self.interpretation_views.get_mut(interpretation_id).expect("checked above");
                view.accepted_at.get_or_insert(at);
                self.open_workspace(
                    workspace_id,
                    WorkspaceSource::Interpretation {
                        id: interpretation_id.clone(),
                    },
                    text,
                );
            }
            Event::SuggestionSelected {
                suggestion_id,
                workspace_id,
            } => {
                self.require_stage(Mode::Reformulative, "select a suggestion")?;
                let text = self
                    .suggestion(suggestion_id)
                    .ok_or_else(|| Error::NotFound(format!("suggestion {suggestion_id}")))?
                    .reformulated_prompt
                    .clone();
                self.check_new_workspace(workspace_id)?;
                self.open_workspace(workspace_id, WorkspaceSource::Suggestion { id: suggestion_id.clone() }, text);
            }
            Event::WorkspaceOpened { workspace_id, text } => {
                if text.trim().is_empty() {
                    return Err(Error::invalid("workspace text is empty"));
                }
                self.check_new_workspace(workspace_id)?;
                self.open_workspace(workspace_id, WorkspaceSource::Prompt, text.clone());
            }
            Event::WorkspaceGenerated {
                workspace_id,
                text,
                images,
            } => {
                let ws = self
                    .active_workspace()
                    .ok_or_else(|| Error::invalid("no active workspace"))?;
                if &ws.id != workspace_id {
                    return Err(Error::invalid(format!("workspace {workspace_id} is not the active one")));
                }
                if text.trim().is_empty() {
                    return Err(Error::invalid("edited text is empty"));
                }
                if images.len() != WORKSPACE_IMAGES as usize {
                    return Err(Error::InvalidInput(format!(
                        "workspace generation carries {} images, expected {WORKSPACE_IMAGES}",
                        images.len()
                    )));
                }
                if let Some(img) = images.iter().find(|i| &i.prompt_used != text || i.mode != stage) {
                    return Err(Error::InvalidInput(format!("image {} does not match the workspace text", img.id)));
                }
                for img in images {
                    self.images.entry(img.id.clone()).or_insert(stage);
                }
                let ws = self
                    .workspaces
                    .iter_mut()
                    .find(|w| &w.id == workspace_id)
                    .expect("active workspace exists");
                ws.editable_text = text.clone();
                ws.generated.extend(images.iter().cloned());
            }
            Event::CollageInitialized { images } => {
                self.require_stage(Mode::Baseline, "initialize the collage")?;
                if self.collage.is_some() {
                    return Err(Error::invalid("collage is already initialized"));
                }
                for id in images {
                    match self.images.get(id) {
                        Some(Mode::Baseline) => {}
                        Some(m) => return Err(Error::invalid(format!("image {id} comes from the {m} stage"))),
                        None => return Err(Error::invalid(format!("image {id} was not generated in this session"))),
                    }
                }
                self.collage = Some(Collage::new(images.clone())?);
            }
            Event::CollageReplaced { slot, removed, added } => {
                let collage = self.collage.as_ref().ok_or(Error::CollageNotInitialized)?;
                if !self.images.contains_key(added) {
                    return Err(Error::NotFound(format!("image {added} was not generated in this session")));
                }
                if let Some(held) = collage.slots().get(*slot) {
                    if held != removed {
                        return Err(Error::InvalidInput(format!("slot {slot} holds {held}, not {removed}")));
                    }
                }
                let mut next = collage.clone();
                next.replace(*slot, added.clone(), stage, at)?;
                self.collage = Some(next);
            }
            Event::DesignStatementRecorded { text } => {
                if text.trim().is_empty() {
                    return Err(Error::invalid("design statement is empty"));
                }
                if self.collage.is_none() {
                    return Err(Error::CollageNotInitialized);
                }
                if self.statement_for(stage).is_some() {
                    return Err(Error::invalid(format!("a design statement for {stage} already exists")));
                }
                self.design_statements.push(DesignStatement {
                    stage,
                    text: text.clone(),
                    recorded_at: at,
                });
            }
            Event::SurveyRecorded { survey } => {
                survey.validate()?;
                if self.survey_for(survey.stage).is_some() {
                    return Err(Error::invalid(format!("a survey for {} already exists", survey.stage)));
                }
                if survey.stage != stage {
                    return Err(violation(format!("survey is for {} but the current stage is {stage}", survey.stage)));
                }
                if self.statement_for(stage).is_none() {
                    return Err(Error::invalid(format!("record the {stage} design statement before its survey")));
                }
                self.surveys.push(survey.clone());
                match self.stages().get(self.stage_position() + 1) {
                    Some(next) => self.current_stage = *next,
                    None => self.finished = true,
                }
                self.active_workspace = None;
            }
            Event::RankingsRecorded { ranking } => {
                if !self.finished {
                    return Err(violation("rankings are recorded once every stage is surveyed"));
                }
                ranking.validate()?;
                if self.rankings.iter().any(|r| r.dimension == ranking.dimension) {
                    return Err(Error::invalid(format!(
                        "a ranking for {} already exists",
                        ranking.dimension.as_str()
                    )));
                }
                self.rankings.push(ranking.clone());
            }
        }
        self.events.push(entry);
        Ok(())
    }

    fn require_stage(&self, mode: Mode, what: &str) -> Result<()> {
        if self.current_stage != mode {
            return Err(violation(format!("cannot {what} in the {} stage", self.current_stage)));
        }
        Ok(())
    }

    fn check_new_workspace(&self, id: &Token) -> Result<()> {
        if self.workspace(id).is_some() {
            return Err(Error::InvalidInput(format!("workspace {id} already exists")));
        }
        Ok(())
    }

    fn open_workspace(&mut self, id: &Token, source: WorkspaceSource, text: String) {
        self.workspaces.push(Workspace {
            id: id.clone(),
            stage: self.current_stage,
            source,
            editable_text: text,
            generated: Vec::new(),
        });
        self.active_workspace = Some(id.clone());
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            prompt: self.prompt.clone(),
            mode_order: self.mode_order.clone(),
            current_stage: self.current_stage,
            finished: self.finished,
            collage: self.collage.clone(),
            design_statements: self.design_statements.clone(),
            surveys: self.surveys.clone(),
            rankings: self.rankings.clone(),
            runs: self
                .runs
                .iter()
                .map(|r| RunView {
                    run_id: r.run_id.clone(),
                    stage: r.stage,
                    prompt: r.prompt.clone(),
                    at: r.at,
                    result: r.output.view(),
                })
                .collect(),
            interpretation_views: self.interpretation_views.values().cloned().collect(),
            workspaces: self.workspaces.clone(),
            active_workspace: self.active_workspace.clone(),
            event_count: self.events.len(),
        }
    }

    /// What the expand call releases: the justification and source link.
    pub fn expansion(&self, id: &Token) -> Result<Expansion> {
        let i = self
            .interpretation(id)
            .ok_or_else(|| Error::NotFound(format!("interpretation {id}")))?;
        let view = self.interpretation_views.get(id).cloned().unwrap_or(InterpretationView {
            interpretation_id: id.clone(),
            expanded_at: None,
            accepted_at: None,
        });
        Ok(Expansion {
            view,
            justification: i.justification.clone(),
            source: i.source.clone(),
            accept_after: None,
        }
        .with_gate())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunView {
    pub run_id: Token,
    pub stage: Mode,
    pub prompt: String,
    pub at: Timestamp,
    pub result: StageView,
}

/// Participant-facing session state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: String,
    pub prompt: PromptRecord,
    pub mode_order: Vec<Mode>,
    pub current_stage: Mode,
    pub finished: bool,
    pub collage: Option<Collage>,
    pub design_statements: Vec<DesignStatement>,
    pub surveys: Vec<SurveyResponse>,
    pub rankings: Vec<RankingRecord>,
    pub runs: Vec<RunView>,
    pub interpretation_views: Vec<InterpretationView>,
    pub workspaces: Vec<Workspace>,
    pub active_workspace: Option<Token>,
    pub event_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    #[serde(flatten)]
    pub view: InterpretationView,
    pub justification: String,
    pub source: Source,
    /// Earliest time the accept call will be honoured.
    pub accept_after: Option<Timestamp>,
}

impl Expansion {
    fn with_gate(mut self) -> Self {
        self.accept_after = self.view.expanded_at.map(|t| t.plus_ms(ACCEPT_GATE_MS));
        self
    }
}
