use std::sync::Arc;
use std::time::Instant;

use serde::Deserialize;

use super::{validate_mode_order, seeded_mode_order, Event, LogEntry, Session, StageOutput, ACCEPT_GATE_MS, WORKSPACE_IMAGES};
use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::gateways::{Gateways, ImageRequest};
use crate::ids::{seed_from, ImageId, Token};
use crate::interpret::build_interpretation_set;
use crate::model::{Category, Mode, PromptRecord, RankingRecord, SurveyResponse};
use crate::modes::{baseline_generate, diverse_generate, reformulate, DEFAULT_SUGGESTIONS, DIVERSE_REWRITES};
use crate::wiki::{PipelineConfig, WikiBackend};

/// A participant action. Each one becomes at most one log entry.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    RunStage { mode: Mode, prompt: Option<String> },
    Expand { interpretation_id: Token },
    Accept { interpretation_id: Token },
    SelectSuggestion { suggestion_id: Token },
    OpenWorkspace { text: String },
    WorkspaceGenerate { text: String },
    InitCollage { images: Vec<ImageId> },
    ReplaceImage { slot: usize, image: ImageId },
    DesignStatement { text: String },
    Survey { survey: SurveyResponse },
    Rankings { ranking: RankingRecord },
}

/// Everything a session needs from the outside world.
#[derive(Clone)]
pub struct Studio {
    pub gateways: Gateways,
    pub wiki: Arc<dyn WikiBackend>,
    pub pipeline: PipelineConfig,
    pub suggestion_count: usize,
}

impl Studio {
    pub fn new(gateways: Gateways, wiki: Arc<dyn WikiBackend>) -> Self {
        Studio {
            gateways,
            wiki,
            pipeline: PipelineConfig::default(),
            suggestion_count: DEFAULT_SUGGESTIONS,
        }
    }

    pub fn now(&self) -> Timestamp {
        self.gateways.clock.now()
    }

    /// Builds a new session. Without an explicit order the three
    /// non-baseline stages are shuffled with `seed` (drawn at random when
    /// absent); the seed is logged so the draw can be replayed.
    pub fn new_session(
        &self,
        id: String,
        prompt: &str,
        category: Category,
        mode_order: Option<Vec<Mode>>,
        seed: Option<u64>,
    ) -> Result<Session> {
        let prompt = PromptRecord::new(prompt.trim(), category, self.now())?;
        let (mode_order, order_seed) = match mode_order {
            Some(order) => {
                validate_mode_order(&order)?;
                (order, None)
            }
            None => {
                let seed = seed.unwrap_or_else(rand::random);
                (seeded_mode_order(seed), Some(seed))
            }
        };
        let at = prompt.created_at;
        Session::create(LogEntry {
            seq: 0,
            at,
            stage: Mode::Baseline,
            event: Event::SessionCreated {
                session_id: id,
                prompt,
                mode_order,
                order_seed,
            },
        })
    }

    /// Does the outside work a command needs (model and image calls) and
    /// returns the entry to append. `None` means the command changes
    /// nothing, e.g. a second expand of the same card.
    pub fn prepare(&self, s: &Session, cmd: Command) -> Result<Option<LogEntry>> {
        let seq = s.next_seq();
        let derived = |kind: &str| Token::derived([kind, s.id.as_str(), &seq.to_string()]);
        let event = match cmd {
            Command::RunStage { mode, prompt } => {
                if s.finished || mode != s.current_stage {
                    return Err(Error::StageViolation(format!(
                        "cannot run {mode} while the current stage is {}",
                        if s.finished { "finished" } else { s.current_stage.as_str() }
                    )));
                }
                let prompt = prompt
                    .filter(|p| !p.trim().is_empty())
                    .unwrap_or_else(|| s.prompt.text.clone())
                    .trim()
                    .to_string();
                let started = Instant::now();
                let output = self.run(mode, &prompt, seed_from([s.id.as_str(), &seq.to_string()]))?;
                Event::StageRun {
                    run_id: derived("run-v1"),
                    mode,
                    prompt,
                    output,
                    latency_ms: started.elapsed().as_millis() as u64,
                }
            }
            Command::Expand { interpretation_id } => {
                if s.interpretation(&interpretation_id).is_none() {
                    return Err(Error::NotFound(format!("interpretation {interpretation_id}")));
                }
                let seen = s.interpretation_views.get(&interpretation_id);
                if seen.and_then(|v| v.expanded_at).is_some() {
                    return Ok(None);
                }
                Event::InterpretationExpanded { interpretation_id }
            }
            Command::Accept { interpretation_id } => {
                if s.interpretation(&interpretation_id).is_none() {
                    return Err(Error::NotFound(format!("interpretation {interpretation_id}")));
                }
                let expanded_at = s
                    .interpretation_views
                    .get(&interpretation_id)
                    .and_then(|v| v.expanded_at)
                    .ok_or_else(|| Error::NotExpanded(interpretation_id.to_string()))?;
                let elapsed = self.now().since(expanded_at);
                if elapsed < ACCEPT_GATE_MS {
                    return Err(Error::GateNotElapsed {
                        elapsed_ms: elapsed,
                        required_ms: ACCEPT_GATE_MS,
                    });
                }
                Event::InterpretationAccepted {
                    interpretation_id,
                    expanded_at,
                    workspace_id: derived("workspace-v1"),
                }
            }
            Command::SelectSuggestion { suggestion_id } => Event::SuggestionSelected {
                suggestion_id,
                workspace_id: derived("workspace-v1"),
            },
            Command::OpenWorkspace { text } => Event::WorkspaceOpened {
                workspace_id: derived("workspace-v1"),
                text,
            },
            Command::WorkspaceGenerate { text } => {
                let ws = s.active_workspace().ok_or_else(|| Error::invalid("no active workspace"))?;
                if text.trim().is_empty() {
                    return Err(Error::invalid("edited text is empty"));
                }
                let req = ImageRequest::new(
                    text.clone(),
                    WORKSPACE_IMAGES,
                    Some(seed_from([s.id.as_str(), &seq.to_string()])),
                );
                let images = self.gateways.generate_image(&req, s.current_stage)?;
                Event::WorkspaceGenerated {
                    workspace_id: ws.id.clone(),
                    text,
                    images,
                }
            }
            Command::InitCollage { images } => Event::CollageInitialized { images },
            Command::ReplaceImage { slot, image } => {
                let collage = s.collage.as_ref().ok_or(Error::CollageNotInitialized)?;
                let removed = collage
                    .slots()
                    .get(slot)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("slot {slot} is outside 0..10")))?;
                Event::CollageReplaced {
                    slot,
                    removed,
                    added: image,
                }
            }
            Command::DesignStatement { text } => Event::DesignStatementRecorded { text },
            Command::Survey { survey } => Event::SurveyRecorded { survey },
            Command::Rankings { ranking } => Event::RankingsRecorded { ranking },
        };
        let at = self.now().max(s.last_at());
        Ok(Some(s.entry(event, at)))
    }

    /// Prepares and applies `cmd` in one step.
    pub fn execute(&self, s: &mut Session, cmd: Command) -> Result<Option<LogEntry>> {
        let entry = self.prepare(s, cmd)?;
        if let Some(e) = &entry {
            s.apply(e.clone())?;
        }
        Ok(entry)
    }

    /// Dispatches one stage run to its mode.
    pub fn run(&self, mode: Mode, prompt: &str, seed: u64) -> Result<StageOutput> {
        let gw = &self.gateways;
        Ok(match mode {
            Mode::Baseline => StageOutput::Images {
                images: baseline_generate(gw, prompt, Some(seed))?,
            },
            Mode::Diverse => {
                let run = diverse_generate(gw, prompt, Some(seed))?;
                let failed = match &run.error {
                    Some(Error::PartialRewrite { succeeded }) => {
                        (0..DIVERSE_REWRITES).filter(|i| !succeeded.contains(i)).collect()
                    }
                    Some(e) => return Err(e.clone()),
                    None => Vec::new(),
                };
                StageOutput::Diverse {
                    rewrites: run.rewrites,
                    images: run.images,
                    failed,
                }
            }
            Mode::Reformulative => StageOutput::Suggestions {
                suggestions: reformulate(gw, prompt, self.suggestion_count)?,
            },
            Mode::Agonistic => StageOutput::Interpretations {
                set: build_interpretation_set(gw, self.wiki.as_ref(), prompt, &self.pipeline)?,
            },
        })
    }
}
