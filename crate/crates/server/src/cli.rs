//! The `agora` command line.
//!
//! Everything except `serve` runs offline against an in-memory image store
//! and a clock pinned to [`OFFLINE_EPOCH`], so repeated runs print the same
//! bytes. Results go to stdout as JSON lines.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use agora_analytics::{analyze, irr, load_coded, load_sessions, WeightBase};
use agora_core::clock::{Clock, ManualClock, SystemClock, Timestamp};
use agora_core::interpret::build_interpretation_set;
use agora_core::model::GeneratedImage;
use agora_core::modes::{baseline_generate, diverse_generate, reformulate};
use agora_core::session::{IdSource, SessionStore, Studio};
use agora_core::wiki::{run_pipeline, PipelineConfig};
use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::api::{self, AppState};
use crate::config::Config;

/// 2024-01-01T00:00:00Z.
pub const OFFLINE_EPOCH: Timestamp = Timestamp(1_704_067_200_000);

#[derive(Debug, Parser)]
#[command(name = "agora", version, about = "Image-generation studio with agonistic prompt interpretations")]
pub struct Cli {
    /// TOML configuration; defaults to mock backends over ./fixtures.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Fixture root holding llm/ and wiki/ recordings.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run the HTTP session service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        /// Directory for sessions, images and the response cache.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Rank wiki pages on a subject by edits per editor and sample some.
    Controversy {
        subject: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Prompt the relevance filter judges against; defaults to the subject.
        #[arg(long)]
        prompt: Option<String>,
    },
    /// Build agonistic interpretations of a prompt.
    Interpret {
        prompt: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Also print the section summaries participants never see.
        #[arg(long)]
        debug: bool,
        #[command(flatten)]
        images: ImagesArg,
    },
    /// Generate the prompt as written.
    Baseline {
        prompt: String,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        images: ImagesArg,
    },
    /// Rewrite the prompt four ways for diversity and render each rewrite.
    Diverse {
        prompt: String,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        images: ImagesArg,
    },
    /// Suggest more detailed versions of the prompt.
    Reformulate {
        prompt: String,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[command(flatten)]
        images: ImagesArg,
    },
    /// Compute the study tables from exported session logs.
    Analyze {
        /// Directory of exported .jsonl logs (searched one level deep).
        #[arg(long)]
        logs: PathBuf,
        /// Coded image events of one rater.
        #[arg(long)]
        coded: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inter-rater reliability of two coding files.
    Irr {
        #[arg(long)]
        coded_a: PathBuf,
        #[arg(long)]
        coded_b: PathBuf,
        /// consensus, union or pooled.
        #[arg(long, default_value = "consensus")]
        weights: WeightBase,
        /// Print the full report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, clap::Args)]
pub struct ImagesArg {
    /// Write generated PNGs into this directory.
    #[arg(long = "images")]
    pub dir: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(f) = &cli.fixtures {
        cfg.fixtures = f.clone();
    }
    Ok(cfg)
}

fn offline_studio(cfg: &Config) -> anyhow::Result<Studio> {
    cfg.studio(Arc::new(ManualClock::new(OFFLINE_EPOCH)), false)
}

fn emit<T: Serialize>(out: &mut impl Write, rows: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut *out, &r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn save_images<'a>(studio: &Studio, dir: &Option<PathBuf>, images: impl IntoIterator<Item = &'a GeneratedImage>) -> anyhow::Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for img in images {
        let bytes = studio
            .gateways
            .store
            .get(&img.bytes_ref)
            .with_context(|| format!("image {} missing from the store", img.bytes_ref))?;
        std::fs::write(dir.join(format!("{}.png", img.bytes_ref)), bytes)?;
    }
    Ok(())
}

fn pipeline_cfg(cfg: &Config, seed: Option<u64>) -> PipelineConfig {
    let mut p = cfg.pipeline;
    if let Some(s) = seed {
        p.rng_seed = s;
    }
    p
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Cmd::Serve { bind, data_dir } => {
            let mut cfg = cfg;
            if let Some(b) = bind {
                cfg.server.bind = b;
            }
            if let Some(d) = data_dir {
                cfg.server.data_dir = d;
            }
            serve(cfg)
        }
        Cmd::Controversy { subject, seed, prompt } => {
            let studio = offline_studio(&cfg)?;
            let p = pipeline_cfg(&cfg, seed);
            let report = run_pipeline(
                studio.wiki.as_ref(),
                studio.gateways.chat.as_ref(),
                &subject,
                prompt.as_deref().unwrap_or(&subject),
                &p,
                studio.gateways.max_in_flight,
            )?;
            emit(&mut out, &report.rows)
        }
        Cmd::Interpret { prompt, seed, debug, images } => {
            let studio = offline_studio(&cfg)?;
            let set = build_interpretation_set(&studio.gateways, studio.wiki.as_ref(), &prompt, &pipeline_cfg(&cfg, seed))?;
            save_images(&studio, &images.dir, set.interpretations.iter().map(|i| &i.thumbnail))?;
            emit(
                &mut out,
                set.interpretations.iter().map(|i| {
                    let mut row = json!({
                        "id": i.id,
                        "visual_description": i.visual_description,
                        "justification": i.justification,
                        "source": i.source,
                        "thumbnail": i.thumbnail.bytes_ref,
                    });
                    if debug {
                        row["section_summary"] = json!(i.section_summary);
                    }
                    row
                }),
            )
        }
        Cmd::Baseline { prompt, seed, images } => {
            let studio = offline_studio(&cfg)?;
            let generated = baseline_generate(&studio.gateways, &prompt, seed)?;
            save_images(&studio, &images.dir, &generated)?;
            emit(&mut out, &generated)
        }
        Cmd::Diverse { prompt, seed, images } => {
            let studio = offline_studio(&cfg)?;
            let run = diverse_generate(&studio.gateways, &prompt, seed)?;
            save_images(&studio, &images.dir, &run.images)?;
            emit(
                &mut out,
                run.rewrites.iter().zip(&run.images).map(|(rw, img)| {
                    json!({
                        "index": rw.index,
                        "rewrite": rw.text,
                        "unchanged": rw.unchanged,
                        "image": img,
                    })
                }),
            )?;
            match run.error {
                Some(e) => Err(e.into()),
                None => Ok(()),
            }
        }
        Cmd::Reformulate { prompt, count, images } => {
            let studio = offline_studio(&cfg)?;
            let suggestions = reformulate(&studio.gateways, &prompt, count)?;
            save_images(&studio, &images.dir, suggestions.iter().map(|s| &s.thumbnail))?;
            emit(&mut out, &suggestions)
        }
        Cmd::Analyze { logs, coded, out: dir } => {
            let sessions = load_sessions(&logs)?;
            let coded = coded.as_deref().map(load_coded).transpose()?;
            let gw = cfg.gateways(Arc::new(ManualClock::new(OFFLINE_EPOCH)), false)?;
            let report = analyze(&sessions, coded.as_deref(), gw.embedder.as_ref())?;
            report.write(&dir)?;
            writeln!(out, "{}", report.to_text())?;
            Ok(())
        }
        Cmd::Irr { coded_a, coded_b, weights, json } => {
            let report = irr(&load_coded(&coded_a)?, &load_coded(&coded_b)?, weights)?;
            if json {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else {
                write!(out, "{}", report.to_text())?;
            }
            Ok(())
        }
    }
}

/// Opens the persistent store under `data_dir` and builds the app state.
pub fn app_state(cfg: &Config, clock: Arc<dyn Clock>) -> anyhow::Result<AppState> {
    let studio = cfg.studio(clock, true)?;
    let store = SessionStore::on_disk(sessions_dir(&cfg.server.data_dir), IdSource::Random)?;
    Ok(AppState {
        studio: Arc::new(studio),
        store: Arc::new(store),
    })
}

fn sessions_dir(data: &Path) -> PathBuf {
    data.join("sessions")
}

fn serve(cfg: Config) -> anyhow::Result<()> {
    let addr: SocketAddr = cfg
        .server
        .bind
        .parse()
        .with_context(|| format!("bad bind address {:?}", cfg.server.bind))?;
    let state = app_state(&cfg, Arc::new(SystemClock))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("listening on {}", listener.local_addr()?);
        eprintln!("agora listening on http://{}", listener.local_addr()?);
        axum::serve(listener, api::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        anyhow::Ok(())
    })
}
