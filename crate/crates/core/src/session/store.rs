//! Session persistence: one append-only `events.jsonl` per session plus a
//! periodic `snapshot.json` of the derived state.
//!
//! Mutations of one session are serialized by a per-session writer lock
//! held across the whole command (gateway calls included); reads take a
//! shared lock on the state and never wait for gateway calls.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Command, LogEntry, Session, Studio};
use crate::error::{Error, Result};
use crate::ids::Token;
use crate::jsonl;
use crate::model::{Category, Mode};

pub const SNAPSHOT_EVERY: u64 = 25;

/// Where new session ids come from.
pub enum IdSource {
    Random,
    Seeded(Mutex<ChaCha8Rng>),
}

impl IdSource {
    pub fn seeded(seed: u64) -> Self {
        IdSource::Seeded(Mutex::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    fn next(&self) -> Token {
        match self {
            IdSource::Random => Token::random(),
            IdSource::Seeded(rng) => Token::from_rng(&mut *rng.lock().expect("id rng lock")),
        }
    }
}

struct Slot {
    writer: Mutex<()>,
    state: RwLock<Session>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    session: Session,
}

pub struct SessionStore {
    dir: Option<PathBuf>,
    sessions: RwLock<BTreeMap<String, Arc<Slot>>>,
    ids: IdSource,
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("bad session id {id:?}")))
    }
}

impl SessionStore {
    pub fn in_memory(ids: IdSource) -> Self {
        SessionStore {
            dir: None,
            sessions: RwLock::new(BTreeMap::new()),
            ids,
        }
    }

    /// Opens (or creates) a store under `dir` and restores every session
    /// found there.
    pub fn on_disk(dir: impl Into<PathBuf>, ids: IdSource) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let store = SessionStore {
            dir: Some(dir.clone()),
            sessions: RwLock::new(BTreeMap::new()),
            ids,
        };
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.join("events.jsonl").is_file() {
                let session = restore(&path)?;
                store.put(session);
            }
        }
        Ok(store)
    }

    fn put(&self, session: Session) {
        let slot = Arc::new(Slot {
            writer: Mutex::new(()),
            state: RwLock::new(session.clone()),
        });
        self.sessions.write().expect("store lock").insert(session.id.clone(), slot);
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>> {
        self.sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {id}")))
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().expect("store lock").keys().cloned().collect()
    }

    pub fn create(
        &self,
        studio: &Studio,
        prompt: &str,
        category: Category,
        mode_order: Option<Vec<Mode>>,
        seed: Option<u64>,
    ) -> Result<Session> {
        let session = studio.new_session(self.ids.next().0, prompt, category, mode_order, seed)?;
        self.insert(session.clone())?;
        Ok(session)
    }

    /// Adds a complete session, e.g. one rebuilt from an imported log.
    pub fn insert(&self, session: Session) -> Result<()> {
        check_id(&session.id)?;
        if self.sessions.read().expect("store lock").contains_key(&session.id) {
            return Err(Error::invalid(format!("session {} already exists", session.id)));
        }
        if let Some(dir) = &self.dir {
            let sdir = dir.join(&session.id);
            fs::create_dir_all(&sdir)?;
            fs::write(sdir.join("events.jsonl"), session.export()?)?;
            write_snapshot(&sdir, &session)?;
        }
        self.put(session);
        Ok(())
    }

    pub fn read<R>(&self, id: &str, f: impl FnOnce(&Session) -> R) -> Result<R> {
        let slot = self.slot(id)?;
        let s = slot.state.read().expect("session lock");
        Ok(f(&s))
    }

    /// Runs `cmd` against session `id`, persisting the resulting entry.
    pub fn execute(&self, studio: &Studio, id: &str, cmd: Command) -> Result<Option<LogEntry>> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock().expect("writer lock");
        let entry = {
            let s = slot.state.read().expect("session lock");
            studio.prepare(&s, cmd)?
        };
        let Some(entry) = entry else {
            return Ok(None);
        };
        let mut next = slot.state.read().expect("session lock").clone();
        next.apply(entry.clone())?;
        if let Some(dir) = &self.dir {
            let sdir = dir.join(id);
            let mut f = OpenOptions::new().append(true).open(sdir.join("events.jsonl"))?;
            f.write_all(jsonl::encode(&entry)?.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_data()?;
            if next.next_seq() % SNAPSHOT_EVERY == 0 {
                write_snapshot(&sdir, &next)?;
            }
        }
        *slot.state.write().expect("session lock") = next;
        Ok(Some(entry))
    }
}

fn write_snapshot(sdir: &Path, session: &Session) -> Result<()> {
    let snap = Snapshot {
        seq: session.next_seq() - 1,
        session: session.clone(),
    };
    let tmp = sdir.join("snapshot.json.tmp");
    fs::write(&tmp, serde_json::to_vec(&snap).map_err(|e| Error::Storage(e.to_string()))?)?;
    fs::rename(tmp, sdir.join("snapshot.json"))?;
    Ok(())
}

/// Rebuilds a session from its directory: the latest snapshot plus the log
/// entries after it, or the whole log when the snapshot is unusable.
pub(crate) fn restore(sdir: &Path) -> Result<Session> {
    let entries: Vec<LogEntry> = jsonl::decode_all(&fs::read_to_string(sdir.join("events.jsonl"))?)?;
    let snap = fs::read(sdir.join("snapshot.json"))
        .ok()
        .and_then(|b| serde_json::from_slice::<Snapshot>(&b).ok());
    if let Some(Snapshot { seq, mut session }) = snap {
        let cut = seq as usize + 1;
        if cut <= entries.len() && session.id == entries.first().map(session_id).unwrap_or_default() {
            session.events = entries[..cut].to_vec();
            let mut ok = true;
            for e in &entries[cut..] {
                if let Err(err) = session.apply(e.clone()) {
                    log::warn!("{}: snapshot tail does not apply ({err}); replaying whole log", sdir.display());
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(session);
            }
        } else {
            log::warn!("{}: snapshot does not match log; replaying whole log", sdir.display());
        }
    }
    Session::replay(entries)
}

fn session_id(e: &LogEntry) -> String {
    match &e.event {
        super::Event::SessionCreated { session_id, .. } => session_id.clone(),
        _ => String::new(),
    }
}
