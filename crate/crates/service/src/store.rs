//! Append-only session log: one JSONL file per session, the config on the
//! first line and one event per following line.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::session::{LoggedEvent, Session, SessionConfig};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Create { session_id: String, config: SessionConfig },
    Event(LoggedEvent),
}

#[derive(Debug, Clone)]
pub struct EventStore {
    dir: PathBuf,
}

impl EventStore {
    pub fn open(dir: impl Into<PathBuf>) -> anyhow::Result<EventStore> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(EventStore { dir })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn append(&self, id: &str, line: &Line) -> anyhow::Result<()> {
        let path = self.path(id);
        let mut f = OpenOptions::new().create(true).append(true).open(&path).with_context(|| format!("opening {}", path.display()))?;
        let mut text = serde_json::to_string(line)?;
        text.push('\n');
        f.write_all(text.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    pub fn record_create(&self, session: &Session) -> anyhow::Result<()> {
        self.append(&session.id, &Line::Create { session_id: session.id.clone(), config: session.config.clone() })
    }

    pub fn record_event(&self, id: &str, event: &LoggedEvent) -> anyhow::Result<()> {
        self.append(id, &Line::Event(event.clone()))
    }

    /// Rebuilds every stored session by replaying its events.
    pub fn load_all(&self) -> anyhow::Result<Vec<Session>> {
        let mut out = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for p in paths {
            match load_one(&p) {
                Ok(s) => out.push(s),
                Err(e) => tracing::warn!(path = %p.display(), error = %e, "skipping unreadable session log"),
            }
        }
        Ok(out)
    }
}

fn load_one(path: &Path) -> anyhow::Result<Session> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut session: Option<Session> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Line>(&line).with_context(|| format!("line {}", i + 1))? {
            Line::Create { session_id, config } => {
                anyhow::ensure!(session.is_none(), "second create record at line {}", i + 1);
                session = Some(Session::new(session_id, config).map_err(|e| anyhow::anyhow!(e.body.message))?);
            }
            Line::Event(ev) => {
                let s = session.as_mut().context("event before create record")?;
                s.apply(ev.event, ev.at_ms).map_err(|e| anyhow::anyhow!("line {}: {}", i + 1, e.body.message))?;
            }
        }
    }
    session.context("empty session log")
}
