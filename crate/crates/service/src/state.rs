use std::path::Path;
use std::sync::{Arc, RwLock};

use causeloom_core::hypergraph::{apply_amendments, AmendAction, Amendment, DirectedHypergraph};
use causeloom_core::snapshot::Snapshot;
use tokio::sync::Mutex;

use crate::config::default_journal_path;
use crate::journal::Journal;
use crate::{Result, ServiceConfig};

/// One consistent (snapshot, journal prefix) pair.
#[derive(Debug)]
pub struct View {
    pub snapshot: Arc<Snapshot>,
    pub snapshot_digest: String,
    pub journal_len: u64,
    /// Snapshot hypergraph with the journal prefix applied.
    pub amended: DirectedHypergraph,
    /// Journal entries whose edge was missing at replay time.
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct AppState {
    shared: Arc<Shared>,
}

#[derive(Debug)]
struct Shared {
    view: RwLock<Option<Arc<View>>>,
    writer: Mutex<Option<Journal>>,
    propagation_paths: usize,
}

#[derive(Debug)]
pub enum AmendError {
    NoSnapshot,
    UnknownEdge(String),
    Io(crate::ServiceError),
}

impl AppState {
    /// A service with nothing loaded; data endpoints answer 409.
    pub fn empty(propagation_paths: usize) -> Self {
        Self {
            shared: Arc::new(Shared {
                view: RwLock::new(None),
                writer: Mutex::new(None),
                propagation_paths,
            }),
        }
    }

    /// Loads the snapshot and replays the journal next to it.
    pub fn load(snapshot_path: &Path, journal_path: Option<&Path>, propagation_paths: usize) -> Result<Self> {
        let snapshot = Snapshot::load(snapshot_path)?;
        let journal_path = journal_path.map_or_else(|| default_journal_path(snapshot_path), Path::to_path_buf);
        let (journal, log) = Journal::open(&journal_path)?;
        let replay = apply_amendments(&snapshot.hypergraph, &log);
        for s in &replay.skipped {
            log::warn!("journal entry {} skipped on replay: {}", s.seq, s.reason);
        }
        let view = View {
            snapshot_digest: snapshot.digest(),
            snapshot: Arc::new(snapshot),
            journal_len: log.len() as u64,
            amended: replay.hypergraph,
            skipped: replay.skipped.len(),
        };
        log::info!(
            "loaded snapshot {} with {} journal entries from {}",
            view.snapshot_digest,
            view.journal_len,
            journal_path.display()
        );
        Ok(Self {
            shared: Arc::new(Shared {
                view: RwLock::new(Some(Arc::new(view))),
                writer: Mutex::new(Some(journal)),
                propagation_paths,
            }),
        })
    }

    pub fn from_config(config: &ServiceConfig) -> Result<Self> {
        match &config.snapshot {
            Some(path) => Self::load(path, config.journal.as_deref(), config.propagation_paths),
            None => Ok(Self::empty(config.propagation_paths)),
        }
    }

    pub fn view(&self) -> Option<Arc<View>> {
        self.shared.view.read().expect("view lock poisoned").clone()
    }

    pub fn propagation_paths(&self) -> usize {
        self.shared.propagation_paths
    }

    /// Appends one amendment durably and publishes the resulting view.
    /// Returns the assigned sequence number.
    pub async fn amend(&self, edge_id: String, action: AmendAction, author: String) -> std::result::Result<u64, AmendError> {
        let mut writer = self.shared.writer.lock().await;
        let journal = writer.as_mut().ok_or(AmendError::NoSnapshot)?;
        // Only the writer replaces the view, so it cannot change under us.
        let current = self.view().ok_or(AmendError::NoSnapshot)?;
        if current.amended.edge(&edge_id).is_none() {
            return Err(AmendError::UnknownEdge(edge_id));
        }
        let entry = Amendment {
            seq: current.journal_len + 1,
            edge_id,
            action,
            author,
            ts: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        journal.append(&entry).map_err(AmendError::Io)?;
        let next = View {
            snapshot: current.snapshot.clone(),
            snapshot_digest: current.snapshot_digest.clone(),
            journal_len: entry.seq,
            amended: apply_amendments(&current.amended, std::slice::from_ref(&entry)).hypergraph,
            skipped: current.skipped,
        };
        *self.shared.view.write().expect("view lock poisoned") = Some(Arc::new(next));
        Ok(entry.seq)
    }
}
