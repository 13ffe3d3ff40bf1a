//! The immutable analysis bundle served to explorers.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::json_digest;
use crate::event_store::{Corpus, CorpusError};
use crate::hypergraph::{DirectedHypergraph, HypergraphError};
use crate::layout::Partition;
use crate::rpp::CausalGraph;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("cannot read snapshot {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("snapshot is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("inconsistent snapshot: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Corpus(#[from] CorpusError),

    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

pub type Result<T> = std::result::Result<T, SnapshotError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub corpus_digest: String,
    /// Kept for histogram queries.
    pub corpus: Corpus,
    pub graph: CausalGraph,
    pub hypergraph: DirectedHypergraph,
    pub embeddings_digest: String,
    pub partition: Partition,
    pub config: serde_json::Value,
    pub created_at: String,
}

impl Snapshot {
    pub fn entities(&self) -> &[String] {
        &self.hypergraph.entities
    }

    /// Checks the parts against each other and the recorded corpus digest.
    pub fn validate(&self) -> Result<()> {
        self.corpus.validate()?;
        let names = self.corpus.names();
        let bad = |m: String| Err(SnapshotError::Inconsistent(m));
        if json_digest(&self.corpus) != self.corpus_digest {
            return bad("corpus digest mismatch".into());
        }
        if self.hypergraph.entities != names {
            return bad("hypergraph vocabulary differs from the corpus".into());
        }
        if self.graph.num_nodes != names.len() || self.partition.community.len() != names.len() {
            return bad("graph or partition size differs from the corpus".into());
        }
        // Re-inserting every edge re-derives ids and re-checks invariants.
        let rebuilt = DirectedHypergraph::from_records(names, &self.hypergraph.to_records())?;
        if rebuilt != self.hypergraph {
            return bad("hyperedge ids do not match their contents".into());
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_value(self)
            .expect("snapshot serializes")
            .to_string()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(s)?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}
