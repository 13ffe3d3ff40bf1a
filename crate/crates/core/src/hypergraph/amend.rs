//! Analyst overrides replayed on top of a hypergraph snapshot.

use serde::{Deserialize, Serialize};

use super::{DirectedHypergraph, HypergraphError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmendAction {
    Delete,
    FlipSign,
    SetStrength(f64),
}

/// One journal entry: `{seq, edge_id, action, value?, author, ts}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AmendmentRecord", into = "AmendmentRecord")]
pub struct Amendment {
    pub seq: u64,
    pub edge_id: String,
    pub action: AmendAction,
    pub author: String,
    pub ts: String,
}

#[derive(Serialize, Deserialize)]
struct AmendmentRecord {
    seq: u64,
    edge_id: String,
    action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default)]
    author: String,
    #[serde(default)]
    ts: String,
}

impl AmendAction {
    /// Parses the wire form `action` plus optional `value`.
    pub fn parse(action: &str, value: Option<f64>) -> Result<Self> {
        let act = match (action, value) {
            ("delete", None) => AmendAction::Delete,
            ("flip_sign", None) => AmendAction::FlipSign,
            ("set_strength", Some(v)) => AmendAction::SetStrength(v),
            ("set_strength", None) => {
                return Err(HypergraphError::InvalidAmendment("set_strength needs a value".into()))
            }
            ("delete" | "flip_sign", Some(_)) => {
                return Err(HypergraphError::InvalidAmendment(format!(
                    "{action} takes no value"
                )))
            }
            (other, _) => {
                return Err(HypergraphError::InvalidAmendment(format!(
                    "unknown action {other:?}"
                )))
            }
        };
        act.validate()?;
        Ok(act)
    }

    pub fn validate(&self) -> Result<()> {
        if let AmendAction::SetStrength(v) = *self {
            if !(v != 0.0 && (-1.0..=1.0).contains(&v)) {
                return Err(HypergraphError::InvalidAmendment(format!(
                    "strength {v} must be non-zero and within [-1, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AmendAction::Delete => "delete",
            AmendAction::FlipSign => "flip_sign",
            AmendAction::SetStrength(_) => "set_strength",
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            AmendAction::SetStrength(v) => Some(v),
            _ => None,
        }
    }
}

impl TryFrom<AmendmentRecord> for Amendment {
    type Error = HypergraphError;

    fn try_from(r: AmendmentRecord) -> Result<Self> {
        Ok(Amendment {
            seq: r.seq,
            edge_id: r.edge_id,
            action: AmendAction::parse(&r.action, r.value)?,
            author: r.author,
            ts: r.ts,
        })
    }
}

impl From<Amendment> for AmendmentRecord {
    fn from(a: Amendment) -> Self {
        AmendmentRecord {
            seq: a.seq,
            edge_id: a.edge_id,
            action: a.action.name().to_string(),
            value: a.action.value(),
            author: a.author,
            ts: a.ts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedAmendment {
    pub seq: u64,
    pub edge_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmendmentReplay {
    pub hypergraph: DirectedHypergraph,
    pub skipped: Vec<SkippedAmendment>,
}

/// Replays `log` in order. Entries naming an edge that is absent at that
/// point (never present, or already deleted) are skipped and reported.
pub fn apply_amendments(hg: &DirectedHypergraph, log: &[Amendment]) -> AmendmentReplay {
    let mut out = hg.clone();
    let mut skipped = Vec::new();
    for a in log {
        let Some(pos) = out.edges.iter().position(|e| e.id == a.edge_id) else {
            skipped.push(SkippedAmendment {
                seq: a.seq,
                edge_id: a.edge_id.clone(),
                reason: "edge not present".into(),
            });
            continue;
        };
        match a.action {
            AmendAction::Delete => {
                out.edges.remove(pos);
            }
            AmendAction::FlipSign => out.edges[pos].strength = -out.edges[pos].strength,
            AmendAction::SetStrength(v) => {
                if let Err(e) = a.action.validate() {
                    skipped.push(SkippedAmendment {
                        seq: a.seq,
                        edge_id: a.edge_id.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
                out.edges[pos].strength = v;
            }
        }
    }
    AmendmentReplay {
        hypergraph: out,
        skipped,
    }
}
