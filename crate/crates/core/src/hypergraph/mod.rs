//! Weighted directed hypergraph of (cause set -> effect) relations, with
//! AND/OR aggregation, filtering and an analyst amendment log.

mod aggregate;
mod amend;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;
use crate::event_store::EntityId;
use crate::rpp::CausalGraph;

pub use aggregate::{aggregate, expand, AggregatedGroup, Sector};
pub use amend::{apply_amendments, AmendAction, Amendment, AmendmentReplay, SkippedAmendment};

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("invalid hyperedge: {0}")]
    InvalidEdge(String),

    #[error("unknown entity {0:?}")]
    UnknownEntity(String),

    #[error("invalid amendment: {0}")]
    InvalidAmendment(String),
}

pub type Result<T> = std::result::Result<T, HypergraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    /// Number of causes at the search level that produced the edge.
    pub size_level: usize,
    pub recruited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub id: String,
    /// Sorted, deduplicated, never contains `effect`.
    pub causes: Vec<EntityId>,
    pub effect: EntityId,
    /// Non-zero, in `[-1, 1]`.
    pub strength: f64,
    pub provenance: Provenance,
}

impl Hyperedge {
    pub fn degree(&self) -> usize {
        self.causes.len()
    }

    pub fn is_impelling(&self) -> bool {
        self.strength > 0.0
    }
}

/// Stable edge identifier from the sorted cause names and the effect name.
pub fn edge_id<S: AsRef<str>>(cause_names: &[S], effect_name: &str) -> String {
    let mut names: Vec<&str> = cause_names.iter().map(AsRef::as_ref).collect();
    names.sort_unstable();
    let key = format!("{}\u{1e}{}", names.join("\u{1f}"), effect_name);
    sha256_hex(key)[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedHypergraph {
    pub entities: Vec<String>,
    pub edges: Vec<Hyperedge>,
}

impl DirectedHypergraph {
    pub fn new(entities: Vec<String>) -> Self {
        Self {
            entities,
            edges: Vec::new(),
        }
    }

    /// Individual (size-1) hyperedges from a causal graph; self-influence is dropped.
    pub fn from_causal_graph(graph: &CausalGraph, entities: Vec<String>) -> Result<Self> {
        let mut hg = Self::new(entities);
        for e in graph.edges.iter().filter(|e| e.cause != e.effect) {
            hg.insert(
                vec![e.cause],
                e.effect,
                e.strength,
                Provenance {
                    size_level: 1,
                    recruited: false,
                },
            )?;
        }
        Ok(hg)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, id: &str) -> Option<&Hyperedge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Builds a validated edge for this vocabulary without inserting it.
    pub fn make_edge(
        &self,
        mut causes: Vec<EntityId>,
        effect: EntityId,
        strength: f64,
        provenance: Provenance,
    ) -> Result<Hyperedge> {
        causes.sort_unstable();
        causes.dedup();
        let u = self.entities.len();
        if causes.is_empty() {
            return Err(HypergraphError::InvalidEdge("empty cause set".into()));
        }
        if effect >= u || causes.iter().any(|&c| c >= u) {
            return Err(HypergraphError::InvalidEdge(format!(
                "entity id out of range for {u} entities"
            )));
        }
        if causes.contains(&effect) {
            return Err(HypergraphError::InvalidEdge("effect is one of its causes".into()));
        }
        if !(strength != 0.0 && (-1.0..=1.0).contains(&strength)) {
            return Err(HypergraphError::InvalidEdge(format!(
                "strength {strength} must be non-zero and within [-1, 1]"
            )));
        }
        let names: Vec<&str> = causes.iter().map(|&c| self.entities[c].as_str()).collect();
        Ok(Hyperedge {
            id: edge_id(&names, &self.entities[effect]),
            causes,
            effect,
            strength,
            provenance,
        })
    }

    pub fn insert(
        &mut self,
        causes: Vec<EntityId>,
        effect: EntityId,
        strength: f64,
        provenance: Provenance,
    ) -> Result<&Hyperedge> {
        let edge = self.make_edge(causes, effect, strength, provenance)?;
        if self.edge(&edge.id).is_some() {
            return Err(HypergraphError::InvalidEdge(format!(
                "duplicate edge {}",
                edge.id
            )));
        }
        self.edges.push(edge);
        Ok(self.edges.last().expect("just pushed"))
    }

    /// Cause sets already recorded for `effect`.
    pub fn cause_sets_of(&self, effect: EntityId) -> impl Iterator<Item = &[EntityId]> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.effect == effect)
            .map(|e| e.causes.as_slice())
    }

    /// Edge ids as a set, for order-free comparisons.
    pub fn id_set(&self) -> HashSet<&str> {
        self.edges.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn to_records(&self) -> Vec<HyperedgeRecord> {
        self.edges
            .iter()
            .map(|e| HyperedgeRecord {
                id: e.id.clone(),
                causes: e.causes.iter().map(|&c| self.entities[c].clone()).collect(),
                effect: self.entities[e.effect].clone(),
                strength: e.strength,
                provenance: e.provenance,
            })
            .collect()
    }

    /// Rebuilds a hypergraph from exported records against a vocabulary.
    pub fn from_records(entities: Vec<String>, records: &[HyperedgeRecord]) -> Result<Self> {
        let mut hg = Self::new(entities);
        let lookup = |hg: &Self, name: &str| {
            hg.entities
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| HypergraphError::UnknownEntity(name.to_string()))
        };
        for r in records {
            let causes = r
                .causes
                .iter()
                .map(|c| lookup(&hg, c))
                .collect::<Result<Vec<_>>>()?;
            let effect = lookup(&hg, &r.effect)?;
            hg.insert(causes, effect, r.strength, r.provenance)?;
        }
        Ok(hg)
    }
}

/// Exported hyperedge: `{id, causes: [names], effect: name, strength, provenance}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperedgeRecord {
    pub id: String,
    pub causes: Vec<String>,
    pub effect: String,
    pub strength: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignFilter {
    #[default]
    Any,
    Impelling,
    Inhibiting,
}

impl std::str::FromStr for SignFilter {
    type Err = HypergraphError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(Self::Any),
            "impelling" => Ok(Self::Impelling),
            "inhibiting" => Ok(Self::Inhibiting),
            other => Err(HypergraphError::InvalidEdge(format!("unknown sign filter {other:?}"))),
        }
    }
}

/// Keeps edges with `|strength| >= min_strength`, at most `max_degree`
/// causes and a matching sign.
pub fn filter_edges(
    hg: &DirectedHypergraph,
    min_strength: f64,
    max_degree: usize,
    sign: SignFilter,
) -> DirectedHypergraph {
    let edges = hg
        .edges
        .iter()
        .filter(|e| e.strength.abs() >= min_strength)
        .filter(|e| e.degree() <= max_degree)
        .filter(|e| match sign {
            SignFilter::Any => true,
            SignFilter::Impelling => e.strength > 0.0,
            SignFilter::Inhibiting => e.strength < 0.0,
        })
        .cloned()
        .collect();
    DirectedHypergraph {
        entities: hg.entities.clone(),
        edges,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("e{i}")).collect()
    }

    fn fixture() -> DirectedHypergraph {
        let mut hg = DirectedHypergraph::new(names(4));
        let p = Provenance::default();
        hg.insert(vec![1], 0, 0.6, p).unwrap();
        hg.insert(vec![2], 0, -0.3, p).unwrap();
        hg.insert(vec![1, 2], 3, 0.9, p).unwrap();
        hg
    }

    #[test]
    fn edge_id_is_order_free_and_effect_sensitive() {
        assert_eq!(edge_id(&["b", "a"], "h"), edge_id(&["a", "b"], "h"));
        assert_ne!(edge_id(&["a", "b"], "h"), edge_id(&["a", "b"], "g"));
        assert_ne!(edge_id(&["ab"], "h"), edge_id(&["a", "b"], "h"));
        assert_eq!(edge_id(&["a"], "h").len(), 16);
    }

    #[test]
    fn insert_validates() {
        let mut hg = DirectedHypergraph::new(names(3));
        let p = Provenance::default();
        assert!(hg.insert(vec![], 0, 0.5, p).is_err());
        assert!(hg.insert(vec![0], 0, 0.5, p).is_err());
        assert!(hg.insert(vec![1], 0, 0.0, p).is_err());
        assert!(hg.insert(vec![1], 0, 1.5, p).is_err());
        assert!(hg.insert(vec![1], 7, 0.5, p).is_err());
        let e = hg.insert(vec![2, 1, 2], 0, -0.5, p).unwrap();
        assert_eq!(e.causes, vec![1, 2]);
        assert!(hg.insert(vec![1, 2], 0, 0.2, p).is_err());
    }

    #[test]
    fn filter_examples() {
        let hg = fixture();
        assert!(filter_edges(&hg, 1.1, usize::MAX, SignFilter::Any).is_empty());
        let imp = filter_edges(&hg, 0.0, usize::MAX, SignFilter::Impelling);
        assert!(imp.edges.iter().all(|e| e.strength > 0.0));
        assert_eq!(imp.len(), 2);
        let individual = filter_edges(&hg, 0.0, 1, SignFilter::Any);
        assert_eq!(individual.len(), 2);
        assert!(individual.edges.iter().all(|e| e.degree() == 1));
    }

    #[test]
    fn records_round_trip() {
        let hg = fixture();
        let json = serde_json::to_string(&hg.to_records()).unwrap();
        let records: Vec<HyperedgeRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(DirectedHypergraph::from_records(names(4), &records).unwrap(), hg);
    }

    proptest! {
        #[test]
        fn filter_idempotent_and_monotone(
            strengths in proptest::collection::vec(-1.0f64..1.0, 1..12),
            lo in 0.0f64..1.0,
            bump in 0.0f64..0.5,
            degree in 1usize..4,
        ) {
            let mut hg = DirectedHypergraph::new(names(5));
            for (i, s) in strengths.iter().enumerate() {
                if *s == 0.0 { continue; }
                let causes: Vec<usize> = (1..=1 + i % 3).collect();
                let _ = hg.insert(causes, 0, *s, Provenance::default());
            }
            let once = filter_edges(&hg, lo, degree, SignFilter::Any);
            let twice = filter_edges(&once, lo, degree, SignFilter::Any);
            prop_assert_eq!(&once, &twice);
            let stricter = filter_edges(&hg, lo + bump, degree, SignFilter::Any);
            prop_assert!(stricter.id_set().is_subset(&once.id_set()));
        }
    }
}
