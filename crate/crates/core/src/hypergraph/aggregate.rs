//! AND/OR aggregation of hyperedges sharing an effect.
//!
//! Edges into one effect whose cause sets share a common core and differ in
//! exactly one element form a family: the core is the AND part, the
//! differing elements the OR alternatives. Families are formed greedily,
//! largest first, ties broken by the lexicographically smallest core.
//! Every edge lands in exactly one group.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{DirectedHypergraph, Hyperedge};
use crate::event_store::EntityId;

/// Pie glyph sector for one member edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub edge_id: String,
    pub impelling: bool,
    pub magnitude: f64,
    /// Radians; sectors of a group sum to a full turn.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedGroup {
    pub and_core: Vec<EntityId>,
    pub or_set: Vec<EntityId>,
    pub effect: EntityId,
    /// Member edges; with a non-empty OR set, member `k` has causes
    /// `and_core + {or_set[k]}`.
    pub members: Vec<Hyperedge>,
    pub sectors: Vec<Sector>,
}

impl AggregatedGroup {
    fn new(and_core: Vec<EntityId>, or_set: Vec<EntityId>, effect: EntityId, members: Vec<Hyperedge>) -> Self {
        let total: f64 = members.iter().map(|e| e.strength.abs()).sum();
        let sectors = members
            .iter()
            .map(|e| Sector {
                edge_id: e.id.clone(),
                impelling: e.strength > 0.0,
                magnitude: e.strength.abs(),
                angle: if total > 0.0 {
                    TAU * e.strength.abs() / total
                } else {
                    0.0
                },
            })
            .collect();
        Self {
            and_core,
            or_set,
            effect,
            members,
            sectors,
        }
    }

    pub fn max_strength(&self) -> f64 {
        self.members
            .iter()
            .map(|e| e.strength.abs())
            .fold(0.0, f64::max)
    }

    /// Size of the largest member cause set.
    pub fn degree(&self) -> usize {
        self.and_core.len() + usize::from(!self.or_set.is_empty())
    }

    pub fn touches_as_cause(&self, entity: EntityId) -> bool {
        self.and_core.contains(&entity) || self.or_set.contains(&entity)
    }
}

pub fn aggregate(hg: &DirectedHypergraph) -> Vec<AggregatedGroup> {
    let mut by_effect: BTreeMap<EntityId, Vec<&Hyperedge>> = BTreeMap::new();
    for e in &hg.edges {
        by_effect.entry(e.effect).or_default().push(e);
    }

    let mut groups = Vec::new();
    for (effect, mut remaining) in by_effect {
        loop {
            let mut families: BTreeMap<Vec<EntityId>, Vec<usize>> = BTreeMap::new();
            for (idx, e) in remaining.iter().enumerate() {
                for skip in 0..e.causes.len() {
                    let core: Vec<EntityId> = e
                        .causes
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &c)| c)
                        .collect();
                    families.entry(core).or_default().push(idx);
                }
            }
            // BTreeMap iterates cores in lexicographic order, so the first
            // maximum found is the tie winner.
            let best = families
                .into_iter()
                .fold(None::<(Vec<EntityId>, Vec<usize>)>, |best, (core, members)| match best {
                    Some(b) if b.1.len() >= members.len() => Some(b),
                    _ => Some((core, members)),
                });
            let Some((core, member_idx)) = best.filter(|(_, m)| m.len() >= 2) else {
                break;
            };

            let mut members: Vec<Hyperedge> = member_idx.iter().map(|&i| remaining[i].clone()).collect();
            let extra = |e: &Hyperedge| {
                *e.causes
                    .iter()
                    .find(|c| !core.contains(c))
                    .expect("member has exactly one cause outside the core")
            };
            members.sort_by_key(|e| extra(e));
            let or_set = members.iter().map(|e| extra(e)).collect();
            let taken: std::collections::HashSet<usize> = member_idx.into_iter().collect();
            remaining = remaining
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .map(|(_, e)| e)
                .collect();
            groups.push(AggregatedGroup::new(core, or_set, effect, members));
        }
        remaining.sort_by(|a, b| a.causes.cmp(&b.causes));
        for e in remaining {
            groups.push(AggregatedGroup::new(e.causes.clone(), Vec::new(), effect, vec![e.clone()]));
        }
    }
    groups
}

/// Recovers the member edges of every group.
pub fn expand(entities: Vec<String>, groups: &[AggregatedGroup]) -> DirectedHypergraph {
    DirectedHypergraph {
        entities,
        edges: groups.iter().flat_map(|g| g.members.iter().cloned()).collect(),
    }
}
