use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_permutation, LayoutError, Partition, Result};
use crate::embeddings::EmbeddingTable;
use crate::event_store::EntityId;
use crate::hypergraph::AggregatedGroup;

#[derive(Debug, Clone, Copy)]
pub enum RowStrategy<'a> {
    /// Ascending entity id.
    Base,
    /// Largest community first; inside a community, closest to the
    /// community centroid first.
    Groups {
        partition: &'a Partition,
        embeddings: Option<&'a EmbeddingTable>,
    },
    Alphabetical,
    Manual(&'a [EntityId]),
}

impl RowStrategy<'_> {
    pub fn tag(&self) -> &'static str {
        match self {
            RowStrategy::Base => "base",
            RowStrategy::Groups { .. } => "groups",
            RowStrategy::Alphabetical => "alphabetical",
            RowStrategy::Manual(_) => "manual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowOrder {
    pub strategy: String,
    /// Entity ids, top row first.
    pub permutation: Vec<EntityId>,
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb))
}

/// Similarity of each entity to the centroid of its community.
fn centroid_similarity(partition: &Partition, table: &EmbeddingTable) -> Vec<f64> {
    let n = partition.community.len();
    let k = partition.num_communities();
    let dim = table.dimension();
    let mut centroids = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for v in 0..n {
        if table.is_trained(v) {
            let c = partition.community[v];
            sizes[c] += 1;
            for (acc, x) in centroids[c].iter_mut().zip(table.vector(v).unwrap_or(&[])) {
                *acc += x;
            }
        }
    }
    (0..n)
        .map(|v| {
            let c = partition.community[v];
            table
                .vector(v)
                .and_then(|x| cosine(x, &centroids[c]))
                .filter(|_| sizes[c] > 0)
                .unwrap_or(f64::NEG_INFINITY)
        })
        .collect()
}

pub fn order_rows(names: &[String], strategy: RowStrategy<'_>) -> Result<RowOrder> {
    let n = names.len();
    let mut perm: Vec<EntityId> = (0..n).collect();
    match strategy {
        RowStrategy::Base => {}
        RowStrategy::Alphabetical => perm.sort_by(|&a, &b| names[a].cmp(&names[b]).then(a.cmp(&b))),
        RowStrategy::Manual(given) => {
            check_permutation(given, n)?;
            perm = given.to_vec();
        }
        RowStrategy::Groups {
            partition,
            embeddings,
        } => {
            if partition.community.len() != n {
                return Err(LayoutError::PartitionMismatch {
                    got: partition.community.len(),
                    expected: n,
                });
            }
            let sizes = partition.sizes();
            let smallest_member = {
                let mut m = vec![usize::MAX; sizes.len()];
                for (v, &c) in partition.community.iter().enumerate() {
                    m[c] = m[c].min(v);
                }
                m
            };
            let sim = match embeddings {
                Some(t) if t.len() == n => centroid_similarity(partition, t),
                _ => vec![0.0; n],
            };
            perm.sort_by(|&a, &b| {
                let (ca, cb) = (partition.community[a], partition.community[b]);
                sizes[cb]
                    .cmp(&sizes[ca])
                    .then(smallest_member[ca].cmp(&smallest_member[cb]))
                    .then(sim[b].total_cmp(&sim[a]))
                    .then(a.cmp(&b))
            });
        }
    }
    Ok(RowOrder {
        strategy: strategy.tag().to_string(),
        permutation: perm,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum ColumnStrategy<'a> {
    /// Ascending effect id.
    Direction,
    /// Descending largest member |strength|.
    Strength,
    /// Ascending cause-set size.
    Degree,
    /// Groups touching `focus` (as cause, then as effect) first.
    Topology { focus: EntityId },
    Manual(&'a [usize]),
}

impl ColumnStrategy<'_> {
    pub fn tag(&self) -> &'static str {
        match self {
            ColumnStrategy::Direction => "direction",
            ColumnStrategy::Strength => "strength",
            ColumnStrategy::Degree => "degree",
            ColumnStrategy::Topology { .. } => "topology",
            ColumnStrategy::Manual(_) => "manual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOrder {
    pub strategy: String,
    /// Group indices, leftmost column first.
    pub permutation: Vec<usize>,
}

/// Orders aggregated groups into columns. `num_entities` bounds the focus id.
/// All sorts are stable, so equal keys keep their input order.
pub fn order_columns(
    groups: &[AggregatedGroup],
    num_entities: usize,
    strategy: ColumnStrategy<'_>,
) -> Result<ColumnOrder> {
    let mut perm: Vec<usize> = (0..groups.len()).collect();
    let by_effect = |a: &usize, b: &usize| groups[*a].effect.cmp(&groups[*b].effect);
    match strategy {
        ColumnStrategy::Direction => perm.sort_by(by_effect),
        ColumnStrategy::Strength => perm.sort_by(|a, b| {
            groups[*b]
                .max_strength()
                .total_cmp(&groups[*a].max_strength())
                .then_with(|| by_effect(a, b))
        }),
        ColumnStrategy::Degree => perm.sort_by(|a, b| {
            groups[*a]
                .degree()
                .cmp(&groups[*b].degree())
                .then_with(|| by_effect(a, b))
        }),
        ColumnStrategy::Topology { focus } => {
            if focus >= num_entities {
                return Err(LayoutError::UnknownEntity(focus));
            }
            let rank = |g: &AggregatedGroup| {
                if g.touches_as_cause(focus) {
                    0
                } else if g.effect == focus {
                    1
                } else {
                    2
                }
            };
            perm.sort_by(|a, b| match rank(&groups[*a]).cmp(&rank(&groups[*b])) {
                Ordering::Equal => by_effect(a, b),
                o => o,
            });
        }
        ColumnStrategy::Manual(given) => {
            check_permutation(given, groups.len())?;
            perm = given.to_vec();
        }
    }
    Ok(ColumnOrder {
        strategy: strategy.tag().to_string(),
        permutation: perm,
    })
}
