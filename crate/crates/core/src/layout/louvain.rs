//! Louvain community detection on the undirected projection of a causal
//! graph. Edge weight between `u` and `v` is `|e_uv| + |e_vu|`; self
//! influence is ignored.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::event_store::EntityId;
use crate::rpp::CausalGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Community id per entity, numbered by first appearance in id order.
    pub community: Vec<usize>,
    pub modularity: f64,
    /// Modularity after each pass, starting with the singleton partition.
    pub history: Vec<f64>,
}

impl Partition {
    pub fn num_communities(&self) -> usize {
        self.community.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.num_communities()];
        for &c in &self.community {
            s[c] += 1;
        }
        s
    }

    pub fn members(&self, c: usize) -> Vec<EntityId> {
        (0..self.community.len())
            .filter(|&v| self.community[v] == c)
            .collect()
    }
}

/// Symmetric weight matrix of the undirected projection.
fn projection(graph: &CausalGraph) -> Vec<Vec<f64>> {
    let n = graph.num_nodes;
    let mut w = vec![vec![0.0; n]; n];
    for e in graph.edges.iter().filter(|e| e.cause != e.effect) {
        let s = e.strength.abs();
        w[e.cause][e.effect] += s;
        w[e.effect][e.cause] += s;
    }
    w
}

fn matrix_modularity(w: &[Vec<f64>], community: &[usize]) -> f64 {
    let two_m: f64 = w.iter().flatten().sum();
    if two_m <= 0.0 {
        return 0.0;
    }
    let k: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let mut q = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            if community[i] == community[j] {
                q += w[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Modularity of `community` on the undirected projection of `graph`.
pub fn modularity(graph: &CausalGraph, community: &[usize]) -> f64 {
    matrix_modularity(&projection(graph), community)
}

fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// One round of local moves. Returns the node -> community assignment and
/// whether anything moved.
fn local_moves(w: &[Vec<f64>], order: &[usize]) -> (Vec<usize>, bool) {
    let n = w.len();
    let k: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = k.clone();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &i in order {
            let old = comm[i];
            tot[old] -= k[i];
            let mut links = std::collections::BTreeMap::new();
            links.insert(old, 0.0);
            for j in 0..n {
                if j != i && w[i][j] > 0.0 {
                    *links.entry(comm[j]).or_insert(0.0) += w[i][j];
                }
            }
            let gain = |c: usize, kic: f64| kic - tot[c] * k[i] / two_m;
            let mut best = old;
            let mut best_gain = gain(old, links[&old]);
            for (&c, &kic) in &links {
                let g = gain(c, kic);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += k[i];
            if best != old {
                comm[i] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    (relabel(&comm), moved_any)
}

fn collapse(w: &[Vec<f64>], comm: &[usize]) -> Vec<Vec<f64>> {
    let k = comm.iter().max().map_or(0, |&m| m + 1);
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..w.len() {
        for j in 0..w.len() {
            out[comm[i]][comm[j]] += w[i][j];
        }
    }
    out
}

/// Louvain passes until a pass moves no node. The node visiting order of
/// each pass is a seeded shuffle.
pub fn communities_louvain(graph: &CausalGraph, seed: u64) -> Partition {
    let n = graph.num_nodes;
    let mut w = projection(graph);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut history = vec![matrix_modularity(&w, &(0..n).collect::<Vec<_>>())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let has_edges = w.iter().flatten().any(|&x| x > 0.0);

    while has_edges {
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.shuffle(&mut rng);
        let (comm, moved) = local_moves(&w, &order);
        if !moved {
            break;
        }
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        w = collapse(&w, &comm);
        history.push(matrix_modularity(&w, &(0..w.len()).collect::<Vec<_>>()));
    }

    let community = relabel(&membership);
    Partition {
        modularity: *history.last().expect("history starts non-empty"),
        community,
        history,
    }
}
