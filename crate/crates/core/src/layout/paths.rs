//! Strongest influence paths.
//!
//! Edge distance is `1 - |e|`, so stronger edges are shorter. Among paths
//! of equal distance the one with fewer hops wins, then the
//! lexicographically smaller node sequence.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{LayoutError, Result};
use crate::hypergraph::DirectedHypergraph;
use crate::rpp::CausalGraph;

/// Directed graph with signed strengths. Nodes past the entity range are
/// pseudo-nodes standing for combined causes.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraph {
    pub labels: Vec<String>,
    pub num_entities: usize,
    /// Outgoing `(target, strength)` per node, sorted by target.
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

impl SignedDigraph {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            num_entities: n,
            adjacency: vec![Vec::new(); n],
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Adds or replaces `from -> to`; self loops are ignored.
    pub fn add_edge(&mut self, from: usize, to: usize, strength: f64) {
        if from == to {
            return;
        }
        let row = &mut self.adjacency[from];
        match row.binary_search_by_key(&to, |&(t, _)| t) {
            Ok(i) => row[i].1 = strength,
            Err(i) => row.insert(i, (to, strength)),
        }
    }

    fn add_node(&mut self, label: String) -> usize {
        self.labels.push(label);
        self.adjacency.push(Vec::new());
        self.labels.len() - 1
    }

    pub fn strength(&self, from: usize, to: usize) -> Option<f64> {
        let row = self.adjacency.get(from)?;
        row.binary_search_by_key(&to, |&(t, _)| t).ok().map(|i| row[i].1)
    }

    pub fn from_causal_graph(graph: &CausalGraph, labels: Vec<String>) -> Self {
        let mut g = Self::new(labels);
        for e in &graph.edges {
            g.add_edge(e.cause, e.effect, e.strength);
        }
        g
    }

    /// Individual edges as direct links; each combined cause becomes a
    /// pseudo-node fed by its members at full strength and pointing at the
    /// effect with the hyperedge's strength.
    pub fn from_hypergraph(hg: &DirectedHypergraph) -> Self {
        let mut g = Self::new(hg.entities.clone());
        for e in &hg.edges {
            if let [cause] = e.causes[..] {
                g.add_edge(cause, e.effect, e.strength);
            }
        }
        for e in hg.edges.iter().filter(|e| e.causes.len() > 1) {
            let label = e
                .causes
                .iter()
                .map(|&c| hg.entities[c].as_str())
                .collect::<Vec<_>>()
                .join("&");
            let pseudo = g.add_node(label);
            for &c in &e.causes {
                g.add_edge(c, pseudo, 1.0);
            }
            g.add_edge(pseudo, e.effect, e.strength);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub nodes: Vec<usize>,
    /// Signed strength of each hop.
    pub strengths: Vec<f64>,
    pub distance: f64,
}

impl PropagationPath {
    pub fn hops(&self) -> usize {
        self.strengths.len()
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.hops().cmp(&other.hops()))
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathResult {
    Reachable(PropagationPath),
    Unreachable,
}

impl PathResult {
    pub fn path(&self) -> Option<&PropagationPath> {
        match self {
            PathResult::Reachable(p) => Some(p),
            PathResult::Unreachable => None,
        }
    }
}

fn check_node(g: &SignedDigraph, v: usize) -> Result<()> {
    if v < g.len() {
        Ok(())
    } else {
        Err(LayoutError::UnknownEntity(v))
    }
}

/// Label-setting search over full path labels, so ties resolve exactly as
/// `PropagationPath::cmp_key` orders them.
fn shortest(
    g: &SignedDigraph,
    source: usize,
    target: usize,
    banned_nodes: &[bool],
    banned_edges: &HashSet<(usize, usize)>,
) -> Option<PropagationPath> {
    let n = g.len();
    let mut best: Vec<Option<PropagationPath>> = vec![None; n];
    let mut done = vec![false; n];
    best[source] = Some(PropagationPath {
        nodes: vec![source],
        strengths: Vec::new(),
        distance: 0.0,
    });
    loop {
        let next = (0..n)
            .filter(|&v| !done[v])
            .filter_map(|v| best[v].as_ref().map(|p| (v, p)))
            .min_by(|a, b| a.1.cmp_key(b.1))
            .map(|(v, _)| v)?;
        done[next] = true;
        if next == target {
            return best[target].take();
        }
        let here = best[next].clone().expect("settled node has a label");
        for &(to, s) in &g.adjacency[next] {
            if done[to] || banned_nodes[to] || banned_edges.contains(&(next, to)) {
                continue;
            }
            let mut cand = here.clone();
            cand.nodes.push(to);
            cand.strengths.push(s);
            cand.distance += 1.0 - s.abs();
            if best[to].as_ref().is_none_or(|b| cand.cmp_key(b) == Ordering::Less) {
                best[to] = Some(cand);
            }
        }
    }
}

pub fn propagation_path(g: &SignedDigraph, source: usize, target: usize) -> Result<PathResult> {
    check_node(g, source)?;
    check_node(g, target)?;
    let none = vec![false; g.len()];
    Ok(match shortest(g, source, target, &none, &HashSet::new()) {
        Some(p) => PathResult::Reachable(p),
        None => PathResult::Unreachable,
    })
}

/// Up to `k` loopless paths in increasing order (Yen's algorithm).
pub fn k_shortest_paths(g: &SignedDigraph, source: usize, target: usize, k: usize) -> Result<Vec<PropagationPath>> {
    check_node(g, source)?;
    check_node(g, target)?;
    let mut found: Vec<PropagationPath> = Vec::new();
    let none = vec![false; g.len()];
    let Some(first) = shortest(g, source, target, &none, &HashSet::new()) else {
        return Ok(found);
    };
    found.push(first);
    let mut candidates: Vec<PropagationPath> = Vec::new();

    while found.len() < k {
        let last = found.last().expect("non-empty").clone();
        for spur_idx in 0..last.nodes.len().saturating_sub(1) {
            let spur = last.nodes[spur_idx];
            let root = &last.nodes[..=spur_idx];
            let mut banned_edges = HashSet::new();
            for p in &found {
                if p.nodes.len() > spur_idx + 1 && p.nodes[..=spur_idx] == *root {
                    banned_edges.insert((p.nodes[spur_idx], p.nodes[spur_idx + 1]));
                }
            }
            let mut banned_nodes = vec![false; g.len()];
            for &v in &root[..spur_idx] {
                banned_nodes[v] = true;
            }
            if let Some(tail) = shortest(g, spur, target, &banned_nodes, &banned_edges) {
                let mut path = PropagationPath {
                    nodes: root.to_vec(),
                    strengths: last.strengths[..spur_idx].to_vec(),
                    distance: 0.0,
                };
                path.nodes.extend_from_slice(&tail.nodes[1..]);
                path.strengths.extend_from_slice(&tail.strengths);
                path.distance = path.strengths.iter().map(|s| 1.0 - s.abs()).sum();
                if !candidates.iter().chain(&found).any(|p| p.nodes == path.nodes) {
                    candidates.push(path);
                }
            }
        }
        let Some(pos) = candidates
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp_key(b.1))
            .map(|(i, _)| i)
        else {
            break;
        };
        found.push(candidates.swap_remove(pos));
    }
    Ok(found)
}

/// Layers of the union of `paths`: BFS depth from `source`, ids ascending
/// within a layer.
pub fn layered_layout(paths: &[PropagationPath], source: usize) -> Vec<Vec<usize>> {
    let mut nodes = BTreeSet::from([source]);
    let mut edges = BTreeSet::new();
    for p in paths {
        nodes.extend(p.nodes.iter().copied());
        edges.extend(p.nodes.windows(2).map(|w| (w[0], w[1])));
    }
    let mut depth = std::collections::BTreeMap::from([(source, 0usize)]);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for &(_, to) in edges.range((v, 0)..=(v, usize::MAX)) {
            if !depth.contains_key(&to) {
                depth.insert(to, d + 1);
                queue.push_back(to);
            }
        }
    }
    let layers = depth.values().max().map_or(0, |&m| m + 1);
    let mut out = vec![Vec::new(); layers];
    for (v, d) in depth {
        out[d].push(v);
    }
    out
}
