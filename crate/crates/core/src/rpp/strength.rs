//! Signed causal strength by majority vote over basis coefficients.

use serde::{Deserialize, Serialize};

use super::{Result, RppError, RppParams};
use crate::event_store::EntityId;
use crate::scalar::Real;

/// Strength of `cause` on `effect` in `[-1, 1]`.
///
/// The net coefficients `c_m = a_m + b_m` of the influence of `cause` on
/// `effect` are split into positive (`> eps`), negative (`< -eps`) and zero
/// sets. The largest set wins; a size tie goes to the larger mean `|c_m|`,
/// and a remaining tie to the zero set. The strength is the mean `c_m` over
/// the winning set, or 0 when the zero set wins.
pub fn causal_strength<T: Real>(params: &RppParams<T>, cause: EntityId, effect: EntityId, eps: T) -> T {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut zero = Vec::new();
    for m in 0..params.num_bases() {
        let c = params.net(effect, cause, m);
        if c > eps {
            pos.push(c);
        } else if c < -eps {
            neg.push(c);
        } else {
            zero.push(c);
        }
    }
    let mean_abs = |v: &[T]| {
        if v.is_empty() {
            T::zero()
        } else {
            v.iter().map(|x| x.abs()).sum::<T>() / T::of(v.len() as f64)
        }
    };
    let mean = |v: &[T]| v.iter().copied().sum::<T>() / T::of(v.len() as f64);

    // Zero set first so that it survives a full tie.
    let sets = [(&zero, true), (&pos, false), (&neg, false)];
    let mut best = 0;
    for (i, (set, _)) in sets.iter().enumerate().skip(1) {
        let (best_set, _) = sets[best];
        let better = set.len() > best_set.len()
            || (set.len() == best_set.len() && mean_abs(set) > mean_abs(best_set));
        if better {
            best = i;
        }
    }
    let (winner, is_zero) = sets[best];
    if is_zero || winner.is_empty() {
        T::zero()
    } else {
        mean(winner).max(-T::one()).min(T::one())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalEdge {
    pub cause: EntityId,
    pub effect: EntityId,
    /// Positive for impelling, negative for inhibiting influence.
    pub strength: f64,
}

/// One-to-one causal graph: at most one edge per ordered pair, all with
/// `|strength| >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalGraph {
    pub num_nodes: usize,
    pub edges: Vec<CausalEdge>,
    pub threshold: f64,
}

impl CausalGraph {
    pub fn new(num_nodes: usize, edges: Vec<CausalEdge>, threshold: f64) -> Self {
        Self {
            num_nodes,
            edges,
            threshold,
        }
    }

    pub fn strength(&self, cause: EntityId, effect: EntityId) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.cause == cause && e.effect == effect)
            .map(|e| e.strength)
    }

    /// Causes of `effect` other than itself.
    pub fn causes_of(&self, effect: EntityId) -> impl Iterator<Item = EntityId> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.effect == effect && e.cause != effect)
            .map(|e| e.cause)
    }
}

/// Keeps every ordered pair, self-influence included, with `|e| >= threshold`.
pub fn build_causal_graph<T: Real>(params: &RppParams<T>, threshold: T, eps: T) -> Result<CausalGraph> {
    if !(threshold > T::zero()) {
        return Err(RppError::InvalidConfig(format!(
            "strength threshold must be positive, got {threshold}"
        )));
    }
    let u = params.num_entities();
    let mut edges = Vec::new();
    for cause in 0..u {
        for effect in 0..u {
            let e = causal_strength(params, cause, effect, eps);
            if e.abs() >= threshold {
                edges.push(CausalEdge {
                    cause,
                    effect,
                    strength: e.as_f64(),
                });
            }
        }
    }
    Ok(CausalGraph::new(u, edges, threshold.as_f64()))
}
