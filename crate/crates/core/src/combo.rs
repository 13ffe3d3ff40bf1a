//! Combined-cause discovery.
//!
//! For every combination size from 2 to `max_size`, each candidate cause set
//! is tested against the effects it may still explain:
//!
//! * a set is never a candidate for an effect one of its members already
//!   causes individually, nor for an effect already explained by one of its
//!   subsets;
//! * sets whose members are dissimilar or rarely co-occur are moved to the
//!   filter set, from which sets that are both similar and frequently
//!   co-occurring are recruited back;
//! * surviving sets are collapsed into a tied entity (one event per window in
//!   which all members occur), the model is refit on the rewritten corpus and
//!   the tied entity's strength on each effect decides the hyperedge.
//!
//! Hyperedges found at one size level gate the next level, so levels run in
//! sequence while the combinations inside a level are evaluated in parallel.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{similarity, EmbeddingTable};
use crate::event_store::{CooccurrenceMatrix, Corpus, EntityId, Event, EventSequence};
use crate::hypergraph::{DirectedHypergraph, HypergraphError, Provenance};
use crate::rpp::{self, causal_strength, BasisKernels, CausalGraph, FitConfig, RppError, RppParams};

#[derive(Debug, Error)]
pub enum ComboError {
    #[error("invalid combination rules: {0}")]
    InvalidConfig(String),

    #[error("fit failed for combination {combo}: {source}")]
    Fit {
        combo: String,
        #[source]
        source: RppError,
    },

    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),

    #[error("inputs disagree: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, ComboError>;

/// A cause set (sorted, at least two members) paired with an effect outside it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Combo {
    pub members: Vec<EntityId>,
    pub effect: EntityId,
}

impl Combo {
    pub fn new(mut members: Vec<EntityId>, effect: EntityId) -> Option<Self> {
        members.sort_unstable();
        members.dedup();
        (members.len() >= 2 && !members.contains(&effect)).then_some(Self { members, effect })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComboRuleConfig {
    /// Largest combination size searched.
    pub max_size: usize,
    /// Eliminate when the least similar member pair is below this.
    pub min_similarity: f64,
    /// Eliminate when the least co-occurring member pair is below this.
    pub min_cooccurrence: u64,
    /// Recruit back when every member pair reaches this similarity ...
    pub recruit_similarity: f64,
    /// ... and this co-occurrence count.
    pub recruit_cooccurrence: u64,
    /// Span within which all members must occur to form a tied event.
    pub tie_window: f64,
}

impl Default for ComboRuleConfig {
    fn default() -> Self {
        Self {
            max_size: 3,
            min_similarity: 0.1,
            min_cooccurrence: 3,
            recruit_similarity: 0.6,
            recruit_cooccurrence: 10,
            tie_window: 1.0,
        }
    }
}

impl ComboRuleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ComboError::InvalidConfig(m.to_string()));
        if self.max_size < 1 {
            return bad("max_size must be at least 1");
        }
        if self.recruit_similarity < self.min_similarity {
            return bad("recruit_similarity must be >= min_similarity");
        }
        if self.recruit_cooccurrence < self.min_cooccurrence {
            return bad("recruit_cooccurrence must be >= min_cooccurrence");
        }
        if !(self.tie_window >= 0.0) || !self.tie_window.is_finite() {
            return bad("tie_window must be a non-negative finite number");
        }
        Ok(())
    }
}

/// Combinations currently filtered out of the search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterSet {
    pub combos: BTreeSet<Combo>,
}

impl FilterSet {
    pub fn contains(&self, c: &Combo) -> bool {
        self.combos.contains(c)
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }
}

/// Binomial coefficient `n choose k`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `size`-subsets of `items`, in lexicographic order.
pub fn combinations(items: &[EntityId], size: usize) -> Vec<Vec<EntityId>> {
    fn rec(items: &[EntityId], size: usize, start: usize, cur: &mut Vec<EntityId>, out: &mut Vec<Vec<EntityId>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let need = size - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            if items.len() < need {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size == 0 || size > items.len() {
        return out;
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

fn is_subset(small: &[EntityId], big: &[EntityId]) -> bool {
    small.iter().all(|x| big.contains(x))
}

/// Whether the redundancy principles allow `members` as a cause set of `effect`.
fn admissible(graph: &CausalGraph, discovered: &DirectedHypergraph, members: &[EntityId], effect: EntityId) -> bool {
    !members.contains(&effect)
        && !graph.causes_of(effect).any(|c| members.contains(&c))
        && !discovered
            .cause_sets_of(effect)
            .any(|set| set.len() < members.len() && is_subset(set, members))
}

/// Size-`size` cause sets for `effect` that survive the redundancy
/// principles: no member is already an individual cause of `effect`, and no
/// already discovered cause set of `effect` is contained in the combination.
pub fn candidate_combos(
    graph: &CausalGraph,
    discovered: &DirectedHypergraph,
    effect: EntityId,
    size: usize,
) -> Vec<Combo> {
    let others: Vec<EntityId> = (0..graph.num_nodes).filter(|&v| v != effect).collect();
    combinations(&others, size)
        .into_iter()
        .filter(|m| admissible(graph, discovered, m, effect))
        .map(|members| Combo { members, effect })
        .collect()
}

fn pairs(members: &[EntityId]) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
    members
        .iter()
        .enumerate()
        .flat_map(move |(i, &a)| members[i + 1..].iter().map(move |&b| (a, b)))
}

/// Least pairwise similarity; untrained entities count as -1.
pub fn min_pairwise_similarity(members: &[EntityId], sims: &EmbeddingTable) -> f64 {
    pairs(members)
        .map(|(a, b)| similarity(sims, a, b).unwrap_or(-1.0))
        .fold(f64::INFINITY, f64::min)
}

pub fn min_pairwise_cooccurrence(members: &[EntityId], cooc: &CooccurrenceMatrix) -> u64 {
    pairs(members).map(|(a, b)| cooc.get(a, b)).min().unwrap_or(0)
}

/// True when the combination should be filtered out.
pub fn eliminate_rule(combo: &Combo, sims: &EmbeddingTable, cooc: &CooccurrenceMatrix, cfg: &ComboRuleConfig) -> bool {
    min_pairwise_similarity(&combo.members, sims) < cfg.min_similarity
        || min_pairwise_cooccurrence(&combo.members, cooc) < cfg.min_cooccurrence
}

/// True when a filtered combination should be searched after all.
pub fn recruit_rule(combo: &Combo, sims: &EmbeddingTable, cooc: &CooccurrenceMatrix, cfg: &ComboRuleConfig) -> bool {
    min_pairwise_similarity(&combo.members, sims) >= cfg.recruit_similarity
        && min_pairwise_cooccurrence(&combo.members, cooc) >= cfg.recruit_cooccurrence
}

/// A corpus rewritten around one tied entity.
#[derive(Debug, Clone, PartialEq)]
pub struct TiedCorpus {
    pub corpus: Corpus,
    /// Id of the tied entity in the rewritten vocabulary (always the last).
    pub tied: EntityId,
    /// Old id -> new id; `None` for combination members.
    pub mapping: Vec<Option<EntityId>>,
}

/// Replaces the members of `members` with a tied entity.
///
/// Sequences are scanned left to right keeping the latest pending event of
/// each member. As soon as every member has a pending event and those
/// events span at most `window`, one tied event is emitted at the current
/// (latest) time and the pending events are consumed. Member events that
/// never complete a tie are dropped.
pub fn tie_entities(corpus: &Corpus, members: &[EntityId], window: f64) -> TiedCorpus {
    let u = corpus.num_entities();
    let mut mapping = vec![None; u];
    let mut names = Vec::with_capacity(u + 1 - members.len());
    for e in &corpus.entities {
        if !members.contains(&e.id) {
            mapping[e.id] = Some(names.len());
            names.push(e.name.clone());
        }
    }
    let mut tied_name = members
        .iter()
        .map(|&m| corpus.entities[m].name.as_str())
        .collect::<Vec<_>>()
        .join("&");
    while names.contains(&tied_name) {
        tied_name.push('#');
    }
    let tied = names.len();
    names.push(tied_name);

    let slot = |id: EntityId| members.iter().position(|&m| m == id);
    let sequences = corpus
        .sequences
        .iter()
        .map(|seq| {
            let mut pending: Vec<Option<f64>> = vec![None; members.len()];
            let mut events = Vec::with_capacity(seq.events.len());
            for ev in &seq.events {
                match slot(ev.entity) {
                    None => events.push(Event {
                        entity: mapping[ev.entity].expect("non-member is mapped"),
                        time: ev.time,
                    }),
                    Some(k) => {
                        pending[k] = Some(ev.time);
                        let complete = pending.iter().all(Option::is_some);
                        if complete {
                            let earliest = pending
                                .iter()
                                .flatten()
                                .fold(f64::INFINITY, |a, &b| a.min(b));
                            if ev.time - earliest <= window {
                                events.push(Event {
                                    entity: tied,
                                    time: ev.time,
                                });
                                pending.iter_mut().for_each(|p| *p = None);
                            }
                        }
                    }
                }
            }
            EventSequence {
                id: seq.id.clone(),
                events,
                horizon: seq.horizon,
            }
        })
        .collect();
    TiedCorpus {
        corpus: Corpus::new(names, sequences).expect("rewriting keeps the corpus valid"),
        tied,
        mapping,
    }
}

/// Per-level accounting of the search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub size: usize,
    /// All `size`-subsets of the vocabulary.
    pub original: u128,
    /// (combination, effect) pairs allowed by the redundancy principles.
    pub admissible: usize,
    /// Pairs moved to the filter set by the elimination rule.
    pub eliminated: usize,
    /// Pairs recruited back from the filter set.
    pub recruited: usize,
    /// Distinct combinations refit.
    pub refits: usize,
    pub hyperedges: usize,
}

#[derive(Debug, Clone)]
pub struct DiscoveryReport {
    pub hypergraph: DirectedHypergraph,
    pub filter_set: FilterSet,
    pub levels: Vec<LevelStats>,
}

/// Everything the search needs besides the rules.
pub struct DiscoveryInput<'a> {
    pub corpus: &'a Corpus,
    pub base_graph: &'a CausalGraph,
    pub base_params: &'a RppParams<f64>,
    pub kernels: &'a BasisKernels<f64>,
    pub embeddings: &'a EmbeddingTable,
    pub cooccurrence: &'a CooccurrenceMatrix,
    pub fit: &'a FitConfig<f64>,
}

struct Job {
    members: Vec<EntityId>,
    effects: Vec<(EntityId, bool)>,
}

fn warm_start(base: &RppParams<f64>, tied: &TiedCorpus) -> RppParams<f64> {
    let u = tied.corpus.num_entities();
    let m = base.num_bases();
    let mut p = RppParams::zeros(u, m);
    let total_time: f64 = tied.corpus.sequences.iter().map(|s| s.horizon).sum();
    let counts = tied.corpus.event_counts();
    p.mu[tied.tied] = (counts[tied.tied] as f64 / total_time).max(1e-3);
    for (old_t, new_t) in tied.mapping.iter().enumerate() {
        let Some(new_t) = *new_t else { continue };
        p.mu[new_t] = base.mu[old_t];
        for (old_s, new_s) in tied.mapping.iter().enumerate() {
            let Some(new_s) = *new_s else { continue };
            for k in 0..m {
                let (src, dst) = (base.index(old_t, old_s, k), p.index(new_t, new_s, k));
                p.a[dst] = base.a[src];
                p.b[dst] = base.b[src];
            }
        }
    }
    p
}

fn combo_label(corpus: &Corpus, members: &[EntityId]) -> String {
    let names: Vec<&str> = members
        .iter()
        .map(|&m| corpus.entities[m].name.as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Runs the level-by-level combination search and returns the hypergraph
/// of individual (size 1) and combined causes.
pub fn discover_combined(input: &DiscoveryInput<'_>, rules: &ComboRuleConfig) -> Result<DiscoveryReport> {
    rules.validate()?;
    let corpus = input.corpus;
    let u = corpus.num_entities();
    if input.base_graph.num_nodes != u
        || input.base_params.num_entities() != u
        || input.embeddings.len() != u
        || input.cooccurrence.len() != u
    {
        return Err(ComboError::Mismatch(
            "corpus, graph, params, embeddings and co-occurrence must share one vocabulary".into(),
        ));
    }
    let threshold = input.base_graph.threshold;
    let eps = input.fit.sign_tolerance;

    let mut hg = DirectedHypergraph::from_causal_graph(input.base_graph, corpus.names())?;
    let mut psi = FilterSet::default();
    let mut levels = Vec::new();
    let all: Vec<EntityId> = (0..u).collect();

    for size in 2..=rules.max_size.min(u.saturating_sub(1)) {
        let mut stats = LevelStats {
            size,
            original: binomial(u, size),
            ..Default::default()
        };
        let mut jobs = Vec::new();
        for members in combinations(&all, size) {
            let mut effects = Vec::new();
            for effect in 0..u {
                if !admissible(input.base_graph, &hg, &members, effect) {
                    continue;
                }
                stats.admissible += 1;
                let combo = Combo {
                    members: members.clone(),
                    effect,
                };
                if !psi.contains(&combo)
                    && eliminate_rule(&combo, input.embeddings, input.cooccurrence, rules)
                {
                    psi.combos.insert(combo.clone());
                    stats.eliminated += 1;
                }
                let mut recruited = false;
                if psi.contains(&combo) {
                    if recruit_rule(&combo, input.embeddings, input.cooccurrence, rules) {
                        psi.combos.remove(&combo);
                        stats.recruited += 1;
                        recruited = true;
                    } else {
                        continue;
                    }
                }
                effects.push((effect, recruited));
            }
            if !effects.is_empty() {
                jobs.push(Job { members, effects });
            }
        }
        stats.refits = jobs.len();

        let results: Vec<Result<Vec<(Vec<EntityId>, EntityId, f64, bool)>>> = jobs
            .par_iter()
            .map(|job| {
                let tied = tie_entities(corpus, &job.members, rules.tie_window);
                if tied.corpus.event_counts()[tied.tied] == 0 {
                    return Ok(Vec::new());
                }
                let start = warm_start(input.base_params, &tied);
                let params = rpp::fit_with_report(&tied.corpus, input.kernels, input.fit, Some(&start))
                    .map_err(|source| ComboError::Fit {
                        combo: combo_label(corpus, &job.members),
                        source,
                    })?
                    .params;
                Ok(job
                    .effects
                    .iter()
                    .filter_map(|&(effect, recruited)| {
                        let target = tied.mapping[effect].expect("effect is not a member");
                        let e = causal_strength(&params, tied.tied, target, eps);
                        (e.abs() >= threshold).then(|| (job.members.clone(), effect, e, recruited))
                    })
                    .collect())
            })
            .collect();

        for found in results {
            for (members, effect, strength, recruited) in found? {
                hg.insert(
                    members,
                    effect,
                    strength.clamp(-1.0, 1.0),
                    Provenance {
                        size_level: size,
                        recruited,
                    },
                )?;
                stats.hyperedges += 1;
            }
        }
        levels.push(stats);
    }

    Ok(DiscoveryReport {
        hypergraph: hg,
        filter_set: psi,
        levels,
    })
}
