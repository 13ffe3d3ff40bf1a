//! Skip-gram entity embeddings with negative sampling.
//!
//! Each sequence is treated as a token stream of entity ids; the context of a
//! position is the `radius` events on either side of it. Training is
//! single-threaded and fully determined by the seed.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_store::{Corpus, EntityId};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("similarity undefined for one entity")]
    SingleEntity,

    #[error("corpus has no events")]
    EmptyCorpus,

    #[error("untrained entity {0}")]
    Untrained(EntityId),

    #[error("unknown entity id {0}")]
    UnknownEntity(EntityId),

    #[error("invalid skip-gram config: {0}")]
    InvalidConfig(String),

    #[error("embedding table does not match the vocabulary: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EmbeddingError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dimension: usize,
    /// Context radius, counted in events.
    pub radius: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            dimension: 32,
            radius: 2,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if self.dimension < 2 {
            return bad("dimension must be at least 2");
        }
        if self.radius == 0 {
            return bad("radius must be positive");
        }
        if self.negatives == 0 {
            return bad("negatives must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// One vector per entity, indexed by entity id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub names: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dimension(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, id: EntityId) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn is_trained(&self, id: EntityId) -> bool {
        self.vector(id).is_some_and(|v| v.iter().any(|x| *x != 0.0))
    }

    /// Serializes as `{entity_name: [floats]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<&str, &Vec<f64>> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(&self.vectors)
            .collect();
        serde_json::to_value(map).expect("finite floats serialize")
    }

    /// Reads `{entity_name: [floats]}` and orders the rows by `names`.
    pub fn from_json(value: &serde_json::Value, names: &[String]) -> Result<Self> {
        let mut map: BTreeMap<String, Vec<f64>> = serde_json::from_value(value.clone())?;
        let mut vectors = Vec::with_capacity(names.len());
        for name in names {
            let v = map
                .remove(name)
                .ok_or_else(|| EmbeddingError::Mismatch(format!("no vector for {name:?}")))?;
            vectors.push(v);
        }
        if let Some(extra) = map.keys().next() {
            return Err(EmbeddingError::Mismatch(format!("unexpected entity {extra:?}")));
        }
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(EmbeddingError::Mismatch("ragged vectors".into()));
        }
        Ok(Self {
            names: names.to_vec(),
            vectors,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Trains skip-gram vectors over the corpus' event streams.
pub fn train_embeddings(corpus: &Corpus, config: &SkipGramConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    let u = corpus.num_entities();
    if u < 2 {
        return Err(EmbeddingError::SingleEntity);
    }
    let counts = corpus.event_counts();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(EmbeddingError::EmptyCorpus);
    }

    let dim = config.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<Vec<f64>> = (0..u)
        .map(|_| {
            (0..dim)
                .map(|_| (rng.gen::<f64>() - 0.5) / dim as f64)
                .collect()
        })
        .collect();
    let mut output = vec![vec![0.0; dim]; u];

    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights).expect("at least one entity has events");

    let streams: Vec<Vec<EntityId>> = corpus
        .sequences
        .iter()
        .map(|s| s.events.iter().map(|e| e.entity).collect())
        .collect();
    let steps_per_epoch: usize = streams.iter().map(Vec::len).sum();
    let total_steps = (steps_per_epoch * config.epochs).max(1) as f64;
    let floor = config.learning_rate * 1e-4;

    let mut step = 0usize;
    let mut grad = vec![0.0; dim];
    for _ in 0..config.epochs {
        for stream in &streams {
            for (pos, &center) in stream.iter().enumerate() {
                let lr = (config.learning_rate * (1.0 - step as f64 / total_steps)).max(floor);
                step += 1;
                let lo = pos.saturating_sub(config.radius);
                let hi = (pos + config.radius + 1).min(stream.len());
                for (ctx_pos, &context) in stream.iter().enumerate().take(hi).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let targets = std::iter::once((context, 1.0)).chain(
                        (0..config.negatives).filter_map(|_| {
                            let n = noise.sample(&mut rng);
                            (n != context).then_some((n, 0.0))
                        }),
                    );
                    let targets: Vec<(EntityId, f64)> = targets.collect();
                    for (target, label) in targets {
                        let dot: f64 = input[center]
                            .iter()
                            .zip(&output[target])
                            .map(|(a, b)| a * b)
                            .sum();
                        let g = lr * (label - sigmoid(dot));
                        for k in 0..dim {
                            grad[k] += g * output[target][k];
                            output[target][k] += g * input[center][k];
                        }
                    }
                    for k in 0..dim {
                        input[center][k] += grad[k];
                    }
                }
            }
        }
    }

    // Word and context vectors are summed so that entities which occur next
    // to each other, not only in similar surroundings, end up close.
    for (id, &c) in counts.iter().enumerate() {
        if c == 0 {
            input[id].iter_mut().for_each(|x| *x = 0.0);
        } else {
            for (x, o) in input[id].iter_mut().zip(&output[id]) {
                *x += o;
            }
        }
    }
    Ok(EmbeddingTable {
        names: corpus.names(),
        vectors: input,
    })
}

/// Cosine similarity of two entity vectors, clamped to `[-1, 1]`.
pub fn similarity(table: &EmbeddingTable, u: EntityId, v: EntityId) -> Result<f64> {
    let a = table.vector(u).ok_or(EmbeddingError::UnknownEntity(u))?;
    let b = table.vector(v).ok_or(EmbeddingError::UnknownEntity(v))?;
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 {
        return Err(EmbeddingError::Untrained(u));
    }
    if nb == 0.0 {
        return Err(EmbeddingError::Untrained(v));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
