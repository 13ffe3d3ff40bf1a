//! Synthetic corpora with known structure.
//!
//! A background process is drawn from a reactive point process with known
//! parameters; planted combinations are overlaid on top. For a plant
//! `b,c->H`, joint occurrences of all causes (spread over `joint_span`)
//! arrive as a Poisson stream and each one triggers the effect after a
//! random delay. Causes also fire on their own in the background,
//! where they trigger nothing.
//!
//! The defaults keep causes busy on their own so that neither cause alone
//! predicts the effect well, and keep joint occurrences tight so that a
//! narrow tie window (about 0.05) separates them from chance coincidences.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_store::{Corpus, CorpusError, Event, EventSequence};
use crate::rpp::{self, BasisKernels, ParamsFile, RppError, RppParams};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid plant {0:?}: expected \"a,b->effect\"")]
    BadPlant(String),

    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Rpp(#[from] RppError),

    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedCombo {
    pub causes: Vec<String>,
    pub effect: String,
}

impl FromStr for PlantedCombo {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SynthError::BadPlant(s.to_string());
        let (lhs, rhs) = s.split_once("->").ok_or_else(bad)?;
        let mut causes: Vec<String> = lhs
            .split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        causes.sort();
        causes.dedup();
        let effect = rhs.trim().to_string();
        if causes.len() < 2 || effect.is_empty() || causes.contains(&effect) {
            return Err(bad());
        }
        Ok(Self { causes, effect })
    }
}

impl std::fmt::Display for PlantedCombo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}->{}", self.causes.join(","), self.effect)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub entities: usize,
    pub plants: Vec<PlantedCombo>,
    pub sequences: usize,
    pub horizon: f64,
    /// Background rate of every entity that is not a planted effect.
    pub background_rate: f64,
    /// Background rate of planted effects.
    pub effect_rate: f64,
    /// Rate of joint occurrences per plant.
    pub joint_rate: f64,
    /// Causes of one joint occurrence fall within this span.
    pub joint_span: f64,
    pub trigger_probability: f64,
    pub delay_min: f64,
    pub delay_max: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            entities: 3,
            plants: Vec::new(),
            sequences: 20,
            horizon: 100.0,
            background_rate: 2.5,
            effect_rate: 0.2,
            joint_rate: 0.3,
            joint_span: 0.02,
            trigger_probability: 0.9,
            delay_min: 0.2,
            delay_max: 1.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.sequences == 0 {
            return bad("sequences must be positive");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if !(self.background_rate > 0.0 && self.effect_rate > 0.0) {
            return bad("background rates must be positive");
        }
        if !(self.joint_rate >= 0.0 && self.joint_span >= 0.0) {
            return bad("joint_rate and joint_span must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.trigger_probability) {
            return bad("trigger_probability must be within [0, 1]");
        }
        if !(self.delay_min >= 0.0 && self.delay_max >= self.delay_min) {
            return bad("need 0 <= delay_min <= delay_max");
        }
        Ok(())
    }

    /// Plant entities in first-mention order, then fillers `x1, x2, ...`.
    pub fn entity_names(&self) -> Result<Vec<String>> {
        let mut names: Vec<String> = Vec::new();
        for p in &self.plants {
            for n in p.causes.iter().chain(std::iter::once(&p.effect)) {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        }
        if names.len() > self.entities {
            return Err(SynthError::InvalidConfig(format!(
                "plants mention {} entities but only {} requested",
                names.len(),
                self.entities
            )));
        }
        let mut k = 1;
        while names.len() < self.entities {
            let candidate = format!("x{k}");
            if !names.contains(&candidate) {
                names.push(candidate);
            }
            k += 1;
        }
        Ok(names)
    }
}

/// Ground truth written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub entities: Vec<String>,
    /// True background process, including its kernels.
    pub params: ParamsFile<f64>,
    pub planted: Vec<PlantedCombo>,
    pub config: SynthConfig,
}

/// Background-only parameters: constant rates, no interactions.
fn background(cfg: &SynthConfig, names: &[String]) -> RppParams<f64> {
    let mut p = RppParams::zeros(names.len(), 1);
    for (u, name) in names.iter().enumerate() {
        let is_effect = cfg.plants.iter().any(|pl| &pl.effect == name);
        p.mu[u] = if is_effect {
            cfg.effect_rate
        } else {
            cfg.background_rate
        };
    }
    p
}

pub fn simulate_planted(cfg: &SynthConfig) -> Result<(Corpus, SynthManifest)> {
    cfg.validate()?;
    let names = cfg.entity_names()?;
    let params = background(cfg, &names);
    let kernels = BasisKernels::equally_spaced(1, 1.0)?;
    // Smoothing small enough that softplus(mu) equals mu for the rates used.
    let base = rpp::simulate_corpus(&params, &kernels, 1e-3, names.clone(), cfg.sequences, cfg.horizon, cfg.seed)?;

    let id = |n: &String| names.iter().position(|x| x == n).expect("plant names are in vocabulary");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    let sequences = base
        .sequences
        .into_iter()
        .map(|mut seq| {
            for plant in &cfg.plants {
                let causes: Vec<usize> = plant.causes.iter().map(id).collect();
                let effect = id(&plant.effect);
                if cfg.joint_rate <= 0.0 {
                    continue;
                }
                let mut t = 0.0;
                loop {
                    t += -(1.0 - rng.gen::<f64>()).ln() / cfg.joint_rate;
                    if t >= cfg.horizon {
                        break;
                    }
                    let mut last = t;
                    for &c in &causes {
                        let time = t + rng.gen::<f64>() * cfg.joint_span;
                        last = f64::max(last, time);
                        if time < cfg.horizon {
                            seq.events.push(Event { entity: c, time });
                        }
                    }
                    if rng.gen::<f64>() < cfg.trigger_probability {
                        let time = last + rng.gen_range(cfg.delay_min..=cfg.delay_max);
                        if time < cfg.horizon {
                            seq.events.push(Event { entity: effect, time });
                        }
                    }
                }
            }
            EventSequence::new(seq.id, seq.events, cfg.horizon)
        })
        .collect();

    let corpus = Corpus::new(names.clone(), sequences)?;
    let manifest = SynthManifest {
        entities: names,
        params: params.to_file(&kernels),
        planted: cfg.plants.clone(),
        config: cfg.clone(),
    };
    Ok((corpus, manifest))
}
