//! Reactive point process: a multivariate Hawkes-type model whose kernels
//! carry both exciting (`A >= 0`) and inhibiting (`B <= 0`) coefficients.
//!
//! The raw intensity of entity `u` at time `t` is
//!
//! ```text
//! x_u(t) = mu_u + sum_{t' < t} sum_m (A[u][u'][m] + B[u][u'][m]) * k_m(t - t')
//! ```
//!
//! where `u'` is the entity of the past event at `t'` and `k_m` are Gaussian
//! basis kernels. The model intensity is the softplus `s * ln(1 + exp(x / s))`,
//! which keeps it positive. Plain Hawkes is the special case `B = 0`.
//!
//! Coefficient arrays are stored flat in `[target][source][basis]` order, so
//! `A[u][u'][m]` is the influence of source `u'` on target `u`.

mod fit;
mod kernels;
mod likelihood;
mod params;
mod simulate;
mod strength;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use fit::{fit, fit_with_report, FitOutcome};
pub use kernels::BasisKernels;
pub use likelihood::{
    gradient, intensity, log_likelihood, log_softplus, objective, smoothed_intensity, LikelihoodData,
    RppGradient,
};
pub use params::{ParamsFile, RppParams};
pub use simulate::{simulate, simulate_corpus};
pub use strength::{build_causal_graph, causal_strength, CausalEdge, CausalGraph};

#[derive(Debug, Error)]
pub enum RppError {
    #[error("nothing to fit")]
    NothingToFit,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("simulation exceeded {0} events; the process looks explosive")]
    Explosive(usize),
}

pub type Result<T> = std::result::Result<T, RppError>;

/// Settings for likelihood evaluation and projected gradient fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "")]
pub struct FitConfig<T: Real> {
    /// Softplus smoothing constant `s`.
    pub smoothing: T,
    /// Weight of the squared Frobenius penalty.
    pub alpha: T,
    /// Weight of the L1 penalty.
    pub beta: T,
    /// Monte Carlo sample count per sequence for the compensator integral.
    pub mc_samples: usize,
    pub max_iterations: usize,
    pub initial_step: T,
    /// Step shrink factor applied on a failed line search trial.
    pub backtracking: T,
    /// Relative objective decrease below which fitting stops.
    pub tolerance: T,
    pub seed: u64,
    /// Net coefficients within `±sign_tolerance` vote as zero.
    pub sign_tolerance: T,
    /// Minimum `|strength|` for an edge of the causal graph.
    pub strength_threshold: T,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            smoothing: T::of(0.01),
            alpha: T::of(0.1),
            beta: T::of(0.01),
            mc_samples: 1000,
            max_iterations: 200,
            initial_step: T::of(1e-3),
            backtracking: T::of(0.5),
            tolerance: T::of(1e-7),
            seed: 0,
            sign_tolerance: T::of(1e-6),
            strength_threshold: T::of(0.1),
        }
    }
}

impl<T: Real> FitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(RppError::InvalidConfig(m.to_string()));
        if !(self.smoothing > T::zero()) {
            return bad("smoothing must be positive");
        }
        if !(self.alpha >= T::zero()) || !(self.beta >= T::zero()) {
            return bad("alpha and beta must be non-negative");
        }
        if self.mc_samples == 0 {
            return bad("mc_samples must be positive");
        }
        if !(self.initial_step > T::zero()) {
            return bad("initial_step must be positive");
        }
        if !(self.backtracking > T::zero() && self.backtracking < T::one()) {
            return bad("backtracking must lie in (0, 1)");
        }
        if !(self.tolerance >= T::zero()) {
            return bad("tolerance must be non-negative");
        }
        if !(self.sign_tolerance >= T::zero()) {
            return bad("sign_tolerance must be non-negative");
        }
        if !(self.strength_threshold > T::zero()) {
            return bad("strength_threshold must be positive");
        }
        Ok(())
    }
}
