//! Smoothed log-likelihood, regularized objective and its exact gradient.
//!
//! Kernel responses depend only on the data, so they are tabulated once per
//! corpus: for every event and every Monte Carlo sample point we store the
//! summed basis responses from each source entity. The raw intensity is then
//! a dot product with the net coefficients `A + B`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{BasisKernels, FitConfig, Result, RppError, RppParams};
use crate::event_store::{Corpus, EntityId, Event};
use crate::scalar::Real;

/// Below this value of `x / s` the softplus is replaced by its exponential tail.
const TAIL: f64 = -30.0;

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `s * ln(1 + exp(x / s))`, evaluated without overflow.
#[inline]
pub fn smoothed_intensity<T: Real>(x: T, s: T) -> T {
    let z = x / s;
    if z > T::zero() {
        x + s * (-z).exp().ln_1p()
    } else {
        s * z.exp().ln_1p()
    }
}

/// `ln(smoothed_intensity(x, s))`, finite even where the softplus underflows.
#[inline]
pub fn log_softplus<T: Real>(x: T, s: T) -> T {
    let z = x / s;
    if z < T::of(TAIL) {
        let e = z.exp();
        s.ln() + z - e / T::of(2.0)
    } else {
        smoothed_intensity(x, s).ln()
    }
}

/// `d/dx ln(softplus(x))`.
#[inline]
fn log_softplus_slope<T: Real>(x: T, s: T) -> T {
    let z = x / s;
    if z < T::of(TAIL) {
        (T::one() - z.exp() / T::of(2.0)) / s
    } else {
        sigmoid(z) / smoothed_intensity(x, s)
    }
}

/// Raw (unsmoothed) intensity of `u` at `t`; only history events strictly
/// before `t` contribute.
pub fn intensity<T: Real>(
    params: &RppParams<T>,
    kernels: &BasisKernels<T>,
    history: &[Event],
    u: EntityId,
    t: f64,
) -> T {
    let m = kernels.len();
    let mut response = vec![T::zero(); m];
    let mut x = params.mu[u];
    for ev in history.iter().filter(|e| e.time < t) {
        response.iter_mut().for_each(|r| *r = T::zero());
        kernels.accumulate(T::of(t - ev.time), &mut response);
        for (k, r) in response.iter().enumerate() {
            x = x + params.net(u, ev.entity, k) * *r;
        }
    }
    x
}

struct SequenceData<T> {
    horizon: T,
    targets: Vec<EntityId>,
    /// `targets.len() x (U * M)` kernel responses at each event.
    event_features: Vec<T>,
    /// `samples x (U * M)` kernel responses at the Monte Carlo points.
    sample_features: Vec<T>,
    samples: usize,
}

/// Gradient of the objective with respect to `mu`, `A` and `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct RppGradient<T> {
    pub mu: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> RppGradient<T> {
    pub fn dot(&self, other: &RppGradient<T>) -> T {
        let pair = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| p * q).sum::<T>();
        pair(&self.mu, &other.mu) + pair(&self.a, &other.a) + pair(&self.b, &other.b)
    }
}

/// How the L1 penalty is differentiated at a coefficient that sits exactly at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum L1AtZero {
    /// Subgradient 0.
    Zero,
    /// One-sided derivative into the feasible box (`+beta` for A, `-beta` for B).
    Feasible,
}

/// Tabulated kernel responses for one corpus and one fixed Monte Carlo draw.
pub struct LikelihoodData<T: Real> {
    num_entities: usize,
    num_bases: usize,
    sequences: Vec<SequenceData<T>>,
}

fn fill_response<T: Real>(
    events: &[Event],
    t: f64,
    kernels: &BasisKernels<T>,
    num_bases: usize,
    out: &mut [T],
) {
    let before = events.partition_point(|e| e.time < t);
    let cutoff = kernels.cutoff.as_f64();
    for ev in events[..before].iter().rev() {
        let dt = t - ev.time;
        if dt > cutoff {
            break;
        }
        let slot = ev.entity * num_bases;
        kernels.accumulate(T::of(dt), &mut out[slot..slot + num_bases]);
    }
}

impl<T: Real> LikelihoodData<T> {
    /// Tabulates responses; sample points are drawn uniformly on each
    /// sequence's horizon from a generator seeded with `seed`.
    pub fn new(corpus: &Corpus, kernels: &BasisKernels<T>, mc_samples: usize, seed: u64) -> Self {
        let u = corpus.num_entities();
        let m = kernels.len();
        let width = u * m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<Vec<f64>> = corpus
            .sequences
            .iter()
            .map(|s| (0..mc_samples).map(|_| rng.gen::<f64>() * s.horizon).collect())
            .collect();

        let sequences = corpus
            .sequences
            .par_iter()
            .zip(draws.par_iter())
            .map(|(seq, points)| {
                let n = seq.events.len();
                let mut event_features = vec![T::zero(); n * width];
                for (i, ev) in seq.events.iter().enumerate() {
                    fill_response(
                        &seq.events,
                        ev.time,
                        kernels,
                        m,
                        &mut event_features[i * width..(i + 1) * width],
                    );
                }
                let mut sample_features = vec![T::zero(); points.len() * width];
                for (j, &t) in points.iter().enumerate() {
                    fill_response(
                        &seq.events,
                        t,
                        kernels,
                        m,
                        &mut sample_features[j * width..(j + 1) * width],
                    );
                }
                SequenceData {
                    horizon: T::of(seq.horizon),
                    targets: seq.events.iter().map(|e| e.entity).collect(),
                    event_features,
                    sample_features,
                    samples: points.len(),
                }
            })
            .collect();
        Self {
            num_entities: u,
            num_bases: m,
            sequences,
        }
    }

    pub fn from_config(corpus: &Corpus, kernels: &BasisKernels<T>, config: &FitConfig<T>) -> Self {
        Self::new(corpus, kernels, config.mc_samples, config.seed)
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_bases(&self) -> usize {
        self.num_bases
    }

    pub fn num_events(&self) -> usize {
        self.sequences.iter().map(|s| s.targets.len()).sum()
    }

    fn check(&self, params: &RppParams<T>) -> Result<()> {
        if params.num_entities() != self.num_entities || params.num_bases() != self.num_bases {
            return Err(RppError::ShapeMismatch(format!(
                "params are {}x{} but data needs U={} M={}",
                params.num_entities(),
                params.num_bases(),
                self.num_entities,
                self.num_bases
            )));
        }
        Ok(())
    }

    /// Log-likelihood, and optionally its gradient with respect to `mu` and
    /// the net coefficients `A + B`.
    fn evaluate(&self, params: &RppParams<T>, s: T, with_grad: bool) -> (T, Vec<T>, Vec<T>) {
        let u = self.num_entities;
        let width = u * self.num_bases;
        let net = params.net_all();
        let mu = &params.mu;

        let partials: Vec<(T, Vec<T>, Vec<T>)> = self
            .sequences
            .par_iter()
            .map(|seq| {
                let mut ll = T::zero();
                let (mut gmu, mut gw) = if with_grad {
                    (vec![T::zero(); u], vec![T::zero(); u * width])
                } else {
                    (Vec::new(), Vec::new())
                };
                for (i, &target) in seq.targets.iter().enumerate() {
                    let feat = &seq.event_features[i * width..(i + 1) * width];
                    let row = &net[target * width..(target + 1) * width];
                    let x = mu[target] + dot(row, feat);
                    ll = ll + log_softplus(x, s);
                    if with_grad {
                        let r = log_softplus_slope(x, s);
                        gmu[target] = gmu[target] + r;
                        axpy(r, feat, &mut gw[target * width..(target + 1) * width]);
                    }
                }
                let scale = seq.horizon / T::of(seq.samples as f64);
                let mut compensator = T::zero();
                for j in 0..seq.samples {
                    let feat = &seq.sample_features[j * width..(j + 1) * width];
                    for target in 0..u {
                        let row = &net[target * width..(target + 1) * width];
                        let x = mu[target] + dot(row, feat);
                        compensator = compensator + smoothed_intensity(x, s);
                        if with_grad {
                            let c = -scale * sigmoid(x / s);
                            gmu[target] = gmu[target] + c;
                            axpy(c, feat, &mut gw[target * width..(target + 1) * width]);
                        }
                    }
                }
                (ll - scale * compensator, gmu, gw)
            })
            .collect();

        let mut total = T::zero();
        let mut gmu = vec![T::zero(); if with_grad { u } else { 0 }];
        let mut gw = vec![T::zero(); if with_grad { u * width } else { 0 }];
        for (ll, pm, pw) in partials {
            total = total + ll;
            if with_grad {
                gmu.iter_mut().zip(&pm).for_each(|(g, &p)| *g = *g + p);
                gw.iter_mut().zip(&pw).for_each(|(g, &p)| *g = *g + p);
            }
        }
        (total, gmu, gw)
    }

    pub fn log_likelihood(&self, params: &RppParams<T>, smoothing: T) -> Result<T> {
        self.check(params)?;
        Ok(self.evaluate(params, smoothing, false).0)
    }

    pub fn objective(&self, params: &RppParams<T>, config: &FitConfig<T>) -> Result<T> {
        self.check(params)?;
        let (ll, _, _) = self.evaluate(params, config.smoothing, false);
        Ok(-ll + penalty(params, config))
    }

    pub(crate) fn objective_and_gradient(
        &self,
        params: &RppParams<T>,
        config: &FitConfig<T>,
        l1_at_zero: L1AtZero,
    ) -> Result<(T, RppGradient<T>)> {
        self.check(params)?;
        let (ll, gmu, gw) = self.evaluate(params, config.smoothing, true);
        let two_alpha = T::of(2.0) * config.alpha;
        let l1 = |x: T, feasible_side: T| {
            if x > T::zero() {
                T::one()
            } else if x < T::zero() {
                -T::one()
            } else {
                match l1_at_zero {
                    L1AtZero::Zero => T::zero(),
                    L1AtZero::Feasible => feasible_side,
                }
            }
        };
        let a = params
            .a
            .iter()
            .zip(&gw)
            .map(|(&a, &g)| -g + two_alpha * a + config.beta * l1(a, T::one()))
            .collect();
        let b = params
            .b
            .iter()
            .zip(&gw)
            .map(|(&b, &g)| -g + two_alpha * b + config.beta * l1(b, -T::one()))
            .collect();
        let mu = gmu.into_iter().map(|g| -g).collect();
        Ok((-ll + penalty(params, config), RppGradient { mu, a, b }))
    }
}

fn penalty<T: Real>(params: &RppParams<T>, config: &FitConfig<T>) -> T {
    config.alpha * params.frobenius_sq() + config.beta * params.l1_norm()
}

#[inline]
fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&p, &q)| acc + p * q)
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Monte Carlo discretized log-likelihood with samples seeded by `config.seed`.
pub fn log_likelihood<T: Real>(
    params: &RppParams<T>,
    corpus: &Corpus,
    kernels: &BasisKernels<T>,
    config: &FitConfig<T>,
) -> Result<T> {
    LikelihoodData::from_config(corpus, kernels, config).log_likelihood(params, config.smoothing)
}

/// `-L + alpha (|A|_F^2 + |B|_F^2) + beta (|A|_1 + |B|_1)`.
pub fn objective<T: Real>(
    params: &RppParams<T>,
    corpus: &Corpus,
    kernels: &BasisKernels<T>,
    config: &FitConfig<T>,
) -> Result<T> {
    LikelihoodData::from_config(corpus, kernels, config).objective(params, config)
}

/// Exact gradient of [`objective`]; the L1 subgradient at 0 is taken as 0.
pub fn gradient<T: Real>(
    params: &RppParams<T>,
    corpus: &Corpus,
    kernels: &BasisKernels<T>,
    config: &FitConfig<T>,
) -> Result<RppGradient<T>> {
    LikelihoodData::from_config(corpus, kernels, config)
        .objective_and_gradient(params, config, L1AtZero::Zero)
        .map(|(_, g)| g)
}
