//! Exact sampling of the smoothed process by Ogata thinning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::likelihood::smoothed_intensity;
use super::{BasisKernels, Result, RppError, RppParams};
use crate::event_store::{Corpus, Event, EventSequence};
use crate::scalar::Real;

const MAX_EVENTS: usize = 2_000_000;

/// Draws one sequence on `[0, horizon]`.
///
/// Between events the raw intensity of `u` is bounded by `mu_u` plus the
/// positive net coefficients of every past event still inside the kernel
/// support (each basis is at most 1), so the softplus of that bound dominates
/// the true intensity until the next event.
pub fn simulate<T: Real>(
    params: &RppParams<T>,
    kernels: &BasisKernels<T>,
    smoothing: T,
    horizon: f64,
    seed: u64,
) -> Result<EventSequence> {
    if !(horizon > 0.0) {
        return Err(RppError::InvalidConfig("horizon must be positive".into()));
    }
    if params.num_bases() != kernels.len() {
        return Err(RppError::ShapeMismatch("params and kernels disagree on M".into()));
    }
    let u = params.num_entities();
    let m = kernels.len();
    let mut positive = vec![T::zero(); u * u];
    for target in 0..u {
        for source in 0..u {
            positive[target * u + source] = (0..m)
                .map(|k| params.net(target, source, k).max(T::zero()))
                .sum();
        }
    }
    let cutoff = kernels.cutoff.as_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events: Vec<Event> = Vec::new();
    let mut window_start = 0;
    let mut t = 0.0f64;
    let mut lambda = vec![T::zero(); u];
    let mut response = vec![T::zero(); m];

    loop {
        while window_start < events.len() && t - events[window_start].time > cutoff {
            window_start += 1;
        }
        let window = &events[window_start..];
        let bound: f64 = (0..u)
            .map(|target| {
                let x = window
                    .iter()
                    .fold(params.mu[target], |acc, ev| acc + positive[target * u + ev.entity]);
                smoothed_intensity(x, smoothing).as_f64()
            })
            .sum();
        if !(bound > 0.0) || !bound.is_finite() {
            break;
        }
        let wait = -(1.0 - rng.gen::<f64>()).ln() / bound;
        t += wait;
        if t > horizon {
            break;
        }

        for (target, l) in lambda.iter_mut().enumerate() {
            *l = params.mu[target];
        }
        for ev in window.iter().filter(|e| e.time < t) {
            response.iter_mut().for_each(|r| *r = T::zero());
            kernels.accumulate(T::of(t - ev.time), &mut response);
            for (target, l) in lambda.iter_mut().enumerate() {
                for (k, &r) in response.iter().enumerate() {
                    *l = *l + params.net(target, ev.entity, k) * r;
                }
            }
        }
        let mut draw = rng.gen::<f64>() * bound;
        for (target, &x) in lambda.iter().enumerate() {
            draw -= smoothed_intensity(x, smoothing).as_f64();
            if draw < 0.0 {
                events.push(Event { entity: target, time: t });
                break;
            }
        }
        if events.len() > MAX_EVENTS {
            return Err(RppError::Explosive(MAX_EVENTS));
        }
    }
    Ok(EventSequence::new("sim", events, horizon))
}

/// Simulates `count` independent sequences named `s0, s1, ...`.
pub fn simulate_corpus<T: Real>(
    params: &RppParams<T>,
    kernels: &BasisKernels<T>,
    smoothing: T,
    names: Vec<String>,
    count: usize,
    horizon: f64,
    seed: u64,
) -> Result<Corpus> {
    if names.len() != params.num_entities() {
        return Err(RppError::ShapeMismatch("one name per entity is required".into()));
    }
    let mut sequences = Vec::with_capacity(count);
    for i in 0..count {
        let sub_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
        let mut seq = simulate(params, kernels, smoothing, horizon, sub_seed)?;
        seq.id = format!("s{i}");
        sequences.push(seq);
    }
    Corpus::new(names, sequences).map_err(|e| RppError::InvalidConfig(e.to_string()))
}
