//! Projected gradient descent with a monotone backtracking line search.
//!
//! Trial steps start from a Barzilai-Borwein estimate and shrink by the
//! configured factor until the projected point satisfies the usual
//! sufficient-decrease test `f(x+) <= f(x) + g.(x+ - x) + |x+ - x|^2 / (2 step)`.

use super::likelihood::L1AtZero;
use super::{BasisKernels, FitConfig, LikelihoodData, Result, RppError, RppGradient, RppParams};
use crate::event_store::Corpus;
use crate::scalar::Real;

const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct FitOutcome<T: Real> {
    pub params: RppParams<T>,
    /// Objective at the start and after every accepted step.
    pub objective_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits `mu`, `A` and `B` by minimizing the regularized objective.
pub fn fit<T: Real>(
    corpus: &Corpus,
    kernels: &BasisKernels<T>,
    config: &FitConfig<T>,
) -> Result<RppParams<T>> {
    fit_with_report(corpus, kernels, config, None).map(|o| o.params)
}

/// Like [`fit`] but reports the objective trace. `warm_start` supplies
/// initial values; its base rates are used as given.
pub fn fit_with_report<T: Real>(
    corpus: &Corpus,
    kernels: &BasisKernels<T>,
    config: &FitConfig<T>,
    warm_start: Option<&RppParams<T>>,
) -> Result<FitOutcome<T>> {
    config.validate()?;
    if corpus.num_events() == 0 {
        return Err(RppError::NothingToFit);
    }
    let u = corpus.num_entities();
    let m = kernels.len();

    let mut x = match warm_start {
        Some(p) => {
            if p.num_entities() != u || p.num_bases() != m {
                return Err(RppError::ShapeMismatch(
                    "warm start does not match the corpus".into(),
                ));
            }
            p.clone()
        }
        None => poisson_start(corpus, m),
    };
    x.project();

    let data = LikelihoodData::from_config(corpus, kernels, config);
    let (mut f, mut g) = data.objective_and_gradient(&x, config, L1AtZero::Feasible)?;
    let mut history = vec![f];
    let mut step = config.initial_step;
    let mut previous: Option<(RppParams<T>, RppGradient<T>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    let min_step = T::of(MIN_STEP);
    let half = T::of(0.5);

    for _ in 0..config.max_iterations {
        iterations += 1;
        if let Some((px, pg)) = &previous {
            let s = difference(&x, px);
            let y = RppGradient {
                mu: sub(&g.mu, &pg.mu),
                a: sub(&g.a, &pg.a),
                b: sub(&g.b, &pg.b),
            };
            let sy = s.dot(&y);
            if sy > T::zero() {
                step = (s.dot(&s) / sy).max(min_step).min(T::of(MAX_STEP));
            }
        }

        let accepted = loop {
            let candidate = projected_step(&x, &g, step);
            let d = difference(&candidate, &x);
            let dd = d.dot(&d);
            if dd == T::zero() {
                break None;
            }
            let (fc, gc) = data.objective_and_gradient(&candidate, config, L1AtZero::Feasible)?;
            let bound = f + g.dot(&d) + half * dd / step;
            if fc.is_finite() && fc <= bound && fc <= f {
                break Some((candidate, fc, gc));
            }
            step = step * config.backtracking;
            if step < min_step {
                break None;
            }
        };

        let Some((candidate, fc, gc)) = accepted else {
            converged = true;
            break;
        };
        let decrease = f - fc;
        previous = Some((std::mem::replace(&mut x, candidate), std::mem::replace(&mut g, gc)));
        f = fc;
        history.push(f);
        if decrease <= config.tolerance * f.abs().max(T::one()) {
            converged = true;
            break;
        }
    }

    Ok(FitOutcome {
        params: x,
        objective_history: history,
        iterations,
        converged,
    })
}

/// Homogeneous Poisson estimate `count / total time`, zero interactions.
fn poisson_start<T: Real>(corpus: &Corpus, num_bases: usize) -> RppParams<T> {
    let total_time: f64 = corpus.sequences.iter().map(|s| s.horizon).sum();
    let mut p = RppParams::zeros(corpus.num_entities(), num_bases);
    for (mu, &c) in p.mu.iter_mut().zip(&corpus.event_counts()) {
        *mu = T::of((c as f64 / total_time).max(1e-3));
    }
    p
}

fn projected_step<T: Real>(x: &RppParams<T>, g: &RppGradient<T>, step: T) -> RppParams<T> {
    let mut next = x.clone();
    let descend = |dst: &mut [T], grad: &[T]| {
        for (v, &gi) in dst.iter_mut().zip(grad) {
            *v = *v - step * gi;
        }
    };
    descend(&mut next.mu, &g.mu);
    descend(&mut next.a, &g.a);
    descend(&mut next.b, &g.b);
    next.project();
    next
}

fn sub<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&p, &q)| p - q).collect()
}

fn difference<T: Real>(x: &RppParams<T>, y: &RppParams<T>) -> RppGradient<T> {
    RppGradient {
        mu: sub(&x.mu, &y.mu),
        a: sub(&x.a, &y.a),
        b: sub(&x.b, &y.b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_store::{Event, EventSequence};

    fn toy_corpus() -> Corpus {
        let seqs = (0..4)
            .map(|s| {
                let events = (0..30)
                    .map(|i| Event {
                        entity: (i + s) % 2,
                        time: 0.31 * i as f64 + 0.05 * s as f64,
                    })
                    .collect();
                EventSequence::new(format!("s{s}"), events, 10.0)
            })
            .collect();
        Corpus::new(vec!["a".into(), "b".into()], seqs).unwrap()
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let c = Corpus::new(vec!["a".into()], vec![EventSequence::new("s", vec![], 1.0)]).unwrap();
        let k = BasisKernels::<f64>::equally_spaced(1, 1.0).unwrap();
        let err = fit(&c, &k, &FitConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "nothing to fit");
    }

    #[test]
    fn objective_trace_is_monotone_and_box_holds() {
        let c = toy_corpus();
        let k = BasisKernels::<f64>::equally_spaced(3, 1.5).unwrap();
        let cfg = FitConfig {
            mc_samples: 200,
            max_iterations: 60,
            ..Default::default()
        };
        let out = fit_with_report(&c, &k, &cfg, None).unwrap();
        assert!(out.params.is_feasible());
        assert!(out.objective_history.len() >= 2);
        for w in out.objective_history.windows(2) {
            assert!(w[1] <= w[0], "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let c = toy_corpus();
        let k = BasisKernels::<f64>::equally_spaced(2, 1.0).unwrap();
        let cfg = FitConfig {
            mc_samples: 100,
            max_iterations: 20,
            ..Default::default()
        };
        assert_eq!(fit(&c, &k, &cfg).unwrap(), fit(&c, &k, &cfg).unwrap());
    }

    #[test]
    fn single_precision_fit_runs() {
        let c = toy_corpus();
        let k = BasisKernels::<f32>::equally_spaced(2, 1.0).unwrap();
        let cfg = FitConfig::<f32> {
            mc_samples: 100,
            max_iterations: 20,
            ..Default::default()
        };
        let p = fit(&c, &k, &cfg).unwrap();
        assert!(p.is_feasible());
        assert!(p.mu.iter().all(|m| m.is_finite()));
    }
}
