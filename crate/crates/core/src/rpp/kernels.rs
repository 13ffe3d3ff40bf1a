use serde::{Deserialize, Serialize};

use super::{Result, RppError};
use crate::event_store::Corpus;
use crate::scalar::Real;

/// Gaussian basis `k_m(t) = exp(-(t - c_m)^2 / (2 sigma^2))`, truncated to
/// zero outside `[0, cutoff]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BasisKernels<T: Real> {
    pub centers: Vec<T>,
    pub sigma: T,
    pub cutoff: T,
}

impl<T: Real> BasisKernels<T> {
    pub fn new(centers: Vec<T>, sigma: T, cutoff: T) -> Result<Self> {
        if centers.is_empty() {
            return Err(RppError::InvalidConfig("at least one basis kernel is required".into()));
        }
        if centers.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(RppError::InvalidConfig("kernel centers must be strictly increasing".into()));
        }
        if !(sigma > T::zero()) || !(cutoff > T::zero()) {
            return Err(RppError::InvalidConfig("kernel width and cutoff must be positive".into()));
        }
        Ok(Self {
            centers,
            sigma,
            cutoff,
        })
    }

    /// `count` centers equally spaced on `[0, span]`. The width is half the
    /// spacing (half the span for a single kernel) and the support ends four
    /// widths past the last center.
    pub fn equally_spaced(count: usize, span: T) -> Result<Self> {
        if count == 0 || !(span > T::zero()) {
            return Err(RppError::InvalidConfig(
                "basis count and span must be positive".into(),
            ));
        }
        let two = T::of(2.0);
        let (centers, sigma) = if count == 1 {
            (vec![T::zero()], span / two)
        } else {
            let step = span / T::of((count - 1) as f64);
            ((0..count).map(|i| step * T::of(i as f64)).collect(), step / two)
        };
        let cutoff = span + T::of(4.0) * sigma;
        Self::new(centers, sigma, cutoff)
    }

    /// Span of ten median inter-event gaps, or 1.0 when the corpus has none.
    pub fn for_corpus(corpus: &Corpus, count: usize) -> Result<Self> {
        let span = corpus
            .median_inter_event_gap()
            .map_or(1.0, |g| 10.0 * g);
        Self::equally_spaced(count, T::of(span))
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    #[inline]
    pub fn eval(&self, m: usize, dt: T) -> T {
        if dt < T::zero() || dt > self.cutoff {
            return T::zero();
        }
        let d = dt - self.centers[m];
        (-(d * d) / (T::of(2.0) * self.sigma * self.sigma)).exp()
    }

    /// Adds `k_m(dt)` for every basis into `out`.
    #[inline]
    pub fn accumulate(&self, dt: T, out: &mut [T]) {
        if dt < T::zero() || dt > self.cutoff {
            return;
        }
        let denom = T::of(2.0) * self.sigma * self.sigma;
        for (o, &c) in out.iter_mut().zip(&self.centers) {
            let d = dt - c;
            *o = *o + (-(d * d) / denom).exp();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equally_spaced_layout() {
        let k = BasisKernels::<f64>::equally_spaced(3, 10.0).unwrap();
        assert_eq!(k.centers, vec![0.0, 5.0, 10.0]);
        assert_eq!(k.sigma, 2.5);
        assert_eq!(k.cutoff, 20.0);
        for m in 0..3 {
            assert_eq!(k.eval(m, k.centers[m]), 1.0);
            let v = k.eval(m, 3.3);
            assert!(v > 0.0 && v <= 1.0);
        }
        assert_eq!(k.eval(0, 20.5), 0.0);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(BasisKernels::<f64>::new(vec![], 1.0, 1.0).is_err());
        assert!(BasisKernels::<f64>::new(vec![1.0, 1.0], 1.0, 2.0).is_err());
        assert!(BasisKernels::<f64>::new(vec![0.0], 0.0, 2.0).is_err());
        assert!(BasisKernels::<f64>::equally_spaced(0, 1.0).is_err());
    }

    #[test]
    fn accumulate_matches_eval() {
        let k = BasisKernels::<f32>::equally_spaced(4, 3.0).unwrap();
        let mut out = vec![0.0f32; 4];
        k.accumulate(1.7, &mut out);
        for m in 0..4 {
            assert!((out[m] - k.eval(m, 1.7)).abs() < 1e-7);
        }
    }
}
