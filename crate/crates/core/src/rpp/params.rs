use serde::{Deserialize, Serialize};

use super::{BasisKernels, Result, RppError};
use crate::scalar::Real;

/// Base rates and signed kernel coefficients of a fitted process.
#[derive(Debug, Clone, PartialEq)]
pub struct RppParams<T: Real> {
    num_entities: usize,
    num_bases: usize,
    pub mu: Vec<T>,
    /// Exciting coefficients in `[0, 1]`, `[target][source][basis]`.
    pub a: Vec<T>,
    /// Inhibiting coefficients in `[-1, 0]`, `[target][source][basis]`.
    pub b: Vec<T>,
}

impl<T: Real> RppParams<T> {
    pub fn zeros(num_entities: usize, num_bases: usize) -> Self {
        let n = num_entities * num_entities * num_bases;
        Self {
            num_entities,
            num_bases,
            mu: vec![T::zero(); num_entities],
            a: vec![T::zero(); n],
            b: vec![T::zero(); n],
        }
    }

    pub fn from_parts(num_bases: usize, mu: Vec<T>, a: Vec<T>, b: Vec<T>) -> Result<Self> {
        let u = mu.len();
        let n = u * u * num_bases;
        if num_bases == 0 || a.len() != n || b.len() != n {
            return Err(RppError::ShapeMismatch(format!(
                "expected {n} coefficients for U={u}, M={num_bases}, got A={} B={}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self {
            num_entities: u,
            num_bases,
            mu,
            a,
            b,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_bases(&self) -> usize {
        self.num_bases
    }

    #[inline]
    pub fn index(&self, target: usize, source: usize, basis: usize) -> usize {
        (target * self.num_entities + source) * self.num_bases + basis
    }

    /// Net coefficient `a + b` for the influence of `source` on `target`.
    #[inline]
    pub fn net(&self, target: usize, source: usize, basis: usize) -> T {
        let i = self.index(target, source, basis);
        self.a[i] + self.b[i]
    }

    /// Net coefficients `a + b` for every index.
    pub fn net_all(&self) -> Vec<T> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| a + b).collect()
    }

    pub fn set_excitation(&mut self, target: usize, source: usize, basis: usize, value: T) {
        let i = self.index(target, source, basis);
        self.a[i] = value;
    }

    pub fn set_inhibition(&mut self, target: usize, source: usize, basis: usize, value: T) {
        let i = self.index(target, source, basis);
        self.b[i] = value;
    }

    /// Clamps onto the feasible box: `mu >= 0`, `A in [0,1]`, `B in [-1,0]`.
    pub fn project(&mut self) {
        for m in &mut self.mu {
            *m = m.max(T::zero());
        }
        for a in &mut self.a {
            *a = a.max(T::zero()).min(T::one());
        }
        for b in &mut self.b {
            *b = b.max(-T::one()).min(T::zero());
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.mu.iter().all(|&m| m >= T::zero())
            && self.a.iter().all(|&a| a >= T::zero() && a <= T::one())
            && self.b.iter().all(|&b| b >= -T::one() && b <= T::zero())
    }

    pub fn l1_norm(&self) -> T {
        self.a.iter().chain(&self.b).map(|x| x.abs()).sum()
    }

    pub fn frobenius_sq(&self) -> T {
        self.a.iter().chain(&self.b).map(|&x| x * x).sum()
    }

    fn nested(&self, flat: &[T]) -> Vec<Vec<Vec<T>>> {
        (0..self.num_entities)
            .map(|t| {
                (0..self.num_entities)
                    .map(|s| {
                        let i = self.index(t, s, 0);
                        flat[i..i + self.num_bases].to_vec()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_file(&self, kernels: &BasisKernels<T>) -> ParamsFile<T> {
        ParamsFile {
            num_entities: self.num_entities,
            num_bases: self.num_bases,
            mu: self.mu.clone(),
            a: self.nested(&self.a),
            b: self.nested(&self.b),
            kernels: kernels.clone(),
        }
    }
}

/// JSON layout `{U, M, mu, A, B, kernels: {centers, sigma, cutoff}}` with
/// `A[target][source][basis]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParamsFile<T: Real> {
    #[serde(rename = "U")]
    pub num_entities: usize,
    #[serde(rename = "M")]
    pub num_bases: usize,
    pub mu: Vec<T>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<T>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<T>>>,
    pub kernels: BasisKernels<T>,
}

impl<T: Real> ParamsFile<T> {
    pub fn into_parts(self) -> Result<(RppParams<T>, BasisKernels<T>)> {
        let (u, m) = (self.num_entities, self.num_bases);
        let flatten = |name: &str, nested: Vec<Vec<Vec<T>>>| -> Result<Vec<T>> {
            let ok = nested.len() == u
                && nested
                    .iter()
                    .all(|row| row.len() == u && row.iter().all(|c| c.len() == m));
            if !ok {
                return Err(RppError::ShapeMismatch(format!(
                    "{name} must have shape {u}x{u}x{m}"
                )));
            }
            Ok(nested.into_iter().flatten().flatten().collect())
        };
        if self.mu.len() != u {
            return Err(RppError::ShapeMismatch(format!("mu must have length {u}")));
        }
        if self.kernels.len() != m {
            return Err(RppError::ShapeMismatch(format!("kernels must have {m} centers")));
        }
        let kernels = BasisKernels::new(self.kernels.centers, self.kernels.sigma, self.kernels.cutoff)?;
        let a = flatten("A", self.a)?;
        let b = flatten("B", self.b)?;
        Ok((RppParams::from_parts(m, self.mu, a, b)?, kernels))
    }
}
