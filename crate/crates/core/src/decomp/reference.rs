use nalgebra::DMatrix;

use crate::error::{QfemError, Result};

/// A signed permutation matrix: column `k` has the single entry `signs[k]` in
/// row `perm[k]`. Every unitary in the stiffness decomposition has this form.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<f64>,
}

impl SignedPermutation {
    pub fn identity(dim: usize) -> Self {
        Self { perm: (0..dim).collect(), signs: vec![1.0; dim] }
    }

    /// Swaps basis states `a` and `b`.
    pub fn transposition(dim: usize, a: usize, b: usize) -> Self {
        let mut out = Self::identity(dim);
        out.perm.swap(a, b);
        out
    }

    /// Diagonal ±1 matrix with −1 on `states`.
    pub fn phase(dim: usize, states: &[usize]) -> Self {
        let mut out = Self::identity(dim);
        for &s in states {
            out.signs[s] = -out.signs[s];
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p) && self.signs.iter().all(|&s| s == 1.0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p)
    }

    /// Basis states the matrix does not fix.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.perm[k] != k || self.signs[k] != 1.0).collect()
    }

    /// Disjoint 2-cycles of the permutation, as (low, high) pairs.
    pub fn swaps(&self) -> Vec<(usize, usize)> {
        (0..self.dim()).filter(|&k| self.perm[k] > k).map(|k| (k, self.perm[k])).collect()
    }

    /// States carrying a −1 sign.
    pub fn negated(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.signs[k] < 0.0).collect()
    }

    /// self · other (apply `other` first).
    pub fn compose(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        if self.dim() != other.dim() {
            return Err(QfemError::SizeMismatch { expected: self.dim(), actual: other.dim() });
        }
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let signs = other.perm.iter().zip(&other.signs).map(|(&p, &s)| self.signs[p] * s).collect();
        Ok(SignedPermutation { perm, signs })
    }

    /// y = M x for a real vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (k, (&p, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            y[p] += s * x[k];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (k, (&p, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            m[(p, k)] = s;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_disjoint_swaps() {
        let a = SignedPermutation::transposition(8, 0, 1);
        let b = SignedPermutation::transposition(8, 4, 5);
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.swaps(), vec![(0, 1), (4, 5)]);
        assert_eq!(ab.to_dense(), a.to_dense() * b.to_dense());
    }

    #[test]
    fn phase_and_apply() {
        let p = SignedPermutation::phase(4, &[0, 3]);
        assert!(p.is_diagonal());
        assert_eq!(p.apply(&[1.0, 2.0, 3.0, 4.0]), vec![-1.0, 2.0, 3.0, -4.0]);
        assert_eq!(p.support(), vec![0, 3]);
        assert_eq!(p.negated(), vec![0, 3]);
    }
}
