use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg;
use crate::{Error, Result};

/// An element of `GL(n, Z)` acting on moment coordinates by `z ↦ A z`.
///
/// Normals transform contravariantly (`u ↦ A^{-T} u`), torus coordinates the
/// same way, so the metric block transforms as `H ↦ A H Aᵀ` and the linear
/// part of a Hamiltonian potential as `a ↦ A^{-T} a`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularMap {
    matrix: Vec<Vec<i64>>,
    inverse: Vec<Vec<i64>>,
}

impl UnimodularMap {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let det = linalg::int_det(&matrix);
        if det.abs() != 1 {
            return Err(Error::InvalidArgument("matrix is not unimodular".into()));
        }
        // inverse = adj(A) / det
        let inverse = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let minor: Vec<Vec<i64>> = (0..n)
                            .filter(|&r| r != j)
                            .map(|r| (0..n).filter(|&c| c != i).map(|c| matrix[r][c]).collect())
                            .collect();
                        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                        sign * linalg::int_det(&minor) * det
                    })
                    .collect()
            })
            .collect();
        Ok(Self { matrix, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let m: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self {
            matrix: m.clone(),
            inverse: m,
        }
    }

    /// Swap of coordinates `i` and `j`.
    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity(n).matrix;
        m.swap(i, j);
        Self::new(m).expect("permutation is unimodular")
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.matrix[r][c] as f64)
    }

    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.inverse[r][c] as f64)
    }

    /// `A z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|r| r.iter().zip(z).map(|(&a, x)| a as f64 * x).sum())
            .collect()
    }

    /// `A^{-1} z`.
    pub fn apply_inverse(&self, z: &[f64]) -> Vec<f64> {
        self.inverse
            .iter()
            .map(|r| r.iter().zip(z).map(|(&a, x)| a as f64 * x).sum())
            .collect()
    }

    /// `A^{-T} u` for an integer covector.
    pub fn covector(&self, u: &[i64]) -> Vec<i64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|k| self.inverse[k][i] * u[k]).sum())
            .collect()
    }

    /// `A^{-T} a` for a real covector.
    pub fn covector_f64(&self, a: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|k| self.inverse[k][i] as f64 * a[k]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn inverse_is_exact() {
        let a = UnimodularMap::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let z = [0.3, -0.7];
        let back = a.apply_inverse(&a.apply(&z));
        assert!((back[0] - z[0]).abs() < 1e-15 && (back[1] - z[1]).abs() < 1e-15);
        assert!(UnimodularMap::new(vec![vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn covector_pairing_is_preserved() {
        let a = UnimodularMap::new(vec![vec![1, 1, 0], vec![0, 1, 0], vec![2, 1, 1]]).unwrap();
        let u = [1i64, -2, 3];
        let z = [0.25, 0.5, -1.0];
        let lhs: f64 = u.iter().zip(&z).map(|(&u, x)| u as f64 * x).sum();
        let uz = a.covector(&u);
        let az = a.apply(&z);
        let rhs: f64 = uz.iter().zip(&az).map(|(&u, x)| u as f64 * x).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
