//! Small dense helpers on top of `nalgebra`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::math;
use crate::{Error, Result};

/// Exact determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn int_det(rows: &[Vec<i64>]) -> i64 {
    let n = rows.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    (sign * m[n - 1][n - 1]) as i64
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let (piv, val) = (r..m.len())
            .map(|i| (i, math::abs(m[i][c])))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        m.swap(r, piv);
        for i in r + 1..m.len() {
            let f = m[i][c] / m[r][c];
            for j in c..ncols {
                m[i][j] -= f * m[r][j];
            }
        }
        r += 1;
    }
    r
}

/// Generator of a one-dimensional null space of an `(n-1) x n` matrix via signed minors.
pub fn cofactor_null_vector(rows: &[Vec<i64>], n: usize) -> Vec<i64> {
    (0..n)
        .map(|k| {
            let minor: Vec<Vec<i64>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let d = int_det(&minor);
            if k % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

pub fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.lu().solve(b).ok_or(Error::Singular("linear solve"))
}

pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone().try_inverse().ok_or(Error::Singular("matrix inverse"))
}

/// Eigenvalues of the pencil `(d, h)` for symmetric `d` and positive-definite `h`.
pub fn generalized_eigenvalues(d: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<DVector<f64>> {
    let chol = h
        .clone()
        .cholesky()
        .ok_or(Error::Singular("Cholesky of a non positive-definite matrix"))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(h.nrows(), h.nrows()))
        .ok_or(Error::Singular("triangular solve"))?;
    let m = &linv * d * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    Ok(m.symmetric_eigenvalues())
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn identity(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> DMatrix<f64> {
    DMatrix::zeros(n, n)
}

pub fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bareiss_matches_known_determinants() {
        assert_eq!(int_det(&[vec![1, 0], vec![0, 1]]), 1);
        assert_eq!(int_det(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(int_det(&[vec![1, 0], vec![-1, -2]]), -2);
        assert_eq!(int_det(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]), 18);
        assert_eq!(int_det(&[]), 1);
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(5, 3).len(), 10);
    }

    #[test]
    fn null_vector_is_orthogonal_to_rows() {
        let rows = vec![vec![1, 2, 3], vec![0, 1, -1]];
        let d = cofactor_null_vector(&rows, 3);
        for r in &rows {
            assert_eq!(r.iter().zip(&d).map(|(a, b)| a * b).sum::<i64>(), 0);
        }
        assert_eq!(cofactor_null_vector(&[], 1), vec![1]);
    }
}
