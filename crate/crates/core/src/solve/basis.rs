//! Polynomial corrections `ψ` to the Guillemin potential.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::field::{GuilleminPotential, PotentialField, PotentialJet};
use crate::polytope::DelzantPolytope;
use crate::Result;

/// Products `Π_i P_{α_i}(x_i)` of Legendre polynomials in the box coordinates
/// `x_i ∈ [-1, 1]`, over multi-indices with `2 ≤ |α| ≤ degree`. Affine
/// functions are left out since they do not change `Hess φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreBasis {
    n: usize,
    degree: usize,
    center: Vec<f64>,
    /// `dx_i / dz_i`.
    scale: Vec<f64>,
    indices: Vec<Vec<usize>>,
}

/// `P_k^{(r)}(x)` for `k ≤ degree`, `r ≤ 4`, stored as `[k][r]`.
fn legendre_table(degree: usize, x: f64) -> Vec<[f64; 5]> {
    let mut t = vec![[0.0; 5]; degree + 1];
    t[0][0] = 1.0;
    if degree == 0 {
        return t;
    }
    t[1][0] = x;
    t[1][1] = 1.0;
    for k in 1..degree {
        let kf = k as f64;
        for r in 0..5 {
            let lower = if r > 0 { r as f64 * t[k][r - 1] } else { 0.0 };
            t[k + 1][r] = ((2.0 * kf + 1.0) * (x * t[k][r] + lower) - kf * t[k - 1][r]) / (kf + 1.0);
        }
    }
    t
}

fn multi_indices(n: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let total: usize = idx.iter().sum();
        if (2..=degree).contains(&total) {
            out.push(idx.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                out.sort_by(|a, b| {
                    let (sa, sb): (usize, usize) = (a.iter().sum(), b.iter().sum());
                    sa.cmp(&sb).then_with(|| b.cmp(a))
                });
                return out;
            }
            idx[k] += 1;
            if idx[k] <= degree {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

impl LegendreBasis {
    pub fn new(p: &DelzantPolytope, degree: usize) -> Self {
        let n = p.dim();
        let (lo, hi) = p.bounding_box();
        let center = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let scale = lo.iter().zip(&hi).map(|(a, b)| 2.0 / (b - a)).collect();
        Self {
            n,
            degree,
            center,
            scale,
            indices: multi_indices(n, degree),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    fn tables(&self, z: &[f64]) -> Vec<Vec<[f64; 5]>> {
        (0..self.n)
            .map(|i| {
                let x = (z[i] - self.center[i]) * self.scale[i];
                let mut t = legendre_table(self.degree, x);
                for row in t.iter_mut() {
                    let mut f = 1.0;
                    for v in row.iter_mut() {
                        *v *= f;
                        f *= self.scale[i];
                    }
                }
                t
            })
            .collect()
    }

    /// Jets of every basis function at `z`.
    pub fn jets(&self, z: &[f64]) -> Vec<PotentialJet> {
        let n = self.n;
        let tabs = self.tables(z);
        // derivative of the basis function `alpha` along the multiset `dirs`
        let deriv = |alpha: &[usize], dirs: &[usize]| -> f64 {
            let mut counts = vec![0usize; n];
            for &d in dirs {
                counts[d] += 1;
            }
            (0..n).map(|i| tabs[i][alpha[i]][counts[i]]).product()
        };
        self.indices
            .iter()
            .map(|alpha| {
                let mut j = PotentialJet::zeros(n);
                j.value = deriv(alpha, &[]);
                for i in 0..n {
                    j.grad[i] = deriv(alpha, &[i]);
                    for k in 0..n {
                        j.hess[(i, k)] = deriv(alpha, &[i, k]);
                        for l in 0..n {
                            j.d3[(i * n + k) * n + l] = deriv(alpha, &[i, k, l]);
                            for m in 0..n {
                                j.d4[((i * n + k) * n + l) * n + m] = deriv(alpha, &[i, k, l, m]);
                            }
                        }
                    }
                }
                j
            })
            .collect()
    }

    /// `Σ c_m B_m` as a jet.
    pub fn combine(jets: &[PotentialJet], coeffs: &[f64], n: usize) -> PotentialJet {
        let mut out = PotentialJet::zeros(n);
        for (j, &c) in jets.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            out.value += c * j.value;
            out.grad.iter_mut().zip(&j.grad).for_each(|(a, b)| *a += c * b);
            out.hess += &j.hess * c;
            out.d3.iter_mut().zip(&j.d3).for_each(|(a, b)| *a += c * b);
            out.d4.iter_mut().zip(&j.d4).for_each(|(a, b)| *a += c * b);
        }
        out
    }

    /// Least-squares coefficients of `g` sampled on `points`; the affine part of
    /// `g` is fitted alongside and discarded.
    pub fn fit(&self, points: &[Vec<f64>], g: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
        let n = self.n;
        let m = self.len();
        let mut a = DMatrix::zeros(points.len(), m + n + 1);
        let mut b = DVector::zeros(points.len());
        for (r, z) in points.iter().enumerate() {
            for (c, j) in self.jets(z).iter().enumerate() {
                a[(r, c)] = j.value;
            }
            for i in 0..n {
                a[(r, m + i)] = z[i];
            }
            a[(r, m + n)] = 1.0;
            b[r] = g(z);
        }
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, 1e-12)
            .map_err(|_| crate::Error::Singular("basis fit"))?;
        Ok(x.iter().take(m).copied().collect())
    }
}

/// `φ = φ_G + Σ c_m B_m + (affine)`.
#[derive(Debug, Clone)]
pub struct CorrectedPotential {
    guillemin: GuilleminPotential,
    basis: LegendreBasis,
    coeffs: Vec<f64>,
    /// `(b_1, ..., b_n, b_0)`, added as `b·z + b_0`.
    affine: Vec<f64>,
}

impl CorrectedPotential {
    pub fn new(guillemin: GuilleminPotential, basis: LegendreBasis, coeffs: Vec<f64>, affine: Vec<f64>) -> Self {
        Self {
            guillemin,
            basis,
            coeffs,
            affine,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn affine(&self) -> &[f64] {
        &self.affine
    }

    pub fn basis(&self) -> &LegendreBasis {
        &self.basis
    }

    /// `ψ(z)` including the affine gauge term.
    pub fn correction(&self, z: &[f64]) -> f64 {
        let n = self.basis.n;
        let jets = self.basis.jets(z);
        let lin: f64 = (0..n).map(|i| self.affine[i] * z[i]).sum();
        LegendreBasis::combine(&jets, &self.coeffs, n).value + lin + self.affine[n]
    }
}

impl PotentialField for CorrectedPotential {
    fn dim(&self) -> usize {
        self.basis.n
    }

    fn jet(&self, z: &[f64]) -> Result<PotentialJet> {
        let n = self.basis.n;
        let mut out = self.guillemin.jet(z)?;
        out.add_assign(&LegendreBasis::combine(&self.basis.jets(z), &self.coeffs, n));
        for i in 0..n {
            out.value += self.affine[i] * z[i];
            out.grad[i] += self.affine[i];
        }
        out.value += self.affine[n];
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Facet;

    #[test]
    fn legendre_values() {
        let t = legendre_table(4, 0.3);
        let x: f64 = 0.3;
        assert!((t[2][0] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((t[2][1] - 3.0 * x).abs() < 1e-15);
        assert!((t[2][2] - 3.0).abs() < 1e-15);
        assert!((t[3][3] - 15.0).abs() < 1e-13);
        assert!((t[4][4] - 105.0).abs() < 1e-12);
        assert_eq!(t[3][4], 0.0);
    }

    #[test]
    fn basis_skips_affine() {
        let p = DelzantPolytope::new(
            2,
            vec![
                Facet::new(vec![1, 0], 1.0),
                Facet::new(vec![0, 1], 1.0),
                Facet::new(vec![-1, -1], 1.0),
            ],
            None,
        )
        .unwrap();
        let b = LegendreBasis::new(&p, 4);
        // 15 monomials of degree ≤ 4 minus 3 affine ones
        assert_eq!(b.len(), 12);
        assert!(b.indices().iter().all(|a| a.iter().sum::<usize>() >= 2));
    }

    #[test]
    fn fit_reproduces_a_quadratic() {
        let p = DelzantPolytope::new(1, vec![Facet::new(vec![1], 1.0), Facet::new(vec![-1], 1.0)], None)
            .unwrap();
        let b = LegendreBasis::new(&p, 3);
        let pts: Vec<Vec<f64>> = (0..9).map(|k| vec![-0.8 + 0.2 * k as f64]).collect();
        let c = b.fit(&pts, |z| 3.0 * z[0] * z[0] + z[0] - 2.0).unwrap();
        // 3z² = 2 P_2 + 1, the affine remainder is discarded
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!(c[1].abs() < 1e-12);
    }
}
