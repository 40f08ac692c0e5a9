//! Metric fields `z ↦ H(z)` with first and second derivatives.
//!
//! `H` is the torus block of a metric of involutive type; `G = H^{-1}` is the
//! block on moment coordinates. Every evaluator returns a [`FieldJet`] whose
//! index symmetries hold exactly, so algebraic identities between curvature
//! quantities hold bit-for-bit.

mod analytic;
mod boundary;
mod grid;
mod potential;

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg;
use crate::math;
use crate::Result;

pub use analytic::{analytic_field, AnalyticField, ConstantField, HessianFn, GradientFn, MatrixFn};
pub use boundary::{check_boundary_conditions, BoundaryReport, FacetBoundary};
pub use grid::{GridField, Spline1d};
pub(crate) use potential::jet_from_potential;
pub use potential::{
    field_from_potential, guillemin_field, GuilleminPotential, PotentialField, PotentialJet,
    PotentialMetric, QuadraticPotential, SharedPotential, SumPotential,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Potential,
    Grid,
    Sum,
}

/// `H(z)` with `H_{ij,k}` in `dh[k]` and `H_{ij,kl}` in `d2h[k * n + l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub h: DMatrix<f64>,
    pub dh: Vec<DMatrix<f64>>,
    pub d2h: Vec<DMatrix<f64>>,
}

impl FieldJet {
    pub fn zeros(n: usize) -> Self {
        Self {
            h: linalg::zeros(n),
            dh: (0..n).map(|_| linalg::zeros(n)).collect(),
            d2h: (0..n * n).map(|_| linalg::zeros(n)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn d2(&self, k: usize, l: usize) -> &DMatrix<f64> {
        &self.d2h[k * self.dim() + l]
    }

    /// `H_{ij,k}`.
    #[inline]
    pub fn h1(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dh[k][(i, j)]
    }

    /// `H_{ij,kl}`.
    #[inline]
    pub fn h2(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.d2h[k * self.dim() + l][(i, j)]
    }

    /// Forces the symmetries in `(i, j)` and `(k, l)` to hold exactly.
    pub fn symmetrize(&mut self) {
        let n = self.dim();
        sym(&mut self.h);
        self.dh.iter_mut().for_each(sym);
        for k in 0..n {
            for l in k + 1..n {
                let avg = (&self.d2h[k * n + l] + &self.d2h[l * n + k]) * 0.5;
                self.d2h[k * n + l] = avg.clone();
                self.d2h[l * n + k] = avg;
            }
        }
        self.d2h.iter_mut().for_each(sym);
    }

    /// `self + t * other`, entry by entry on every derivative order.
    pub fn add_scaled(&self, other: &FieldJet, t: f64) -> FieldJet {
        FieldJet {
            h: &self.h + &other.h * t,
            dh: self.dh.iter().zip(&other.dh).map(|(a, b)| a + b * t).collect(),
            d2h: self.d2h.iter().zip(&other.d2h).map(|(a, b)| a + b * t).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let all = core::iter::once(&self.h)
            .chain(self.dh.iter())
            .chain(self.d2h.iter());
        math::max_abs(all.flat_map(|m| m.iter().copied()))
    }
}

fn sym(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub trait MetricField {
    fn dim(&self) -> usize;
    fn jet(&self, z: &[f64]) -> Result<FieldJet>;
    fn provenance(&self) -> Provenance;

    fn h(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.jet(z)?.h)
    }
}

pub type SharedField = Arc<dyn MetricField + Send + Sync>;

impl core::fmt::Debug for dyn MetricField + Send + Sync {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim())
            .field("provenance", &self.provenance())
            .finish()
    }
}

impl<T: MetricField + ?Sized> MetricField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        (**self).jet(z)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

impl<T: MetricField + ?Sized> MetricField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        (**self).jet(z)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

/// Pointwise `H + t D`.
#[derive(Clone)]
pub struct SumField {
    base: SharedField,
    perturbation: SharedField,
    t: f64,
}

impl core::fmt::Debug for SumField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SumField").field("t", &self.t).finish_non_exhaustive()
    }
}

pub fn sum_field(base: SharedField, perturbation: SharedField, t: f64) -> Result<SumField> {
    if base.dim() != perturbation.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: base.dim(),
            got: perturbation.dim(),
        });
    }
    Ok(SumField {
        base,
        perturbation,
        t,
    })
}

impl SumField {
    pub fn t(&self) -> f64 {
        self.t
    }
}

impl MetricField for SumField {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        let b = self.base.jet(z)?;
        if self.t == 0.0 {
            return Ok(b);
        }
        Ok(b.add_scaled(&self.perturbation.jet(z)?, self.t))
    }
    fn provenance(&self) -> Provenance {
        Provenance::Sum
    }
}

/// Push-forward of a field under `z ↦ A z`: `H'(Az) = A H(z) Aᵀ`.
#[derive(Clone)]
pub struct TransformedField {
    inner: SharedField,
    map: crate::UnimodularMap,
}

impl core::fmt::Debug for TransformedField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TransformedField").field("map", &self.map).finish_non_exhaustive()
    }
}

impl TransformedField {
    pub fn new(inner: SharedField, map: crate::UnimodularMap) -> Result<Self> {
        if inner.dim() != map.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: inner.dim(),
                got: map.dim(),
            });
        }
        Ok(Self { inner, map })
    }
}

impl MetricField for TransformedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        let n = self.dim();
        let a = self.map.matrix();
        let b = self.map.inverse_matrix();
        let src = self.inner.jet(&self.map.apply_inverse(z))?;
        let conj = |m: &DMatrix<f64>| &a * m * a.transpose();
        let mut out = FieldJet::zeros(n);
        out.h = conj(&src.h);
        // ∂/∂z'_k = Σ_m B_{mk} ∂/∂z_m with B = A^{-1}
        for k in 0..n {
            let mut acc = linalg::zeros(n);
            for m in 0..n {
                if b[(m, k)] != 0.0 {
                    acc += &src.dh[m] * b[(m, k)];
                }
            }
            out.dh[k] = conj(&acc);
            for l in 0..n {
                let mut acc = linalg::zeros(n);
                for m in 0..n {
                    for p in 0..n {
                        let c = b[(m, k)] * b[(p, l)];
                        if c != 0.0 {
                            acc += src.d2(m, p) * c;
                        }
                    }
                }
                out.d2h[k * n + l] = conj(&acc);
            }
        }
        out.symmetrize();
        Ok(out)
    }

    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
}

/// Rank-three tensor stored densely as `data[(i * n + j) * n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        math::max_abs(self.data.iter().copied())
    }
}

/// `K_{ijk} = ∂_k G_{ij} - ∂_i G_{kj}` with `G = H^{-1}`; vanishes iff Kähler.
pub fn kahler_defect_from_jet(jet: &FieldJet) -> Result<Tensor3> {
    let n = jet.dim();
    let g = linalg::inverse(&jet.h)?;
    let dg: Vec<DMatrix<f64>> = jet.dh.iter().map(|dh| -(&g * dh * &g)).collect();
    let mut data = alloc::vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                data[(i * n + j) * n + k] = dg[k][(i, j)] - dg[i][(k, j)];
            }
        }
    }
    Ok(Tensor3 { n, data })
}

pub fn kahler_defect<F: MetricField + ?Sized>(field: &F, z: &[f64]) -> Result<Tensor3> {
    kahler_defect_from_jet(&field.jet(z)?)
}
