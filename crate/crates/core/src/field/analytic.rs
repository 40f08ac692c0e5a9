use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{FieldJet, MetricField, Provenance};
use crate::math;
use crate::polytope::DelzantPolytope;
use crate::{Error, Result};

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// Returns `[∂_1 H, ..., ∂_n H]`.
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
/// Returns `∂_k ∂_l H` at index `k * n + l`.
pub type HessianFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// Field given by closures; missing derivatives fall back to Richardson-
/// extrapolated central differences.
#[derive(Clone)]
pub struct AnalyticField {
    n: usize,
    h: MatrixFn,
    dh: Option<GradientFn>,
    d2h: Option<HessianFn>,
    domain: Option<DelzantPolytope>,
}

impl core::fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("AnalyticField")
            .field("n", &self.n)
            .field("analytic_dh", &self.dh.is_some())
            .field("analytic_d2h", &self.d2h.is_some())
            .finish()
    }
}

/// Builds a field from `H` and optional derivative closures.
///
/// When `domain` is given, finite-difference steps scale with the distance
/// to the nearest facet and queries outside the open polytope are rejected.
pub fn analytic_field(
    n: usize,
    h: MatrixFn,
    dh: Option<GradientFn>,
    d2h: Option<HessianFn>,
    domain: Option<DelzantPolytope>,
) -> AnalyticField {
    AnalyticField {
        n,
        h,
        dh,
        d2h,
        domain,
    }
}

impl AnalyticField {
    fn local_scale(&self, z: &[f64]) -> f64 {
        match &self.domain {
            Some(p) => p.facet_distance(z).min(1.0),
            None => 1.0,
        }
    }

    fn shifted(z: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
        let mut w = z.to_vec();
        for &(k, d) in moves {
            w[k] += d;
        }
        w
    }

    fn fd_first(&self, z: &[f64], k: usize, step: f64) -> DMatrix<f64> {
        let central = |h: f64| {
            ((self.h)(&Self::shifted(z, &[(k, h)])) - (self.h)(&Self::shifted(z, &[(k, -h)])))
                / (2.0 * h)
        };
        (central(step * 0.5) * 4.0 - central(step)) / 3.0
    }

    fn fd_second_from_gradient(&self, dh: &GradientFn, z: &[f64], l: usize, step: f64) -> Vec<DMatrix<f64>> {
        let central = |h: f64| -> Vec<DMatrix<f64>> {
            let p = dh(&Self::shifted(z, &[(l, h)]));
            let m = dh(&Self::shifted(z, &[(l, -h)]));
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        let coarse = central(step);
        let fine = central(step * 0.5);
        fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect()
    }

    fn fd_second_from_values(&self, z: &[f64], k: usize, l: usize, step: f64) -> DMatrix<f64> {
        let h = &self.h;
        let second = |s: f64| {
            if k == l {
                (h(&Self::shifted(z, &[(k, s)])) - h(z) * 2.0 + h(&Self::shifted(z, &[(k, -s)])))
                    / (s * s)
            } else {
                (h(&Self::shifted(z, &[(k, s), (l, s)])) - h(&Self::shifted(z, &[(k, s), (l, -s)]))
                    - h(&Self::shifted(z, &[(k, -s), (l, s)]))
                    + h(&Self::shifted(z, &[(k, -s), (l, -s)])))
                    / (4.0 * s * s)
            }
        };
        (second(step * 0.5) * 4.0 - second(step)) / 3.0
    }
}

impl MetricField for AnalyticField {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        if let Some(p) = &self.domain {
            p.check_interior(z)?;
        }
        let n = self.n;
        let scale = self.local_scale(z);
        let h1 = math::cbrt(f64::EPSILON) * scale;
        let h2 = libm::sqrt(libm::sqrt(f64::EPSILON)) * scale;
        let h = (self.h)(z);
        let dh = match &self.dh {
            Some(f) => f(z),
            None => (0..n).map(|k| self.fd_first(z, k, h1)).collect(),
        };
        let d2h = match (&self.d2h, &self.dh) {
            (Some(f), _) => f(z),
            (None, Some(g)) => {
                let mut out: Vec<DMatrix<f64>> = (0..n * n).map(|_| DMatrix::zeros(n, n)).collect();
                for l in 0..n {
                    for (k, m) in self.fd_second_from_gradient(g, z, l, h1).into_iter().enumerate() {
                        out[k * n + l] = m;
                    }
                }
                out
            }
            (None, None) => {
                let mut out: Vec<DMatrix<f64>> = (0..n * n).map(|_| DMatrix::zeros(n, n)).collect();
                for k in 0..n {
                    for l in k..n {
                        let m = self.fd_second_from_values(z, k, l, h2);
                        out[l * n + k] = m.clone();
                        out[k * n + l] = m;
                    }
                }
                out
            }
        };
        if dh.len() != n || d2h.len() != n * n || h.nrows() != n || h.ncols() != n {
            return Err(Error::InvalidArgument("closure returned inconsistent shapes".into()));
        }
        let mut jet = FieldJet { h, dh, d2h };
        jet.symmetrize();
        Ok(jet)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

/// Constant field; the flat metric when the matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField {
    h: DMatrix<f64>,
}

impl ConstantField {
    pub fn new(h: DMatrix<f64>) -> Self {
        Self { h }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }
}

impl MetricField for ConstantField {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let mut jet = FieldJet::zeros(n);
        jet.h = self.h.clone();
        jet.symmetrize();
        Ok(jet)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn parabola() -> AnalyticField {
        analytic_field(
            1,
            Arc::new(|z: &[f64]| DMatrix::from_element(1, 1, 1.0 - z[0] * z[0])),
            None,
            None,
            None,
        )
    }

    #[test]
    fn finite_difference_fallback_on_parabola() {
        let jet = parabola().jet(&[0.3]).unwrap();
        assert!((jet.h[(0, 0)] - 0.91).abs() < 1e-15);
        assert!((jet.dh[0][(0, 0)] + 0.6).abs() < 1e-9);
        assert!((jet.d2h[0][(0, 0)] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn gradient_driven_second_derivatives() {
        let f = analytic_field(
            2,
            Arc::new(|z: &[f64]| {
                DMatrix::from_row_slice(2, 2, &[2.0 + z[0] * z[1], z[0] * z[0], z[0] * z[0], 3.0])
            }),
            Some(Arc::new(|z: &[f64]| {
                vec![
                    DMatrix::from_row_slice(2, 2, &[z[1], 2.0 * z[0], 2.0 * z[0], 0.0]),
                    DMatrix::from_row_slice(2, 2, &[z[0], 0.0, 0.0, 0.0]),
                ]
            })),
            None,
            None,
        );
        let jet = f.jet(&[0.2, -0.4]).unwrap();
        assert!((jet.h2(0, 0, 0, 1) - 1.0).abs() < 1e-9);
        assert!((jet.h2(0, 1, 0, 0) - 2.0).abs() < 1e-9);
        assert_eq!(jet.h2(0, 0, 0, 1), jet.h2(0, 0, 1, 0));
    }

    #[test]
    fn domain_is_enforced() {
        let p = DelzantPolytope::new(
            1,
            vec![crate::Facet::new(vec![1], 1.0), crate::Facet::new(vec![-1], 1.0)],
            None,
        )
        .unwrap();
        let f = analytic_field(1, Arc::new(|_: &[f64]| DMatrix::identity(1, 1)), None, None, Some(p));
        assert!(matches!(f.jet(&[1.5]), Err(Error::OutsideInterior(_))));
    }
}
