//! Symplectic potentials and the Kähler fields `H = (Hess φ)^{-1}` they induce.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{FieldJet, MetricField, Provenance};
use crate::linalg;
use crate::math;
use crate::polytope::DelzantPolytope;
use crate::{Error, Result};

/// `φ` with derivatives through order four; `d3` is indexed `(i*n+j)*n+k`
/// and `d4` is indexed `((i*n+j)*n+k)*n+l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
}

impl PotentialJet {
    pub fn zeros(n: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; n],
            hess: DMatrix::zeros(n, n),
            d3: vec![0.0; n * n * n],
            d4: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn add_assign(&mut self, other: &PotentialJet) {
        self.value += other.value;
        self.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a += b);
        self.hess += &other.hess;
        self.d3.iter_mut().zip(&other.d3).for_each(|(a, b)| *a += b);
        self.d4.iter_mut().zip(&other.d4).for_each(|(a, b)| *a += b);
    }
}

pub trait PotentialField {
    fn dim(&self) -> usize;
    fn jet(&self, z: &[f64]) -> Result<PotentialJet>;
}

pub type SharedPotential = Arc<dyn PotentialField + Send + Sync>;

impl<T: PotentialField + ?Sized> PotentialField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn jet(&self, z: &[f64]) -> Result<PotentialJet> {
        (**self).jet(z)
    }
}

/// The canonical potential `φ = ½ Σ_j ℓ_j log ℓ_j` of a Delzant polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct GuilleminPotential {
    polytope: DelzantPolytope,
}

pub fn guillemin_field(p: &DelzantPolytope) -> GuilleminPotential {
    GuilleminPotential {
        polytope: p.clone(),
    }
}

impl GuilleminPotential {
    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }
}

impl PotentialField for GuilleminPotential {
    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn jet(&self, z: &[f64]) -> Result<PotentialJet> {
        let n = self.dim();
        self.polytope.check_interior(z)?;
        let mut out = PotentialJet::zeros(n);
        for f in self.polytope.facets() {
            let l = f.eval(z);
            let u = f.normal_f64();
            let (r1, r2, r3) = (1.0 / l, 1.0 / (l * l), 1.0 / (l * l * l));
            out.value += 0.5 * l * math::ln(l);
            for i in 0..n {
                out.grad[i] += 0.5 * u[i] * (math::ln(l) + 1.0);
                for j in 0..n {
                    let uij = u[i] * u[j];
                    out.hess[(i, j)] += 0.5 * uij * r1;
                    for k in 0..n {
                        let uijk = uij * u[k];
                        out.d3[(i * n + j) * n + k] -= 0.5 * uijk * r2;
                        for m in 0..n {
                            out.d4[((i * n + j) * n + k) * n + m] += uijk * u[m] * r3;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `φ = ½ zᵀ Q z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPotential {
    q: DMatrix<f64>,
}

impl QuadraticPotential {
    pub fn new(q: DMatrix<f64>) -> Self {
        let q = (&q + q.transpose()) * 0.5;
        Self { q }
    }

    pub fn standard(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }
}

impl PotentialField for QuadraticPotential {
    fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn jet(&self, z: &[f64]) -> Result<PotentialJet> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let mut out = PotentialJet::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.grad[i] += self.q[(i, j)] * z[j];
                out.value += 0.5 * z[i] * self.q[(i, j)] * z[j];
            }
        }
        out.hess = self.q.clone();
        Ok(out)
    }
}

/// Pointwise sum of potentials.
#[derive(Clone)]
pub struct SumPotential {
    parts: Vec<SharedPotential>,
}

impl core::fmt::Debug for SumPotential {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SumPotential").field("parts", &self.parts.len()).finish()
    }
}

impl SumPotential {
    pub fn new(parts: Vec<SharedPotential>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidArgument("empty potential sum".into()));
        };
        let n = first.dim();
        if let Some(bad) = parts.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dim(),
            });
        }
        Ok(Self { parts })
    }
}

impl PotentialField for SumPotential {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn jet(&self, z: &[f64]) -> Result<PotentialJet> {
        let mut out = self.parts[0].jet(z)?;
        for p in &self.parts[1..] {
            out.add_assign(&p.jet(z)?);
        }
        Ok(out)
    }
}

/// The field `H = (Hess φ)^{-1}` of a potential.
#[derive(Debug, Clone)]
pub struct PotentialMetric<P> {
    potential: P,
}

pub fn field_from_potential<P: PotentialField>(potential: P) -> PotentialMetric<P> {
    PotentialMetric { potential }
}

impl<P: PotentialField> PotentialMetric<P> {
    pub fn potential(&self) -> &P {
        &self.potential
    }
}

/// Matrix-inverse chain rule: `H_{,k} = -H G_{,k} H` and its derivative.
pub(crate) fn jet_from_potential(pj: &PotentialJet) -> Result<FieldJet> {
    let n = pj.dim();
    let h = linalg::inverse(&pj.hess).map_err(|_| Error::Singular("Hessian of the potential"))?;
    let gk: Vec<DMatrix<f64>> = (0..n)
        .map(|k| DMatrix::from_fn(n, n, |i, j| pj.d3[(i * n + j) * n + k]))
        .collect();
    let hk: Vec<DMatrix<f64>> = gk.iter().map(|g| -(&h * g * &h)).collect();
    let mut d2h: Vec<DMatrix<f64>> = (0..n * n).map(|_| DMatrix::zeros(n, n)).collect();
    for k in 0..n {
        for l in k..n {
            let gkl = DMatrix::from_fn(n, n, |i, j| pj.d4[((i * n + j) * n + k) * n + l]);
            let m = -(&hk[l] * &gk[k] * &h + &h * gkl * &h + &h * &gk[k] * &hk[l]);
            d2h[l * n + k] = m.clone();
            d2h[k * n + l] = m;
        }
    }
    let mut jet = FieldJet { h, dh: hk, d2h };
    jet.symmetrize();
    Ok(jet)
}

impl<P: PotentialField> MetricField for PotentialMetric<P> {
    fn dim(&self) -> usize {
        self.potential.dim()
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        jet_from_potential(&self.potential.jet(z)?)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Potential
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Facet;

    fn interval() -> DelzantPolytope {
        DelzantPolytope::new(1, vec![Facet::new(vec![1], 1.0), Facet::new(vec![-1], 1.0)], None)
            .unwrap()
    }

    #[test]
    fn guillemin_interval_is_one_minus_z_squared() {
        let f = field_from_potential(guillemin_field(&interval()));
        let jet = f.jet(&[0.0]).unwrap();
        assert!((jet.h[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(jet.dh[0][(0, 0)].abs() < 1e-15);
        assert!((jet.d2h[0][(0, 0)] + 2.0).abs() < 1e-14);
        for z in [-0.9, -0.3, 0.55, 0.99] {
            let jet = f.jet(&[z]).unwrap();
            assert!((jet.h[(0, 0)] - (1.0 - z * z)).abs() < 1e-14);
            assert!((jet.dh[0][(0, 0)] + 2.0 * z).abs() < 1e-12);
            assert!((jet.d2h[0][(0, 0)] + 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn guillemin_rejects_boundary_queries() {
        let g = guillemin_field(&interval());
        assert!(matches!(g.jet(&[1.0]), Err(Error::OutsideInterior(_))));
        assert!(matches!(g.jet(&[-1.5]), Err(Error::OutsideInterior(_))));
    }

    #[test]
    fn flat_potential_gives_identity() {
        let f = field_from_potential(QuadraticPotential::standard(3));
        let jet = f.jet(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(jet.h, DMatrix::identity(3, 3));
        assert_eq!(jet.max_abs(), 1.0);
        assert!(jet.dh.iter().chain(&jet.d2h).all(|m| m.amax() == 0.0));
    }

    #[test]
    fn singular_hessian_is_an_error() {
        let f = field_from_potential(QuadraticPotential::new(DMatrix::zeros(2, 2)));
        assert!(matches!(f.jet(&[0.0, 0.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn cp2_hessian_is_positive_definite_at_origin() {
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
        let j = guillemin_field(&p).jet(&[0.0, 0.0]).unwrap();
        // ½ [[1 + 1, 1], [1, 1 + 1]]
        assert!((j.hess[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((j.hess[(0, 1)] - 0.5).abs() < 1e-15);
        assert!(linalg::min_eigenvalue(&j.hess) > 0.0);
    }
}
