//! Pointwise Chern curvature of toric almost-Kähler metrics.
//!
//! With `ω = Σ dz_i ∧ dt_i` and the metric block `H`:
//!
//! * `ρ^∇ = -½ Σ H_{li,ik} dz_k ∧ dt_l` and `s^c = -½ Σ H_{ij,ij}`;
//! * `Δ f = -Σ a_i H_{ij,j}` and `|df|² = Σ a_i a_j H_{ij}` for `f = a·z + a₀`;
//! * the modified scalar `s^c_ξ = s^c - n - 2Δf + 2f - 2|df|²`.
//!
//! The soliton residual `S_i = ½ Σ_j H_{ij,j} - Σ_j a_j H_{ij} + z_i` vanishes
//! exactly when `ρ^∇ = ω - dd^c f`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::field::{kahler_defect_from_jet, FieldJet, MetricField};
use crate::math;
use crate::polytope::UnimodularMap;
use crate::{Error, Result};

/// Coefficients `(a_1, ..., a_n, a_{n+1})` of `f(z) = Σ a_i z_i + a_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonVector {
    coeffs: Vec<f64>,
}

impl SolitonVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument("soliton vector needs n + 1 >= 2 entries".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("soliton vector entries must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: alloc::vec![0.0; n + 1],
        }
    }

    pub fn from_parts(linear: &[f64], constant: f64) -> Result<Self> {
        let mut c = linear.to_vec();
        c.push(constant);
        Self::new(c)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn linear(&self) -> &[f64] {
        &self.coeffs[..self.dim()]
    }

    pub fn constant(&self) -> f64 {
        self.coeffs[self.dim()]
    }

    /// `f(z)`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.linear().iter().zip(z).map(|(a, x)| a * x).sum::<f64>() + self.constant()
    }

    /// `a ↦ -a`, relating the two sign conventions for `ρ^∇ - ω`.
    pub fn flipped(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Covariant transport under `z ↦ A z`: the linear part goes to `A^{-T} a`.
    pub fn transform(&self, map: &UnimodularMap) -> Self {
        let mut coeffs = map.covector_f64(self.linear());
        coeffs.push(self.constant());
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// `ρ_{kl} = -½ Σ_i H_{li,ik}`, the coefficient of `dz_k ∧ dt_l`.
pub fn chern_ricci_jet(jet: &FieldJet) -> DMatrix<f64> {
    let n = jet.dim();
    DMatrix::from_fn(n, n, |k, l| -0.5 * (0..n).map(|i| jet.h2(l, i, i, k)).sum::<f64>())
}

pub fn chern_scalar_jet(jet: &FieldJet) -> f64 {
    let n = jet.dim();
    -0.5 * (0..n)
        .map(|i| (0..n).map(|j| jet.h2(i, j, i, j)).sum::<f64>())
        .sum::<f64>()
}

/// `Σ_j H_{ij,j}` for each `i`.
fn divergence(jet: &FieldJet) -> Vec<f64> {
    let n = jet.dim();
    (0..n).map(|i| (0..n).map(|j| jet.h1(i, j, j)).sum()).collect()
}

pub fn laplacian_f_jet(jet: &FieldJet, a: &SolitonVector) -> f64 {
    -divergence(jet)
        .iter()
        .zip(a.linear())
        .map(|(d, ai)| ai * d)
        .sum::<f64>()
}

pub fn grad_norm_f_jet(jet: &FieldJet, a: &SolitonVector) -> f64 {
    let al = a.linear();
    let n = jet.dim();
    (0..n)
        .map(|i| (0..n).map(|j| al[i] * al[j] * jet.h[(i, j)]).sum::<f64>())
        .sum()
}

pub fn modified_scalar_jet(jet: &FieldJet, a: &SolitonVector, z: &[f64]) -> f64 {
    let n = jet.dim();
    let al = a.linear();
    let div = divergence(jet);
    let first: f64 = (0..n).map(|i| al[i] * div[i]).sum();
    let quad = grad_norm_f_jet(jet, a);
    chern_scalar_jet(jet) + 2.0 * first - 2.0 * quad + 2.0 * a.eval(z) - n as f64
}

/// `e^{2f}` times `-½ Σ (e^{-2f} H_{ij})_{,ij} + e^{-2f}(2f - n)`, expanded
/// by the product rule on `E = e^{-2f}` with `E_{,i} = -2 a_i E`.
pub fn modified_scalar_divform_jet(jet: &FieldJet, a: &SolitonVector, z: &[f64]) -> f64 {
    let n = jet.dim();
    let al = a.linear();
    let f = a.eval(z);
    let e = math::exp(-2.0 * f);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e_i = -2.0 * al[i] * e;
            let e_j = -2.0 * al[j] * e;
            let e_ij = 4.0 * al[i] * al[j] * e;
            acc += e_ij * jet.h[(i, j)]
                + e_i * jet.h1(i, j, j)
                + e_j * jet.h1(i, j, i)
                + e * jet.h2(i, j, i, j);
        }
    }
    let rhs = -0.5 * acc + e * (2.0 * f - n as f64);
    rhs / e
}

/// `S_i = ½ Σ_j H_{ij,j} - Σ_j a_j H_{ij} + z_i`.
pub fn soliton_residual_jet(jet: &FieldJet, a: &SolitonVector, z: &[f64]) -> Vec<f64> {
    let n = jet.dim();
    let al = a.linear();
    let div = divergence(jet);
    (0..n)
        .map(|i| 0.5 * div[i] - (0..n).map(|j| al[j] * jet.h[(i, j)]).sum::<f64>() + z[i])
        .collect()
}

macro_rules! field_op {
    ($(#[$m:meta])* $name:ident, $jet_fn:ident, $out:ty) => {
        $(#[$m])*
        pub fn $name<F: MetricField + ?Sized>(field: &F, z: &[f64]) -> Result<$out> {
            Ok($jet_fn(&field.jet(z)?))
        }
    };
    ($(#[$m:meta])* $name:ident, $jet_fn:ident, $out:ty, a) => {
        $(#[$m])*
        pub fn $name<F: MetricField + ?Sized>(field: &F, a: &SolitonVector, z: &[f64]) -> Result<$out> {
            a.check_dim(field.dim())?;
            Ok($jet_fn(&field.jet(z)?, a))
        }
    };
    ($(#[$m:meta])* $name:ident, $jet_fn:ident, $out:ty, a, z) => {
        $(#[$m])*
        pub fn $name<F: MetricField + ?Sized>(field: &F, a: &SolitonVector, z: &[f64]) -> Result<$out> {
            a.check_dim(field.dim())?;
            Ok($jet_fn(&field.jet(z)?, a, z))
        }
    };
}

field_op!(
    /// First-Chern–Ricci form coefficients at `z`.
    chern_ricci, chern_ricci_jet, DMatrix<f64>
);
field_op!(
    /// Chern scalar curvature at `z`.
    chern_scalar, chern_scalar_jet, f64
);
field_op!(laplacian_f, laplacian_f_jet, f64, a);
field_op!(grad_norm_f, grad_norm_f_jet, f64, a);
field_op!(
    /// Modified Chern scalar curvature `s^c_ξ` at `z`.
    modified_scalar, modified_scalar_jet, f64, a, z
);
field_op!(modified_scalar_divform, modified_scalar_divform_jet, f64, a, z);
field_op!(soliton_residual, soliton_residual_jet, Vec<f64>, a, z);

/// Every pointwise curvature quantity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub z: Vec<f64>,
    pub s_c: f64,
    pub rho: DMatrix<f64>,
    pub laplacian_f: f64,
    pub grad_norm_f: f64,
    pub s_c_xi: f64,
    pub s_c_xi_div: f64,
    pub soliton_residual: Vec<f64>,
    pub kahler_defect_norm: f64,
}

impl CurvatureSample {
    pub fn evaluate<F: MetricField + ?Sized>(field: &F, a: &SolitonVector, z: &[f64]) -> Result<Self> {
        a.check_dim(field.dim())?;
        let jet = field.jet(z)?;
        Self::from_jet(&jet, a, z)
    }

    pub fn from_jet(jet: &FieldJet, a: &SolitonVector, z: &[f64]) -> Result<Self> {
        Ok(Self {
            z: z.to_vec(),
            s_c: chern_scalar_jet(jet),
            rho: chern_ricci_jet(jet),
            laplacian_f: laplacian_f_jet(jet, a),
            grad_norm_f: grad_norm_f_jet(jet, a),
            s_c_xi: modified_scalar_jet(jet, a, z),
            s_c_xi_div: modified_scalar_divform_jet(jet, a, z),
            soliton_residual: soliton_residual_jet(jet, a, z),
            kahler_defect_norm: kahler_defect_from_jet(jet)?.max_abs(),
        })
    }

    pub fn soliton_residual_norm(&self) -> f64 {
        math::max_abs(self.soliton_residual.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Mean of `s^c_ξ` over the grid; equals `2 a_{n+1}` when `S ≡ 0`.
    pub constant: f64,
    /// `max |s^c_ξ - mean|` over the grid.
    pub deviation: f64,
    pub residual_sup: f64,
}

/// Mean and spread of `s^c_ξ` over a grid on which the soliton residual vanishes.
pub fn consistency_constant<F: MetricField + ?Sized>(
    field: &F,
    a: &SolitonVector,
    grid: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConsistencyReport> {
    a.check_dim(field.dim())?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut residual_sup: f64 = 0.0;
    for z in grid {
        let jet = field.jet(z)?;
        residual_sup = residual_sup.max(math::max_abs(soliton_residual_jet(&jet, a, z)));
        values.push(modified_scalar_jet(&jet, a, z));
    }
    if !(residual_sup <= tolerance) {
        return Err(Error::Precondition(format!(
            "soliton residual {residual_sup:e} exceeds tolerance {tolerance:e}"
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let deviation = math::max_abs(values.iter().map(|v| v - mean));
    Ok(ConsistencyReport {
        constant: mean,
        deviation,
        residual_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{analytic_field, ConstantField};
    use alloc::sync::Arc;
    use alloc::vec;

    /// `H = 1 - z²` with exact derivatives.
    fn parabola() -> impl MetricField {
        analytic_field(
            1,
            Arc::new(|z: &[f64]| DMatrix::from_element(1, 1, 1.0 - z[0] * z[0])),
            Some(Arc::new(|z: &[f64]| vec![DMatrix::from_element(1, 1, -2.0 * z[0])])),
            Some(Arc::new(|_: &[f64]| vec![DMatrix::from_element(1, 1, -2.0)])),
            None,
        )
    }

    #[test]
    fn parabola_curvature() {
        let h = parabola();
        let a0 = SolitonVector::zero(1);
        for z in [-0.7, 0.0, 0.3, 0.95] {
            assert_eq!(chern_ricci(&h, &[z]).unwrap()[(0, 0)], 1.0);
            assert_eq!(chern_scalar(&h, &[z]).unwrap(), 1.0);
            assert_eq!(modified_scalar(&h, &a0, &[z]).unwrap(), 0.0);
            assert!(soliton_residual(&h, &a0, &[z]).unwrap()[0].abs() < 1e-15);
        }
        let a = SolitonVector::new(vec![1.0, 0.0]).unwrap();
        let z = 0.3;
        assert!((laplacian_f(&h, &a, &[z]).unwrap() - 2.0 * z).abs() < 1e-15);
        assert!((grad_norm_f(&h, &a, &[z]).unwrap() - (1.0 - z * z)).abs() < 1e-15);
        // Closed form: 1 + 2(-2z) - 2(1 - z²) + 2z - 1 = 2z² - 2z - 2.
        let want = 2.0 * z * z - 2.0 * z - 2.0;
        assert!((modified_scalar(&h, &a, &[z]).unwrap() - want).abs() < 1e-14);
        assert!((modified_scalar_divform(&h, &a, &[z]).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn flat_field() {
        let h = ConstantField::identity(2);
        let a = SolitonVector::zero(2);
        let z = [0.2, -0.3];
        assert_eq!(chern_ricci(&h, &z).unwrap(), DMatrix::zeros(2, 2));
        assert_eq!(chern_scalar(&h, &z).unwrap(), 0.0);
        assert_eq!(modified_scalar(&h, &a, &z).unwrap(), -2.0);
        assert_eq!(soliton_residual(&h, &a, &z).unwrap(), vec![0.2, -0.3]);
        assert_eq!(laplacian_f(&h, &a, &z).unwrap(), 0.0);
        assert_eq!(grad_norm_f(&h, &a, &z).unwrap(), 0.0);
    }

    #[test]
    fn divform_with_zero_vector_is_sc_minus_n() {
        let h = parabola();
        let a = SolitonVector::zero(1);
        let z = [0.41];
        let sc = chern_scalar(&h, &z).unwrap();
        assert_eq!(modified_scalar_divform(&h, &a, &z).unwrap(), sc - 1.0);
    }

    #[test]
    fn consistency_constant_is_twice_the_constant_term() {
        let h = parabola();
        let grid: Vec<Vec<f64>> = (0..21).map(|i| vec![-0.9 + 0.09 * i as f64]).collect();
        let r = consistency_constant(&h, &SolitonVector::zero(1), &grid, 1e-12).unwrap();
        assert!(r.constant.abs() < 1e-12 && r.deviation < 1e-12);
        let c = 0.37;
        let r = consistency_constant(&h, &SolitonVector::new(vec![0.0, c]).unwrap(), &grid, 1e-12)
            .unwrap();
        assert!((r.constant - 2.0 * c).abs() < 1e-12 && r.deviation < 1e-12);
        let flat = ConstantField::identity(1);
        assert!(matches!(
            consistency_constant(&flat, &SolitonVector::zero(1), &grid, 1e-8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = ConstantField::identity(2);
        assert!(modified_scalar(&h, &SolitonVector::zero(3), &[0.0, 0.0]).is_err());
    }
}
