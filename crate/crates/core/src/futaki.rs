//! The Donaldson–Futaki invariant of a polytope twisted by `e^{-2f}`:
//!
//! ```text
//! F(ζ) = ∫_{∂Δ} ζ e^{-2f} dμ + ∫_Δ ζ (2f - n) e^{-2f} dv
//! ```
//!
//! and the Newton solver for the coefficients of `f` that make it vanish on
//! every affine function.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::curvature::{modified_scalar_jet, SolitonVector};
use crate::field::MetricField;
use crate::linalg;
use crate::math;
use crate::polytope::DelzantPolytope;
use crate::quadrature::{QuadratureScheme, MAX_ORDER};
use crate::{Error, Result};

/// Starting order of the adaptive quadrature for `e^{-2f}` integrands.
pub const INITIAL_ORDER: usize = 12;
/// Relative gap required between orders `k` and `k + 4`.
pub const ADAPTIVE_GAP: f64 = 1e-10;

/// `ζ(z) = Σ c_i z_i + c_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunction {
    coeffs: Vec<f64>,
}

impl AffineFunction {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument("affine function needs n + 1 >= 2 coefficients".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn one(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = 1.0;
        Self { coeffs }
    }

    /// `z_1, ..., z_n, 1`, in the order used for residual vectors and Jacobians.
    pub fn basis(n: usize) -> Vec<Self> {
        (0..=n).map(|i| Self::coordinate(n, i)).collect()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let n = self.dim();
        self.coeffs[..n].iter().zip(z).map(|(c, x)| c * x).sum::<f64>() + self.coeffs[n]
    }
}

/// `F(ζ)` for an arbitrary test function on a fixed scheme.
pub fn futaki_with_scheme(q: &QuadratureScheme, a: &SolitonVector, zeta: impl Fn(&[f64]) -> f64) -> f64 {
    let n = q.dim as f64;
    let boundary = q.integrate_boundary(|z| zeta(z) * math::exp(-2.0 * a.eval(z)));
    let interior = q.integrate_interior(|z| {
        let f = a.eval(z);
        zeta(z) * (2.0 * f - n) * math::exp(-2.0 * f)
    });
    boundary + interior
}

/// `F(ζ)` on every basis function `z_1, ..., z_n, 1` in one pass.
pub fn futaki_vector(q: &QuadratureScheme, a: &SolitonVector) -> Vec<f64> {
    let n = q.dim;
    let mut out = vec![0.0; n + 1];
    for fnodes in &q.boundary {
        for node in &fnodes.nodes {
            let w = node.weight * math::exp(-2.0 * a.eval(&node.point));
            accumulate(&mut out, &node.point, w);
        }
    }
    for node in &q.interior {
        let f = a.eval(&node.point);
        let w = node.weight * (2.0 * f - n as f64) * math::exp(-2.0 * f);
        accumulate(&mut out, &node.point, w);
    }
    out
}

fn accumulate(out: &mut [f64], z: &[f64], w: f64) {
    let n = z.len();
    for i in 0..n {
        out[i] += w * z[i];
    }
    out[n] += w;
}

/// `∂F(ζ_m)/∂a_k` on the basis `ζ = (z_1, ..., z_n, 1)`, with `z_{n+1} := 1`.
pub fn futaki_jacobian(q: &QuadratureScheme, a: &SolitonVector) -> DMatrix<f64> {
    let n = q.dim;
    let ext = |z: &[f64]| -> Vec<f64> {
        let mut e = z.to_vec();
        e.push(1.0);
        e
    };
    let mut jac = DMatrix::zeros(n + 1, n + 1);
    let mut add = |z: &[f64], w_of: &dyn Fn(f64) -> f64| {
        let e = ext(z);
        for m in 0..=n {
            for k in 0..=n {
                jac[(m, k)] += e[m] * w_of(e[k]);
            }
        }
    };
    for fnodes in &q.boundary {
        for node in &fnodes.nodes {
            let w = node.weight * math::exp(-2.0 * a.eval(&node.point));
            add(&node.point, &|zk| -2.0 * zk * w);
        }
    }
    for node in &q.interior {
        let f = a.eval(&node.point);
        let w = node.weight * math::exp(-2.0 * f);
        let s = 2.0 * f - n as f64;
        add(&node.point, &|zk| (2.0 * zk - 2.0 * zk * s) * w);
    }
    jac
}

pub fn normalization_residual_with_scheme(q: &QuadratureScheme, a: &SolitonVector) -> f64 {
    q.integrate_interior(|z| {
        let f = a.eval(z);
        f * math::exp(-2.0 * f)
    })
}

/// Scheme whose values of `F` on the affine basis and of the normalization
/// residual agree with the next order up to [`ADAPTIVE_GAP`].
pub fn adaptive_scheme(p: &DelzantPolytope, a: &SolitonVector) -> Result<QuadratureScheme> {
    a.check_dim(p.dim())?;
    let mut order = INITIAL_ORDER;
    let mut q = QuadratureScheme::new(p, order)?;
    loop {
        if order + 4 > MAX_ORDER {
            return Ok(q);
        }
        let next = QuadratureScheme::new(p, order + 4)?;
        if adaptive_gap(&q, &next, a) < ADAPTIVE_GAP {
            return Ok(next);
        }
        order += 4;
        q = next;
    }
}

fn adaptive_gap(q: &QuadratureScheme, next: &QuadratureScheme, a: &SolitonVector) -> f64 {
    let mut lo = futaki_vector(q, a);
    lo.push(normalization_residual_with_scheme(q, a));
    let mut hi = futaki_vector(next, a);
    hi.push(normalization_residual_with_scheme(next, a));
    let scale = next.integrate_boundary(|z| math::exp(-2.0 * a.eval(z)));
    math::max_abs(lo.iter().zip(&hi).map(|(x, y)| x - y)) / scale
}

/// `F(ζ)` with the adaptive order.
pub fn futaki(p: &DelzantPolytope, a: &SolitonVector, zeta: &AffineFunction) -> Result<f64> {
    if zeta.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: zeta.dim(),
        });
    }
    let q = adaptive_scheme(p, a)?;
    Ok(futaki_with_scheme(&q, a, |z| zeta.eval(z)))
}

/// `F(ζ)` for a test function given as a closure.
pub fn futaki_fn(p: &DelzantPolytope, a: &SolitonVector, zeta: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let q = adaptive_scheme(p, a)?;
    Ok(futaki_with_scheme(&q, a, zeta))
}

/// `F(1) = ∫_{∂Δ} e^{-2f} dμ + ∫_Δ (2f - n) e^{-2f} dv`.
pub fn integrated_identity(p: &DelzantPolytope, a: &SolitonVector) -> Result<f64> {
    futaki(p, a, &AffineFunction::one(p.dim()))
}

/// `∫_Δ f e^{-2f} dv`.
pub fn normalization_residual(p: &DelzantPolytope, a: &SolitonVector) -> Result<f64> {
    let q = adaptive_scheme(p, a)?;
    Ok(normalization_residual_with_scheme(&q, a))
}

/// `∫_Δ s^c_ξ(H) ζ e^{-2f} dv`, which equals `F(ζ)` for every admissible `H`.
pub fn scalar_moment<F: MetricField + ?Sized>(
    field: &F,
    q: &QuadratureScheme,
    a: &SolitonVector,
    zeta: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    a.check_dim(field.dim())?;
    let mut acc = 0.0;
    for node in &q.interior {
        let z = &node.point;
        let s = modified_scalar_jet(&field.jet(z)?, a, z);
        acc += node.weight * s * zeta(z) * math::exp(-2.0 * a.eval(z));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Start,
    Newton,
    Gradient,
    Refine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub a: Vec<f64>,
    /// `max |F|` over the affine basis.
    pub residual: f64,
    pub step: f64,
    pub kind: StepKind,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FutakiReport {
    pub a: SolitonVector,
    pub f_one: f64,
    /// `F(z_1), ..., F(z_n)`.
    pub f_linear: Vec<f64>,
    pub normalization_residual: f64,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub order: usize,
}

impl FutakiReport {
    pub fn max_residual(&self) -> f64 {
        math::max_abs(self.f_linear.iter().copied().chain(core::iter::once(self.f_one)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub start: Option<SolitonVector>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 60,
            start: None,
        }
    }
}

pub fn solve_soliton_vf(p: &DelzantPolytope) -> Result<FutakiReport> {
    solve_soliton_vf_with(p, &SolverOptions::default())
}

/// Newton on `a ↦ (F(z_1), ..., F(z_n), F(1))` from `a = 0`, with a backtracking
/// line search and damped gradient steps on `½|F|²` when Newton stalls.
pub fn solve_soliton_vf_with(p: &DelzantPolytope, opts: &SolverOptions) -> Result<FutakiReport> {
    if !p.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    if !p.is_delzant().is_delzant {
        return Err(Error::NotDelzant);
    }
    let n = p.dim();
    let mut a = match &opts.start {
        Some(s) => {
            s.check_dim(n)?;
            s.clone()
        }
        None => SolitonVector::zero(n),
    };
    let mut order = INITIAL_ORDER;
    let mut q = QuadratureScheme::new(p, order)?;
    let mut r = futaki_vector(&q, &a);
    let sup = |v: &[f64]| math::max_abs(v.iter().copied());
    let mut iterations = vec![IterationRecord {
        a: a.coeffs().to_vec(),
        residual: sup(&r),
        step: 0.0,
        kind: StepKind::Start,
        order,
    }];
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        if sup(&r) <= opts.tolerance {
            // Confirm at a higher order before accepting.
            if order + 4 > MAX_ORDER {
                converged = true;
                break;
            }
            let next = QuadratureScheme::new(p, order + 4)?;
            if adaptive_gap(&q, &next, &a) < ADAPTIVE_GAP {
                converged = true;
                break;
            }
            order += 4;
            q = next;
            r = futaki_vector(&q, &a);
            iterations.push(IterationRecord {
                a: a.coeffs().to_vec(),
                residual: sup(&r),
                step: 0.0,
                kind: StepKind::Refine,
                order,
            });
            continue;
        }
        let jac = futaki_jacobian(&q, &a);
        let rv = DVector::from_column_slice(&r);
        let merit = |v: &[f64]| linalg::dot(v, v);
        let m0 = merit(&r);
        let trial = |dir: &DVector<f64>, lambda: f64| -> Result<(SolitonVector, Vec<f64>)> {
            let c: Vec<f64> = a.coeffs().iter().zip(dir.iter()).map(|(x, d)| x + lambda * d).collect();
            let cand = SolitonVector::new(c)?;
            let rr = futaki_vector(&q, &cand);
            Ok((cand, rr))
        };
        let mut accepted = None;
        if let Ok(dir) = linalg::solve(jac.clone(), &(-&rv)) {
            let mut lambda = 1.0;
            for _ in 0..30 {
                if let Ok((cand, rr)) = trial(&dir, lambda) {
                    if merit(&rr) < (1.0 - 1e-4 * lambda) * m0 {
                        accepted = Some((cand, rr, lambda, StepKind::Newton));
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
        if accepted.is_none() {
            let grad = jac.transpose() * &rv;
            let gnorm2 = grad.norm_squared();
            if gnorm2 > 0.0 {
                let dir = -grad;
                let mut lambda = m0 / gnorm2;
                for _ in 0..60 {
                    if let Ok((cand, rr)) = trial(&dir, lambda) {
                        if merit(&rr) < m0 - 1e-4 * lambda * gnorm2 {
                            accepted = Some((cand, rr, lambda, StepKind::Gradient));
                            break;
                        }
                    }
                    lambda *= 0.5;
                }
            }
        }
        let Some((cand, rr, lambda, kind)) = accepted else {
            break;
        };
        a = cand;
        r = rr;
        iterations.push(IterationRecord {
            a: a.coeffs().to_vec(),
            residual: sup(&r),
            step: lambda,
            kind,
            order,
        });
    }
    let report = FutakiReport {
        f_one: r[n],
        f_linear: r[..n].to_vec(),
        normalization_residual: normalization_residual_with_scheme(&q, &a),
        a,
        iterations,
        converged,
        order,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence(Box::new(report)))
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

    fn cp2() -> DelzantPolytope {
        DelzantPolytope::new(
            2,
            vec![
                Facet::new(vec![1, 0], 1.0),
                Facet::new(vec![0, 1], 1.0),
                Facet::new(vec![-1, -1], 1.0),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn vanishes_at_zero_on_reflexive_examples() {
        let a = SolitonVector::zero(2);
        assert!(integrated_identity(&cp2(), &a).unwrap().abs() < 1e-12);
        let a1 = SolitonVector::zero(1);
        assert!(integrated_identity(&interval(), &a1).unwrap().abs() < 1e-14);
        let fz = futaki(&interval(), &a1, &AffineFunction::coordinate(1, 0)).unwrap();
        assert!(fz.abs() < 1e-14);
    }

    #[test]
    fn constant_potential_on_cp2() {
        let a = SolitonVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let v = integrated_identity(&cp2(), &a).unwrap();
        assert!((v - 9.0 * libm::exp(-2.0)).abs() < 1e-12);
    }

    #[test]
    fn interval_closed_form() {
        // F(1) = 2c e^{-2c} sinh 2 for f = z + c.
        for c in [0.0, 0.3, -0.45] {
            let a = SolitonVector::new(vec![1.0, c]).unwrap();
            let want = 2.0 * c * libm::exp(-2.0 * c) * libm::sinh(2.0);
            assert!((integrated_identity(&interval(), &a).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let p = cp2();
        let q = QuadratureScheme::new(&p, 16).unwrap();
        let a = SolitonVector::new(vec![0.1, -0.2, 0.05]).unwrap();
        let jac = futaki_jacobian(&q, &a);
        let h = 1e-6;
        for k in 0..3 {
            let mut plus = a.coeffs().to_vec();
            let mut minus = a.coeffs().to_vec();
            plus[k] += h;
            minus[k] -= h;
            let fp = futaki_vector(&q, &SolitonVector::new(plus).unwrap());
            let fm = futaki_vector(&q, &SolitonVector::new(minus).unwrap());
            for m in 0..3 {
                let fd = (fp[m] - fm[m]) / (2.0 * h);
                assert!((fd - jac[(m, k)]).abs() < 1e-7, "{m} {k}: {fd} vs {}", jac[(m, k)]);
            }
        }
    }

    #[test]
    fn cp2_solution_is_zero() {
        let r = solve_soliton_vf(&cp2()).unwrap();
        assert!(r.converged);
        assert!(linalg::norm(r.a.coeffs()) < 1e-10);
    }

    #[test]
    fn rejects_non_reflexive() {
        let p = DelzantPolytope::new(1, vec![Facet::new(vec![1], 2.0), Facet::new(vec![-1], 2.0)], None)
            .unwrap();
        assert!(matches!(solve_soliton_vf(&p), Err(Error::NotReflexive)));
    }
}
