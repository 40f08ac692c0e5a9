//! Soliton backgrounds: the exact one-dimensional solution and a collocation
//! Newton iteration for `s^c_ξ = 0` in the Kähler ansatz `φ = φ_G + ψ`.

mod basis;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub use basis::{CorrectedPotential, LegendreBasis};

use crate::curvature::{modified_scalar_jet, SolitonVector};
use crate::field::{
    check_boundary_conditions, field_from_potential, guillemin_field, jet_from_potential, BoundaryReport, FieldJet,
    MetricField, PotentialField, PotentialJet, Provenance, SharedField,
};
use crate::math;
use crate::polytope::DelzantPolytope;
use crate::quadrature::QuadratureScheme;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugePolicy {
    /// Subtract the `e^{-2f} dv`-orthogonal projection onto affine functions.
    ProjectAffine,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub resolution: usize,
    /// Collocation margin; `2 / resolution` when unset.
    pub margin: Option<f64>,
    /// Largest step fraction tried by the line search.
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub gauge: GaugePolicy,
    /// Total degree of the polynomial correction.
    pub degree: usize,
    /// Central-difference step for the Jacobian columns.
    pub fd_step: f64,
    /// Starting coefficients in the basis; zero when unset.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            resolution: 16,
            margin: None,
            damping: 1.0,
            max_iterations: 20,
            tolerance: 1e-10,
            gauge: GaugePolicy::ProjectAffine,
            degree: 8,
            fd_step: 1e-6,
            initial: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.resolution < 8 {
            return Err(Error::InvalidArgument(format!(
                "resolution must be at least 8, got {}",
                self.resolution
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument("damping must lie in (0, 1]".into()));
        }
        if self.degree < 2 {
            return Err(Error::InvalidArgument("degree must be at least 2".into()));
        }
        Ok(())
    }

    pub fn collocation_margin(&self) -> f64 {
        self.margin.unwrap_or(2.0 / self.resolution as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneDimDetail {
    /// `H(1)`.
    pub defect_at_right: f64,
    /// `H'(-1) - 2`.
    pub left_slope_defect: f64,
    /// `H'(1) + 2`.
    pub right_slope_defect: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonDetail {
    pub potential: Arc<CorrectedPotential>,
    pub collocation_points: usize,
    pub unknowns: usize,
    /// Step fraction of each accepted step.
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum SolveDetail {
    OneDim(OneDimDetail),
    Newton(NewtonDetail),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: SharedField,
    /// Sup-norm of the residual at the start and after every accepted step.
    pub history: Vec<f64>,
    pub boundary: BoundaryReport,
    pub converged: bool,
    pub detail: SolveDetail,
}

impl SolveResult {
    pub fn initial_residual(&self) -> f64 {
        self.history[0]
    }

    pub fn final_residual(&self) -> f64 {
        *self.history.last().expect("history is never empty")
    }

    pub fn reduction(&self) -> f64 {
        self.initial_residual() / self.final_residual()
    }
}

/// `φ1(x) = (e^x - 1)/x` and `φ2(x) = (e^x - 1 - x)/x²`.
fn phi12(x: f64) -> (f64, f64) {
    if math::abs(x) < 0.5 {
        let (mut p1, mut p2) = (0.0, 0.0);
        let mut term = 1.0; // x^k / (k+1)!
        for k in 0..24 {
            p1 += term;
            let t2 = term / (k + 2) as f64;
            p2 += t2;
            term = t2 * x;
        }
        (p1, p2)
    } else {
        let e = math::expm1(x);
        (e / x, (e - x) / (x * x))
    }
}

/// Solution of `½H' - a₁H + z = 0` on `[-1, 1]` with `H(-1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSolution {
    c: f64,
}

impl IntervalSolution {
    pub fn new(a1: f64) -> Self {
        Self { c: 2.0 * a1 }
    }

    /// `(H, H', H'')`.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let w = z + 1.0;
        let (p1, p2) = phi12(self.c * w);
        let h = 2.0 * w * p1 - 2.0 * w * w * p2;
        let h1 = self.c * h - 2.0 * z;
        let h2 = self.c * h1 - 2.0;
        (h, h1, h2)
    }
}

impl MetricField for IntervalSolution {
    fn dim(&self) -> usize {
        1
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        if z.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: z.len(),
            });
        }
        let (h, h1, h2) = self.eval(z[0]);
        let mut jet = FieldJet::zeros(1);
        jet.h[(0, 0)] = h;
        jet.dh[0][(0, 0)] = h1;
        jet.d2h[0][(0, 0)] = h2;
        Ok(jet)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

/// Direct integration of the one-dimensional soliton equation.
pub fn solve_1d(p: &DelzantPolytope, a: &SolitonVector, tolerance: f64) -> Result<SolveResult> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.dim(),
        });
    }
    if !p.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    a.check_dim(1)?;
    let sol = IntervalSolution::new(a.linear()[0]);
    let (hr, h1r, _) = sol.eval(1.0);
    let (_, h1l, _) = sol.eval(-1.0);
    let detail = OneDimDetail {
        defect_at_right: hr,
        left_slope_defect: h1l - 2.0,
        right_slope_defect: h1r + 2.0,
    };
    let worst = math::max_abs([hr, detail.left_slope_defect, detail.right_slope_defect]);
    let field: SharedField = Arc::new(sol);
    let boundary = check_boundary_conditions(field.as_ref(), p, tolerance.max(1e-8));
    let history = vec![worst];
    Ok(SolveResult {
        field,
        history,
        boundary,
        converged: worst < tolerance,
        detail: SolveDetail::OneDim(detail),
    })
}

struct Collocation {
    points: Vec<Vec<f64>>,
    background: Vec<PotentialJet>,
    basis_jets: Vec<Vec<PotentialJet>>,
}

impl Collocation {
    fn total_jet(&self, k: usize, coeffs: &[f64], n: usize) -> PotentialJet {
        let mut j = self.background[k].clone();
        j.add_assign(&LegendreBasis::combine(&self.basis_jets[k], coeffs, n));
        j
    }

    /// Residual vector, or `None` when `Hess φ` stops being positive-definite.
    fn residual(&self, coeffs: &[f64], a: &SolitonVector, n: usize) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.points.len());
        for (k, z) in self.points.iter().enumerate() {
            let pj = self.total_jet(k, coeffs, n);
            pj.hess.clone().cholesky()?;
            let fj = jet_from_potential(&pj).ok()?;
            let s = modified_scalar_jet(&fj, a, z);
            if !s.is_finite() {
                return None;
            }
            out.push(s);
        }
        Some(out)
    }
}

/// Affine `b·z + b_0` closest to `ψ` in `L²(e^{-2f} dv)`.
fn affine_projection(q: &QuadratureScheme, a: &SolitonVector, psi: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let n = q.dim;
    let mut gram = DMatrix::zeros(n + 1, n + 1);
    let mut rhs = DVector::zeros(n + 1);
    for node in &q.interior {
        let z = &node.point;
        let w = node.weight * math::exp(-2.0 * a.eval(z));
        let mut e = z.clone();
        e.push(1.0);
        let v = psi(z);
        for i in 0..=n {
            rhs[i] += w * e[i] * v;
            for j in 0..=n {
                gram[(i, j)] += w * e[i] * e[j];
            }
        }
    }
    let x = crate::linalg::solve(gram, &rhs)?;
    Ok(x.iter().copied().collect())
}

/// Collocation Newton for `s^c_ξ(φ_G + ψ) = 0` with a finite-difference
/// Jacobian, SVD least squares and a monotone backtracking line search.
pub fn solve_newton(p: &DelzantPolytope, a: &SolitonVector, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !p.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    let n = p.dim();
    a.check_dim(n)?;
    let guillemin = guillemin_field(p);
    let basis = LegendreBasis::new(p, cfg.degree);
    let m = basis.len();
    let points = p.interior_grid(cfg.resolution, cfg.collocation_margin())?;
    let background = points
        .iter()
        .map(|z| guillemin.jet(z))
        .collect::<Result<Vec<_>>>()?;
    let basis_jets = points.iter().map(|z| basis.jets(z)).collect();
    let col = Collocation {
        points,
        background,
        basis_jets,
    };
    let mut coeffs = match &cfg.initial {
        Some(c) if c.len() == m => c.clone(),
        Some(c) => {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.len(),
            })
        }
        None => vec![0.0; m],
    };
    let sup = |v: &[f64]| math::max_abs(v.iter().copied());
    let mut r = col
        .residual(&coeffs, a, n)
        .ok_or(Error::Precondition("initial potential is not strictly convex".into()))?;
    let mut history = vec![sup(&r)];
    let mut steps = Vec::new();
    for _ in 0..cfg.max_iterations {
        if sup(&r) < cfg.tolerance {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), m);
        for c in 0..m {
            let h = cfg.fd_step * (1.0 + math::abs(coeffs[c]));
            let mut plus = coeffs.clone();
            let mut minus = coeffs.clone();
            plus[c] += h;
            minus[c] -= h;
            let (Some(rp), Some(rm)) = (col.residual(&plus, a, n), col.residual(&minus, a, n)) else {
                return Err(Error::Singular("Jacobian column leaves the convex cone"));
            };
            for k in 0..r.len() {
                jac[(k, c)] = (rp[k] - rm[k]) / (2.0 * h);
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            return Err(Error::Singular("collocation Jacobian"));
        }
        let rhs = -DVector::from_column_slice(&r);
        let dir = svd
            .solve(&rhs, 1e-12 * smax)
            .map_err(|_| Error::Singular("collocation Jacobian"))?;
        let current = sup(&r);
        let mut lambda = cfg.damping;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = coeffs.iter().zip(dir.iter()).map(|(c, d)| c + lambda * d).collect();
            if let Some(rt) = col.residual(&trial, a, n) {
                if sup(&rt) < current {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, rt)) = accepted else {
            break;
        };
        coeffs = trial;
        r = rt;
        history.push(sup(&r));
        steps.push(lambda);
    }
    let affine = match cfg.gauge {
        GaugePolicy::ProjectAffine => {
            let q = QuadratureScheme::new(p, 2 * cfg.degree + 4)?;
            let proj = affine_projection(&q, a, |z| {
                LegendreBasis::combine(&basis.jets(z), &coeffs, n).value
            })?;
            proj.iter().map(|x| -x).collect()
        }
        GaugePolicy::None => vec![0.0; n + 1],
    };
    let converged = sup(&r) < cfg.tolerance;
    let collocation_points = col.points.len();
    let potential = Arc::new(CorrectedPotential::new(guillemin, basis, coeffs, affine));
    let field: SharedField = Arc::new(field_from_potential(potential.clone()));
    let boundary = check_boundary_conditions(field.as_ref(), p, 1e-6);
    Ok(SolveResult {
        field,
        history,
        boundary,
        converged,
        detail: SolveDetail::Newton(NewtonDetail {
            potential,
            collocation_points,
            unknowns: m,
            steps,
        }),
    })
}

/// Basis coefficients of `amplitude · Π_j ℓ_j / max Π_j ℓ_j`, a correction
/// vanishing on every facet.
pub fn bump_start(p: &DelzantPolytope, cfg: &SolveConfig, amplitude: f64) -> Result<Vec<f64>> {
    let basis = LegendreBasis::new(p, cfg.degree);
    let pts = p.interior_grid(cfg.resolution.max(2 * cfg.degree), 1e-3)?;
    let prod = |z: &[f64]| p.affine_values(z).iter().product::<f64>();
    let peak = pts.iter().map(|z| prod(z)).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Precondition("facet product does not peak inside the polytope".into()));
    }
    basis.fit(&pts, |z| amplitude * prod(z) / peak)
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
    fn phi_series_matches_closed_form() {
        for x in [0.49, -0.49, 0.1] {
            let (s1, s2) = phi12(x);
            let e = libm::expm1(x);
            assert!((s1 - e / x).abs() < 1e-14);
            assert!((s2 - (e - x) / (x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_gives_parabola() {
        let r = solve_1d(&interval(), &SolitonVector::zero(1), 1e-12).unwrap();
        assert!(r.converged);
        for z in [-0.8, 0.0, 0.3, 0.9] {
            let h = r.field.h(&[z]).unwrap()[(0, 0)];
            assert!((h - (1.0 - z * z)).abs() < 1e-15);
        }
    }

    #[test]
    fn nonzero_vector_misses_the_right_endpoint() {
        let r = solve_1d(&interval(), &SolitonVector::new(vec![0.5, 0.0]).unwrap(), 1e-12).unwrap();
        assert!(!r.converged);
        let SolveDetail::OneDim(d) = r.detail else {
            panic!("wrong detail")
        };
        // ∫_{-1}^{1} e^{1-s}(-2s) ds = 4
        assert!((d.defect_at_right - 4.0).abs() < 1e-13);
        assert!(d.left_slope_defect.abs() < 1e-14);
    }
}
