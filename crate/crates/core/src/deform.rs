//! Compactly supported deformations `H_t = H + tD` of a toric soliton.
//!
//! Pick `V` symmetric, compactly supported and divergence free
//! (`Σ_i ∂_i V_{il} = 0`), and set `D = e^{2f} V`. Then
//! `½ Σ_i ∂_i D_{il} - Σ_i a_i D_{il} = 0`, so the soliton residual and the
//! modified scalar curvature of `H + tD` agree with those of `H`, while the
//! Kähler condition generically fails.
//!
//! For a pair `i < l` the building block is
//!
//! ```text
//! V_{il} = V_{li} = u(z_i) v(z_l) w,  V_{ll} = -u'(z_i) V(z_l) w,  V_{ii} = -U(z_i) v'(z_l) w
//! ```
//!
//! with `u, v` zero-mean bumps, `U, V` their compactly supported primitives
//! and `w` a product of plain bumps in the remaining coordinates.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::curvature::{modified_scalar_jet, soliton_residual_jet, SolitonVector};
use crate::field::{
    check_boundary_conditions, kahler_defect_from_jet, sum_field, FieldJet, MetricField, Provenance,
    SharedField, SumField,
};
use crate::linalg;
use crate::math;
use crate::polytope::{tensor_points, DelzantPolytope};
use crate::{Error, Result};

/// Smallest supported smoothness class.
pub const MIN_CLASS: usize = 4;
/// Default smoothness class of the profiles.
pub const DEFAULT_CLASS: usize = 6;

/// Polynomial bump on `[α, β]`, identically zero outside.
///
/// The plain bump of class `k` is `4^k (s(1-s))^k = (1-t²)^k` with
/// `s = (x-α)/(β-α)` and `t = 2s - 1`.
/// The zero-mean bump of class `k` is the derivative of the plain bump of
/// class `k + 1`, which is then its primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    alpha: f64,
    beta: f64,
    class: usize,
    zero_mean: bool,
    power: usize,
    /// Coefficients in `t` of the profile's primitive (zero-mean) or of the
    /// profile itself (plain).
    base: Vec<f64>,
}

pub fn make_bump(interval: (f64, f64), class: usize, zero_mean: bool, range: Option<(f64, f64)>) -> Result<BumpProfile> {
    let (alpha, beta) = interval;
    if !(alpha < beta) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("bad bump interval [{alpha}, {beta}]")));
    }
    if class < MIN_CLASS {
        return Err(Error::InvalidArgument(format!("bump class must be at least {MIN_CLASS}, got {class}")));
    }
    if let Some((lo, hi)) = range {
        if alpha <= lo || beta >= hi {
            return Err(Error::SupportNearBoundary(format!(
                "[{alpha}, {beta}] is not strictly inside [{lo}, {hi}]"
            )));
        }
    }
    let power = if zero_mean { class + 1 } else { class };
    // (1 - t²)^p with t = 2s - 1, expanded in t.
    let mut base = vec![1.0];
    for _ in 0..power {
        let mut next = vec![0.0; base.len() + 2];
        for (d, c) in base.iter().enumerate() {
            next[d] += c;
            next[d + 2] -= c;
        }
        base = next;
    }
    Ok(BumpProfile {
        alpha,
        beta,
        class,
        zero_mean,
        power,
        base,
    })
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(d, x)| d as f64 * x).collect()
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * s + x)
}

impl BumpProfile {
    pub fn interval(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.alpha + self.beta)
    }

    /// Derivative of order `k` of the primitive-or-plain base polynomial.
    fn base_derivative(&self, x: f64, k: usize) -> f64 {
        if x <= self.alpha || x >= self.beta {
            return 0.0;
        }
        let half = 0.5 * (self.beta - self.alpha);
        let t = (x - self.alpha) / half - 1.0;
        if k == 0 {
            // factored form stays accurate next to the endpoints
            return math::powi((1.0 - t) * (1.0 + t), self.power as i32);
        }
        let mut c = self.base.clone();
        for _ in 0..k {
            c = poly_derivative(&c);
        }
        horner(&c, t) / math::powi(half, k as i32)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `k`-th derivative of the profile.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        self.base_derivative(x, k + usize::from(self.zero_mean))
    }

    /// Compactly supported primitive; only zero-mean profiles have one.
    pub fn primitive(&self, x: f64) -> Option<f64> {
        self.zero_mean.then(|| self.base_derivative(x, 0))
    }

    /// `order = -1` is the primitive, otherwise a derivative.
    fn eval_order(&self, x: f64, order: i32) -> f64 {
        if order < 0 {
            self.base_derivative(x, 0)
        } else {
            self.derivative(x, order as usize)
        }
    }
}

/// One building block, for the coordinate pair `i < l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub i: usize,
    pub l: usize,
    /// Support of `u` in `z_i`.
    pub u: (f64, f64),
    /// Support of `v` in `z_l`.
    pub v: (f64, f64),
    /// Supports of the plain bumps in the remaining coordinates.
    pub w: Vec<(usize, (f64, f64))>,
    pub amplitude: f64,
}

impl PairSpec {
    /// A pair with every remaining coordinate given the support `rest`.
    pub fn new(n: usize, i: usize, l: usize, u: (f64, f64), v: (f64, f64), rest: (f64, f64)) -> Self {
        let w = (0..n).filter(|&k| k != i && k != l).map(|k| (k, rest)).collect();
        Self {
            i,
            l,
            u,
            v,
            w,
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// `(lo, hi)` corners of the support box.
    pub fn support_box(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        lo[self.i] = self.u.0;
        hi[self.i] = self.u.1;
        lo[self.l] = self.v.0;
        hi[self.l] = self.v.1;
        for &(k, (a, b)) in &self.w {
            lo[k] = a;
            hi[k] = b;
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSpec {
    pub pairs: Vec<PairSpec>,
    pub a: SolitonVector,
    pub class: usize,
    /// Minimum of `ℓ_j` over the support box corners.
    pub box_margin: f64,
    /// Allowed soliton residual of the background on the support box.
    pub soliton_tolerance: f64,
    /// Points per axis of the verification grid on each support box.
    pub grid_resolution: usize,
}

impl DeformationSpec {
    pub fn new(pairs: Vec<PairSpec>, a: SolitonVector) -> Self {
        Self {
            pairs,
            a,
            class: DEFAULT_CLASS,
            box_margin: 1e-2,
            soliton_tolerance: 1e-8,
            grid_resolution: 15,
        }
    }
}

/// `c · Π_axis profile^{(order)}(z_axis)` placed at entry `(row, col)`.
#[derive(Debug, Clone)]
struct Term {
    row: usize,
    col: usize,
    coeff: f64,
    factors: Vec<(usize, BumpProfile, i32)>,
}

impl Term {
    fn factor(&self, z: &[f64], slot: usize, extra: i32) -> f64 {
        let (axis, prof, order) = &self.factors[slot];
        prof.eval_order(z[*axis], order + extra)
    }

    /// Value, gradient and Hessian of the scalar product.
    fn jet(&self, z: &[f64], n: usize) -> (f64, Vec<f64>, DMatrix<f64>) {
        let m = self.factors.len();
        let f0: Vec<f64> = (0..m).map(|s| self.factor(z, s, 0)).collect();
        let f1: Vec<f64> = (0..m).map(|s| self.factor(z, s, 1)).collect();
        let f2: Vec<f64> = (0..m).map(|s| self.factor(z, s, 2)).collect();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..m).filter(|s| !skip.contains(s)).map(|s| f0[s]).product()
        };
        let value = self.coeff * prod_except(&[]);
        let mut grad = vec![0.0; n];
        let mut hess = DMatrix::zeros(n, n);
        for s in 0..m {
            let ks = self.factors[s].0;
            grad[ks] = self.coeff * f1[s] * prod_except(&[s]);
            hess[(ks, ks)] = self.coeff * f2[s] * prod_except(&[s]);
            for t in s + 1..m {
                let kt = self.factors[t].0;
                let v = self.coeff * f1[s] * f1[t] * prod_except(&[s, t]);
                hess[(ks, kt)] = v;
                hess[(kt, ks)] = v;
            }
        }
        (value, grad, hess)
    }
}

/// The perturbation `D = e^{2f} V` with closed-form derivatives.
#[derive(Debug, Clone)]
pub struct PerturbationField {
    n: usize,
    a: SolitonVector,
    terms: Vec<Term>,
}

impl PerturbationField {
    /// `V`, `V_{,k}` and `V_{,kl}` as a jet.
    pub fn v_jet(&self, z: &[f64]) -> FieldJet {
        let n = self.n;
        let mut jet = FieldJet::zeros(n);
        for t in &self.terms {
            let (v, g, h) = t.jet(z, n);
            let mut put = |r: usize, c: usize| {
                jet.h[(r, c)] += v;
                for k in 0..n {
                    jet.dh[k][(r, c)] += g[k];
                    for l in 0..n {
                        jet.d2h[k * n + l][(r, c)] += h[(k, l)];
                    }
                }
            };
            put(t.row, t.col);
            if t.row != t.col {
                put(t.col, t.row);
            }
        }
        jet
    }

    /// `Σ_i ∂_i V_{il}` for each `l`.
    pub fn v_divergence(&self, z: &[f64]) -> Vec<f64> {
        let j = self.v_jet(z);
        (0..self.n).map(|l| (0..self.n).map(|i| j.h1(i, l, i)).sum()).collect()
    }

    /// `½ Σ_i ∂_i D_{il} - Σ_i a_i D_{il}` for each `l`.
    pub fn divergence_residual(&self, z: &[f64]) -> Vec<f64> {
        let d = self.d_jet(z);
        let al = self.a.linear();
        (0..self.n)
            .map(|l| {
                (0..self.n)
                    .map(|i| 0.5 * d.h1(i, l, i) - al[i] * d.h[(i, l)])
                    .sum()
            })
            .collect()
    }

    fn d_jet(&self, z: &[f64]) -> FieldJet {
        let n = self.n;
        let v = self.v_jet(z);
        let al = self.a.linear();
        let e = math::exp(2.0 * self.a.eval(z));
        let mut out = FieldJet::zeros(n);
        out.h = &v.h * e;
        for k in 0..n {
            out.dh[k] = (&v.h * (2.0 * al[k]) + &v.dh[k]) * e;
            for l in 0..n {
                out.d2h[k * n + l] = (&v.h * (4.0 * al[k] * al[l])
                    + &v.dh[l] * (2.0 * al[k])
                    + &v.dh[k] * (2.0 * al[l])
                    + v.d2(k, l))
                    * e;
            }
        }
        out.symmetrize();
        out
    }
}

impl MetricField for PerturbationField {
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
        Ok(self.d_jet(z))
    }

    fn provenance(&self) -> Provenance {
        Provenance::Analytic
    }
}

#[derive(Debug, Clone)]
pub struct DeformationFamily {
    pub background: SharedField,
    pub perturbation: Arc<PerturbationField>,
    pub a: SolitonVector,
    pub t_minus: f64,
    pub t_plus: f64,
    pub spec: DeformationSpec,
    /// Points on which the admissible interval was computed.
    pub grid: Vec<Vec<f64>>,
}

impl DeformationFamily {
    pub fn field_at(&self, t: f64) -> Result<SumField> {
        sum_field(self.background.clone(), self.perturbation.clone(), t)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_minus < t && t < self.t_plus
    }

    /// Center of the first pair's support box.
    pub fn center(&self) -> Vec<f64> {
        let n = self.perturbation.n;
        let (lo, hi) = self.spec.pairs[0].support_box(n);
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

fn box_grid(lo: &[f64], hi: &[f64], resolution: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| {
            (0..resolution)
                .map(|k| a + (b - a) * k as f64 / (resolution - 1).max(1) as f64)
                .collect()
        })
        .collect();
    tensor_points(&axes)
}

fn build_terms(p: &DelzantPolytope, spec: &DeformationSpec, pair: &PairSpec) -> Result<Vec<Term>> {
    let n = p.dim();
    let (i, l) = (pair.i, pair.l);
    if !(i < l && l < n) {
        return Err(Error::InvalidArgument(format!("pair ({i}, {l}) must satisfy i < l < {n}")));
    }
    let mut seen: Vec<usize> = vec![i, l];
    for &(k, _) in &pair.w {
        if seen.contains(&k) || k >= n {
            return Err(Error::InvalidArgument(format!("bad cutoff axis {k}")));
        }
        seen.push(k);
    }
    if seen.len() != n {
        return Err(Error::InvalidArgument("every remaining coordinate needs a cutoff".into()));
    }
    let u = make_bump(pair.u, spec.class, true, Some(p.coordinate_range(i)))?;
    let v = make_bump(pair.v, spec.class, true, Some(p.coordinate_range(l)))?;
    let mut w = Vec::new();
    for &(k, iv) in &pair.w {
        w.push((k, make_bump(iv, spec.class, false, Some(p.coordinate_range(k)))?, 0));
    }
    let with_w = |mut f: Vec<(usize, BumpProfile, i32)>| {
        f.extend(w.iter().cloned());
        f
    };
    let c = pair.amplitude;
    Ok(vec![
        Term {
            row: i,
            col: l,
            coeff: c,
            factors: with_w(vec![(i, u.clone(), 0), (l, v.clone(), 0)]),
        },
        Term {
            row: l,
            col: l,
            coeff: -c,
            factors: with_w(vec![(i, u.clone(), 1), (l, v.clone(), -1)]),
        },
        Term {
            row: i,
            col: i,
            coeff: -c,
            factors: with_w(vec![(i, u, -1), (l, v, 1)]),
        },
    ])
}

/// Builds `D` for every pair in the spec and the admissible `t`-interval.
pub fn build_deformation(background: SharedField, p: &DelzantPolytope, spec: &DeformationSpec) -> Result<DeformationFamily> {
    let n = p.dim();
    if n == 1 {
        return Err(Error::NoDeformationInDimensionOne);
    }
    if background.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: background.dim(),
        });
    }
    spec.a.check_dim(n)?;
    if spec.pairs.is_empty() {
        return Err(Error::InvalidArgument("deformation needs at least one pair".into()));
    }
    if spec.grid_resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let mut terms = Vec::new();
    let mut grid = Vec::new();
    for pair in &spec.pairs {
        terms.extend(build_terms(p, spec, pair)?);
        let (lo, hi) = pair.support_box(n);
        let corners = box_grid(&lo, &hi, 2);
        let slack = corners
            .iter()
            .map(|c| p.min_slack(c))
            .fold(f64::INFINITY, f64::min);
        if slack < spec.box_margin {
            return Err(Error::SupportNearBoundary(format!(
                "support box reaches within {slack:.3e} of a facet (margin {})",
                spec.box_margin
            )));
        }
        let pts = box_grid(&lo, &hi, spec.grid_resolution);
        let mut residual: f64 = 0.0;
        for z in &pts {
            let jet = background.jet(z)?;
            residual = residual.max(math::max_abs(soliton_residual_jet(&jet, &spec.a, z)));
        }
        if !(residual <= spec.soliton_tolerance) {
            return Err(Error::NotSoliton(residual));
        }
        grid.extend(pts);
    }
    let pert = Arc::new(PerturbationField {
        n,
        a: spec.a.clone(),
        terms,
    });
    let (t_minus, t_plus) = admissible_interval(background.as_ref(), pert.as_ref(), &grid)?;
    Ok(DeformationFamily {
        background,
        perturbation: pert,
        a: spec.a.clone(),
        t_minus,
        t_plus,
        spec: spec.clone(),
        grid,
    })
}

/// Safety factor applied to the generalized-eigenvalue bound.
pub const T_SAFETY: f64 = 0.9;

/// `H + tD > 0` on the grid for `t` in the returned open interval.
pub fn admissible_interval<H: MetricField + ?Sized, D: MetricField + ?Sized>(
    h: &H,
    d: &D,
    grid: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let mut t_plus = f64::INFINITY;
    let mut t_minus = f64::NEG_INFINITY;
    for z in grid {
        let mu = linalg::generalized_eigenvalues(&d.h(z)?, &h.h(z)?)?;
        for &m in mu.iter() {
            if m < 0.0 {
                t_plus = t_plus.min(-1.0 / m);
            } else if m > 0.0 {
                t_minus = t_minus.max(-1.0 / m);
            }
        }
    }
    Ok((T_SAFETY * t_minus, T_SAFETY * t_plus))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TSample {
    pub t: f64,
    /// `max |s^c_ξ(H_t) - s^c_ξ(H)|` over the grid.
    pub scalar_drift: f64,
    /// `max |S(H_t) - S(H)|` over the grid.
    pub soliton_drift: f64,
    /// Smallest eigenvalue of `H_t` over the grid.
    pub positivity_margin: f64,
    /// Largest entry of the Kähler defect of `H_t` at the family center.
    pub kahler_defect_at_center: f64,
    /// Largest entry of the Kähler defect of `H_t` over the support-box grid.
    pub kahler_defect_sup: f64,
    /// Whether the boundary report of `H_t` is identical to that of `H`.
    pub boundary_matches: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub divergence_residual: f64,
    pub background_defect_at_center: f64,
    pub background_defect_sup: f64,
    pub samples: Vec<TSample>,
}

impl FamilyReport {
    pub fn max_scalar_drift(&self) -> f64 {
        self.samples.iter().map(|s| s.scalar_drift).fold(0.0, f64::max)
    }

    pub fn min_positivity(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.positivity_margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks the family on `grid` at each `t` in `ts`.
pub fn verify_family(fam: &DeformationFamily, p: &DelzantPolytope, grid: &[Vec<f64>], ts: &[f64]) -> Result<FamilyReport> {
    let a = &fam.a;
    let center = fam.center();
    let mut divergence_residual: f64 = 0.0;
    let mut base = Vec::with_capacity(grid.len());
    for z in grid {
        divergence_residual =
            divergence_residual.max(math::max_abs(fam.perturbation.divergence_residual(z)));
        let jet = fam.background.jet(z)?;
        base.push((modified_scalar_jet(&jet, a, z), soliton_residual_jet(&jet, a, z)));
    }
    let background_defect_at_center = kahler_defect_from_jet(&fam.background.jet(&center)?)?.max_abs();
    let defect_sup = |f: &dyn MetricField| -> Result<f64> {
        let mut m: f64 = 0.0;
        for z in &fam.grid {
            m = m.max(kahler_defect_from_jet(&f.jet(z)?)?.max_abs());
        }
        Ok(m)
    };
    let background_defect_sup = defect_sup(fam.background.as_ref())?;
    let base_boundary = check_boundary_conditions(fam.background.as_ref(), p, 1e-6);
    let mut samples = Vec::new();
    for &t in ts {
        let ht = fam.field_at(t)?;
        let mut scalar_drift: f64 = 0.0;
        let mut soliton_drift: f64 = 0.0;
        let mut positivity_margin = f64::INFINITY;
        for (z, (s0, r0)) in grid.iter().zip(&base) {
            let jet = ht.jet(z)?;
            scalar_drift = scalar_drift.max(math::abs(modified_scalar_jet(&jet, a, z) - s0));
            let r = soliton_residual_jet(&jet, a, z);
            soliton_drift = soliton_drift.max(math::max_abs(r.iter().zip(r0).map(|(x, y)| x - y)));
            positivity_margin = positivity_margin.min(linalg::min_eigenvalue(&jet.h));
        }
        let kahler_defect_at_center = kahler_defect_from_jet(&ht.jet(&center)?)?.max_abs();
        let kahler_defect_sup = defect_sup(&ht)?;
        let boundary_matches = check_boundary_conditions(&ht, p, 1e-6) == base_boundary;
        samples.push(TSample {
            t,
            scalar_drift,
            soliton_drift,
            positivity_margin,
            kahler_defect_at_center,
            kahler_defect_sup,
            boundary_matches,
        });
    }
    Ok(FamilyReport {
        divergence_residual,
        background_defect_at_center,
        background_defect_sup,
        samples,
    })
}
