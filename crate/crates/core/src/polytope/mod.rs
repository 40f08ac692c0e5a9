//! Delzant polytopes given by facet normals and supports.
//!
//! A polytope is `{z : ⟨u_j, z⟩ + λ_j ≥ 0}` with primitive inward integer
//! normals `u_j`. Vertices are computed once at construction and carry the
//! set of facets active at them.

mod faces;
mod unimodular;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::math;
use crate::{Error, Result};

pub use faces::Simplex;
pub use unimodular::UnimodularMap;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub support: f64,
}

impl Facet {
    pub fn new(normal: Vec<i64>, support: f64) -> Self {
        Self { normal, support }
    }

    /// The affine function `ℓ(z) = ⟨u, z⟩ + λ`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(z)
            .map(|(&u, &x)| u as f64 * x)
            .sum::<f64>()
            + self.support
    }

    pub fn normal_f64(&self) -> Vec<f64> {
        self.normal.iter().map(|&u| u as f64).collect()
    }

    /// Euclidean length of the normal.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.normal.iter().map(|&u| (u * u) as f64).sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Vec<f64>,
    /// Indices of the facets through this vertex, ascending.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexViolation {
    pub point: Vec<f64>,
    pub active: Vec<usize>,
    /// Determinant of the active normals when exactly `n` facets meet.
    pub determinant: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelzantReport {
    pub is_delzant: bool,
    pub violations: Vec<VertexViolation>,
    /// Facets that do not support an `(n-1)`-dimensional face.
    pub redundant_facets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    name: Option<String>,
    vertices: Vec<Vertex>,
}

impl DelzantPolytope {
    /// Validates the facet data and caches the vertices.
    ///
    /// Rejects malformed input, non-primitive normals and regions that are
    /// unbounded or have empty interior. The Delzant condition itself is
    /// reported by [`DelzantPolytope::is_delzant`], not enforced here.
    pub fn new(dim: usize, facets: Vec<Facet>, name: Option<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        if facets.is_empty() {
            return Err(Error::Malformed("no facets".into()));
        }
        for (index, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(Error::Malformed(format!(
                    "facet {index} normal has length {}, expected {dim}",
                    f.normal.len()
                )));
            }
            if !f.support.is_finite() {
                return Err(Error::Malformed(format!("facet {index} support is not finite")));
            }
            let g = f.normal.iter().fold(0, |g, &x| linalg::gcd(g, x));
            if g == 0 {
                return Err(Error::Malformed(format!("facet {index} normal is zero")));
            }
            if g != 1 {
                return Err(Error::NonPrimitiveNormal {
                    index,
                    normal: f.normal.clone(),
                });
            }
        }
        if !recession_cone_is_trivial(dim, &facets) {
            return Err(Error::Unbounded);
        }
        let vertices = enumerate_vertices(dim, &facets);
        if vertices.len() < dim + 1 {
            return Err(Error::EmptyInterior);
        }
        let mut p = Self {
            dim,
            facets,
            name,
            vertices,
        };
        let c = p.centroid();
        if p.min_slack(&c) <= FEAS_TOL {
            return Err(Error::EmptyInterior);
        }
        p.vertices.sort_by(|a, b| {
            a.point
                .iter()
                .zip(&b.point)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Every vertex is simple and its active normals form a lattice basis.
    pub fn is_delzant(&self) -> DelzantReport {
        let n = self.dim;
        let mut violations = Vec::new();
        for v in &self.vertices {
            let determinant = (v.active.len() == n).then(|| {
                let rows: Vec<Vec<i64>> = v
                    .active
                    .iter()
                    .map(|&j| self.facets[j].normal.clone())
                    .collect();
                linalg::int_det(&rows)
            });
            if determinant.map(|d| d.abs()) != Some(1) {
                violations.push(VertexViolation {
                    point: v.point.clone(),
                    active: v.active.clone(),
                    determinant,
                });
            }
        }
        let redundant_facets: Vec<usize> = (0..self.facets.len())
            .filter(|&j| {
                let pts: Vec<&Vec<f64>> = self
                    .vertices
                    .iter()
                    .filter(|v| v.active.contains(&j))
                    .map(|v| &v.point)
                    .collect();
                affine_rank(&pts) + 1 < n
            })
            .collect();
        DelzantReport {
            is_delzant: violations.is_empty() && redundant_facets.is_empty(),
            violations,
            redundant_facets,
        }
    }

    /// Anticanonical (monotone) position: every support constant equals one.
    pub fn is_reflexive(&self) -> bool {
        self.facets.iter().all(|f| math::abs(f.support - 1.0) < 1e-12)
    }

    pub fn affine_values(&self, z: &[f64]) -> Vec<f64> {
        self.facets.iter().map(|f| f.eval(z)).collect()
    }

    /// `min_j ℓ_j(z)`; positive exactly on the open interior.
    pub fn min_slack(&self, z: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.eval(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance from `z` to the nearest facet hyperplane.
    pub fn facet_distance(&self, z: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.eval(z) / f.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_strictly(&self, z: &[f64]) -> bool {
        z.len() == self.dim && self.min_slack(z) > 0.0
    }

    pub fn check_interior(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        if self.min_slack(z) <= 0.0 {
            return Err(Error::OutsideInterior(z.to_vec()));
        }
        Ok(())
    }

    /// Average of the vertices.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for (ci, x) in c.iter_mut().zip(&v.point) {
                *ci += x;
            }
        }
        let m = self.vertices.len() as f64;
        c.iter_mut().for_each(|x| *x /= m);
        c
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v.point[i]);
                hi[i] = hi[i].max(v.point[i]);
            }
        }
        (lo, hi)
    }

    /// Uniform lattice over the margin-shrunk bounding box, filtered to
    /// `ℓ_j(z) ≥ margin` for every facet.
    pub fn interior_grid(&self, resolution: usize, margin: f64) -> Result<Vec<Vec<f64>>> {
        if !(margin > 0.0) {
            return Err(Error::InvalidArgument(format!("margin must be positive, got {margin}")));
        }
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let (lo, hi) = self.bounding_box();
        let axes: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| {
                let (a, b) = (lo[i] + margin, hi[i] - margin);
                if resolution == 1 || b <= a {
                    vec![0.5 * (a + b)]
                } else {
                    (0..resolution)
                        .map(|k| a + (b - a) * k as f64 / (resolution - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let pts: Vec<Vec<f64>> = tensor_points(&axes)
            .into_iter()
            .filter(|z| self.min_slack(z) >= margin - 1e-12)
            .collect();
        if pts.is_empty() {
            return Err(Error::EmptyGrid(margin));
        }
        Ok(pts)
    }

    /// The translate `Δ + shift`.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let us: f64 = f.normal.iter().zip(shift).map(|(&u, s)| u as f64 * s).sum();
                Facet::new(f.normal.clone(), f.support - us)
            })
            .collect();
        Self::new(self.dim, facets, self.name.clone())
    }

    /// Image of the polytope under `z ↦ A z`.
    pub fn transform(&self, map: &UnimodularMap) -> Result<Self> {
        if map.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: map.dim(),
            });
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet::new(map.covector(&f.normal), f.support))
            .collect();
        Self::new(self.dim, facets, self.name.clone())
    }

    /// Coordinate range `[min, max]` of the polytope along axis `i`.
    pub fn coordinate_range(&self, i: usize) -> (f64, f64) {
        let (lo, hi) = self.bounding_box();
        (lo[i], hi[i])
    }

    /// Fan triangulation of the polytope over vertex centroids of its faces.
    pub fn triangulation(&self) -> Vec<Simplex> {
        faces::triangulate(self, &[])
    }

    /// Triangulation of facet `j` by the same recursive fan.
    pub fn facet_triangulation(&self, j: usize) -> Vec<Simplex> {
        faces::triangulate(self, &[j])
    }
}

pub(crate) fn tensor_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &x in axis {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn affine_rank(pts: &[&Vec<f64>]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let rows: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect())
        .collect();
    linalg::rank(&rows, 1e-9)
}

/// `{d : ⟨u_j, d⟩ ≥ 0 ∀j} = {0}`.
fn recession_cone_is_trivial(n: usize, facets: &[Facet]) -> bool {
    let rows: Vec<Vec<f64>> = facets.iter().map(|f| f.normal_f64()).collect();
    if linalg::rank(&rows, 1e-12) < n {
        return false;
    }
    // Extreme rays of a pointed cone lie on n-1 independent facet hyperplanes.
    for subset in linalg::combinations(facets.len(), n - 1) {
        let sub: Vec<Vec<i64>> = subset.iter().map(|&j| facets[j].normal.clone()).collect();
        let d = linalg::cofactor_null_vector(&sub, n);
        if d.iter().all(|&x| x == 0) {
            continue;
        }
        for sign in [1i64, -1] {
            if facets.iter().all(|f| {
                f.normal.iter().zip(&d).map(|(u, x)| u * x * sign).sum::<i64>() >= 0
            }) {
                return false;
            }
        }
    }
    true
}

fn enumerate_vertices(n: usize, facets: &[Facet]) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::new();
    let scale = 1.0 + facets.iter().map(|f| math::abs(f.support)).fold(0.0, f64::max);
    for subset in linalg::combinations(facets.len(), n) {
        let a = DMatrix::from_fn(n, n, |r, c| facets[subset[r]].normal[c] as f64);
        let b = DVector::from_fn(n, |r, _| -facets[subset[r]].support);
        let Some(x) = a.lu().solve(&b) else { continue };
        let point = linalg::to_vec(&x);
        if point.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let vals: Vec<f64> = facets.iter().map(|f| f.eval(&point)).collect();
        if vals.iter().any(|&v| v < -FEAS_TOL * scale) {
            continue;
        }
        if out
            .iter()
            .any(|v| v.point.iter().zip(&point).all(|(a, b)| math::abs(a - b) < 1e-9 * scale))
        {
            continue;
        }
        let active = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| math::abs(v) <= FEAS_TOL * scale)
            .map(|(j, _)| j)
            .collect();
        out.push(Vertex { point, active });
    }
    out
}
