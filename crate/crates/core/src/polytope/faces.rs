//! Recursive fan triangulation of faces.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{affine_rank, DelzantPolytope};
use crate::math;

/// A `d`-simplex embedded in `R^n`, given by its `d + 1` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// `d`-dimensional Euclidean measure.
    pub fn measure(&self) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 1.0;
        }
        let n = self.vertices[0].len();
        let e = DMatrix::from_fn(n, d, |r, c| self.vertices[c + 1][r] - self.vertices[0][r]);
        let gram = e.transpose() * &e;
        let fact: f64 = (1..=d).map(|k| k as f64).product();
        math::sqrt(math::abs(gram.determinant())) / fact
    }
}

/// Triangulates the face on which every facet in `active` is tight.
pub(crate) fn triangulate(p: &DelzantPolytope, active: &[usize]) -> Vec<Simplex> {
    let verts: Vec<usize> = (0..p.vertices().len())
        .filter(|&v| active.iter().all(|j| p.vertices()[v].active.contains(j)))
        .collect();
    if verts.is_empty() {
        return Vec::new();
    }
    let pts: Vec<&Vec<f64>> = verts.iter().map(|&v| &p.vertices()[v].point).collect();
    let dim = affine_rank(&pts);
    cone(p, active.to_vec(), verts, dim)
}

fn cone(p: &DelzantPolytope, active: Vec<usize>, verts: Vec<usize>, dim: usize) -> Vec<Simplex> {
    let all = p.vertices();
    if dim == 0 {
        return vec![Simplex {
            vertices: vec![all[verts[0]].point.clone()],
        }];
    }
    let n = p.dim();
    let mut apex = vec![0.0; n];
    for &v in &verts {
        for (a, x) in apex.iter_mut().zip(&all[v].point) {
            *a += x;
        }
    }
    apex.iter_mut().for_each(|a| *a /= verts.len() as f64);

    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for j in 0..p.facets().len() {
        if active.contains(&j) {
            continue;
        }
        let sub: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|&v| all[v].active.contains(&j))
            .collect();
        if sub.is_empty() || seen.contains(&sub) {
            continue;
        }
        let pts: Vec<&Vec<f64>> = sub.iter().map(|&v| &all[v].point).collect();
        if affine_rank(&pts) + 1 != dim {
            continue;
        }
        seen.push(sub.clone());
        let mut next = active.clone();
        next.push(j);
        for s in cone(p, next, sub, dim - 1) {
            let mut vs = Vec::with_capacity(s.vertices.len() + 1);
            vs.push(apex.clone());
            vs.extend(s.vertices);
            out.push(Simplex { vertices: vs });
        }
    }
    out
}
