//! Quadrature over a polytope and its boundary.
//!
//! The interior rule is a collapsed-coordinate Gauss–Legendre product rule on
//! every simplex of the fan triangulation. The boundary rule does the same on
//! each facet and divides the Euclidean facet measure by `|u_j|`, which is the
//! measure `dμ` characterised by `u_j ∧ dμ = -dv`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::polytope::{DelzantPolytope, Simplex};
use crate::{Error, Result};

pub const MAX_ORDER: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetNodes {
    pub facet: usize,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    pub dim: usize,
    pub order: usize,
    pub interior: Vec<Node>,
    pub boundary: Vec<FacetNodes>,
}

impl QuadratureScheme {
    /// Interior rule exact to polynomial degree `order` on each simplex,
    /// plus the facet rules for `dμ`.
    pub fn new(p: &DelzantPolytope, order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let interior = p
            .triangulation()
            .iter()
            .flat_map(|s| simplex_rule(s, order))
            .collect();
        let boundary = (0..p.facets().len())
            .map(|j| {
                let density = 1.0 / p.facets()[j].norm();
                let nodes = p
                    .facet_triangulation(j)
                    .iter()
                    .flat_map(|s| simplex_rule(s, order))
                    .map(|mut node| {
                        node.weight *= density;
                        node
                    })
                    .collect();
                FacetNodes { facet: j, nodes }
            })
            .collect();
        Ok(Self {
            dim: p.dim(),
            order,
            interior,
            boundary,
        })
    }

    /// `Σ w f(z) ≈ ∫_Δ f dv`.
    pub fn integrate_interior(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.interior.iter().map(|n| n.weight * f(&n.point)).sum()
    }

    /// `≈ ∫_{∂Δ} f dμ`.
    pub fn integrate_boundary(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.boundary
            .iter()
            .flat_map(|fnodes| fnodes.nodes.iter())
            .map(|n| n.weight * f(&n.point))
            .sum()
    }

    pub fn volume(&self) -> f64 {
        self.integrate_interior(|_| 1.0)
    }

    pub fn boundary_measure(&self) -> f64 {
        self.integrate_boundary(|_| 1.0)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if math::abs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        xs[i] = 0.5 * (1.0 - x);
        xs[m - 1 - i] = 0.5 * (1.0 + x);
        ws[i] = 0.5 * w;
        ws[m - 1 - i] = 0.5 * w;
    }
    (xs, ws)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Conical product rule on a `d`-simplex, exact to total degree `order`.
pub fn simplex_rule(s: &Simplex, order: usize) -> Vec<Node> {
    let d = s.dim();
    if d == 0 {
        return vec![Node {
            point: s.vertices[0].clone(),
            weight: 1.0,
        }];
    }
    // Collapsing raises the degree in the first variable by d - 1.
    let m = (order + d).div_ceil(2);
    let (gx, gw) = gauss_legendre(m);
    let scale = s.measure() * (1..=d).map(|k| k as f64).product::<f64>();
    let n = s.vertices[0].len();
    let mut out = Vec::with_capacity(m.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        // x_1 = s_1, x_k = (1 - s_1)...(1 - s_{k-1}) s_k
        let mut rest = 1.0;
        let mut weight = scale;
        let mut bary = vec![0.0; d];
        for k in 0..d {
            let sk = gx[idx[k]];
            bary[k] = rest * sk;
            weight *= gw[idx[k]] * math::powi(1.0 - sk, (d - 1 - k) as i32);
            rest *= 1.0 - sk;
        }
        let mut point = s.vertices[0].clone();
        for k in 0..d {
            for r in 0..n {
                point[r] += bary[k] * (s.vertices[k + 1][r] - s.vertices[0][r]);
            }
        }
        out.push(Node { point, weight });
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return out;
            }
        }
    }
}
