//! Boundary behaviour of `H` on the facets of the polytope.
//!
//! On every facet with inward normal `u` an admissible field satisfies
//! `H u = 0` and `dH(u, u) = 2u`, where `dH(u, u)_k = uᵀ H_{,k} u`. Both are
//! read off by extrapolating interior samples along the inward normal.

use alloc::vec;
use alloc::vec::Vec;

use super::MetricField;
use crate::linalg;
use crate::polytope::DelzantPolytope;

#[derive(Debug, Clone, PartialEq)]
pub struct FacetBoundary {
    pub facet: usize,
    /// Largest `|H u|` over the facet sample points.
    pub max_h_normal: f64,
    /// Largest `|dH(u, u) - 2u|` over the facet sample points.
    pub max_dh_defect: f64,
    /// Sample points where the field could not be evaluated.
    pub failed_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub facets: Vec<FacetBoundary>,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundaryReport {
    pub fn max_h_normal(&self) -> f64 {
        self.facets.iter().map(|f| f.max_h_normal).fold(0.0, f64::max)
    }

    pub fn max_dh_defect(&self) -> f64 {
        self.facets.iter().map(|f| f.max_dh_defect).fold(0.0, f64::max)
    }
}

/// Approach distance for the facet extrapolation.
pub const DEFAULT_APPROACH: f64 = 1e-3;

/// Samples at distances `δ, δ/2, δ/4` along the inward normal and
/// extrapolates to the facet with the quadratic through the three samples.
pub fn check_boundary_conditions<F: MetricField + ?Sized>(
    field: &F,
    p: &DelzantPolytope,
    tolerance: f64,
) -> BoundaryReport {
    check_boundary_conditions_with(field, p, tolerance, DEFAULT_APPROACH)
}

pub fn check_boundary_conditions_with<F: MetricField + ?Sized>(
    field: &F,
    p: &DelzantPolytope,
    tolerance: f64,
    delta: f64,
) -> BoundaryReport {
    let n = p.dim();
    let facets: Vec<FacetBoundary> = p
        .facets()
        .iter()
        .enumerate()
        .map(|(j, facet)| {
            let u = facet.normal_f64();
            let unit: Vec<f64> = u.iter().map(|x| x / facet.norm()).collect();
            let mut report = FacetBoundary {
                facet: j,
                max_h_normal: 0.0,
                max_dh_defect: 0.0,
                failed_samples: 0,
            };
            for base in facet_samples(p, j) {
                let mut hu = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                let mut dh = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                let mut ok = true;
                for (s, scale) in [1.0, 0.5, 0.25].iter().enumerate() {
                    let z: Vec<f64> = base
                        .iter()
                        .zip(&unit)
                        .map(|(b, e)| b + delta * scale * e)
                        .collect();
                    let Ok(jet) = field.jet(&z) else {
                        ok = false;
                        break;
                    };
                    for i in 0..n {
                        hu[s][i] = (0..n).map(|k| jet.h[(i, k)] * u[k]).sum();
                        let quad: f64 = (0..n)
                            .flat_map(|a| (0..n).map(move |b| (a, b)))
                            .map(|(a, b)| u[a] * jet.dh[i][(a, b)] * u[b])
                            .sum();
                        dh[s][i] = quad - 2.0 * u[i];
                    }
                }
                if !ok {
                    report.failed_samples += 1;
                    continue;
                }
                // Lagrange weights at 0 for nodes δ, δ/2, δ/4.
                let w = [1.0 / 3.0, -2.0, 8.0 / 3.0];
                let extrap = |v: &[Vec<f64>; 3]| -> Vec<f64> {
                    (0..n).map(|i| w[0] * v[0][i] + w[1] * v[1][i] + w[2] * v[2][i]).collect()
                };
                report.max_h_normal = report.max_h_normal.max(linalg::norm(&extrap(&hu)));
                report.max_dh_defect = report.max_dh_defect.max(linalg::norm(&extrap(&dh)));
            }
            report
        })
        .collect();
    let pass = facets.iter().all(|f| {
        f.failed_samples == 0 && f.max_h_normal < tolerance && f.max_dh_defect < tolerance
    });
    BoundaryReport {
        facets,
        tolerance,
        pass,
    }
}

/// Facet centroid plus midpoints between it and each facet vertex.
fn facet_samples(p: &DelzantPolytope, j: usize) -> Vec<Vec<f64>> {
    let verts: Vec<&Vec<f64>> = p
        .vertices()
        .iter()
        .filter(|v| v.active.contains(&j))
        .map(|v| &v.point)
        .collect();
    let n = p.dim();
    let mut c = vec![0.0; n];
    for v in &verts {
        for i in 0..n {
            c[i] += v[i] / verts.len() as f64;
        }
    }
    let mut out = vec![c.clone()];
    if verts.len() > 1 {
        for v in verts {
            out.push((0..n).map(|i| 0.5 * (c[i] + v[i])).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{field_from_potential, guillemin_field, ConstantField};
    use crate::polytope::Facet;

    #[test]
    fn guillemin_interval_passes() {
        let p = DelzantPolytope::new(1, vec![Facet::new(vec![1], 1.0), Facet::new(vec![-1], 1.0)], None)
            .unwrap();
        let r = check_boundary_conditions(&field_from_potential(guillemin_field(&p)), &p, 1e-8);
        assert!(r.pass, "{r:?}");
        let flat = check_boundary_conditions(&ConstantField::identity(1), &p, 1e-8);
        assert!(!flat.pass);
        assert!((flat.max_h_normal() - 1.0).abs() < 1e-12);
    }
}
