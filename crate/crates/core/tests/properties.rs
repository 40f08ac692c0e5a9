use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use toricak_core::curvature::{chern_scalar, modified_scalar, soliton_residual, SolitonVector};
use toricak_core::deform::{build_deformation, make_bump, verify_family, DeformationSpec, PairSpec};
use toricak_core::field::{analytic_field, field_from_potential, guillemin_field, TransformedField};
use toricak_core::futaki::{futaki_with_scheme, AffineFunction};
use toricak_core::quadrature::QuadratureScheme;
use toricak_core::{DelzantPolytope, Facet, MetricField, SharedField, UnimodularMap};

fn polygon(normals: &[[i64; 2]]) -> DelzantPolytope {
    DelzantPolytope::new(2, normals.iter().map(|u| Facet::new(u.to_vec(), 1.0)).collect(), None).unwrap()
}

fn cp2() -> DelzantPolytope {
    polygon(&[[1, 0], [0, 1], [-1, -1]])
}

fn bl1() -> DelzantPolytope {
    polygon(&[[1, 0], [0, 1], [-1, -1], [1, 1]])
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn point_in_cp2() -> impl Strategy<Value = Vec<f64>> {
    // Barycentric weights, kept 0.05 away from every facet.
    (0.05f64..0.95, 0.05f64..0.95).prop_filter_map("inside", |(u, v)| {
        (u + v < 0.95).then(|| vec![-1.0 + 3.0 * u, -1.0 + 3.0 * v])
    })
}

/// Products of elementary shears, swaps and sign flips.
fn unimodular2() -> impl Strategy<Value = UnimodularMap> {
    prop::collection::vec(0usize..4, 1..5).prop_map(|ops| {
        let mut m = DMatrix::<i64>::identity(2, 2);
        for op in ops {
            let e = match op {
                0 => DMatrix::from_row_slice(2, 2, &[1, 1, 0, 1]),
                1 => DMatrix::from_row_slice(2, 2, &[1, 0, -1, 1]),
                2 => DMatrix::from_row_slice(2, 2, &[0, 1, 1, 0]),
                _ => DMatrix::from_row_slice(2, 2, &[-1, 0, 0, 1]),
            };
            m = e * m;
        }
        UnimodularMap::new((0..2).map(|i| (0..2).map(|j| m[(i, j)]).collect()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // The reflexive triangle is 3× the standard simplex shifted by (-1, -1).
    #[test]
    fn triangle_rule_is_exact(a in 0u32..6, b in 0u32..6, order in 10usize..14) {
        prop_assume!((a + b) as usize <= order);
        let q = QuadratureScheme::new(&cp2(), order).unwrap();
        let got = q.integrate_interior(|z| (z[0] + 1.0).powi(a as i32) * (z[1] + 1.0).powi(b as i32));
        let exact = 3f64.powi((a + b + 2) as i32) * factorial(a) * factorial(b) / factorial(a + b + 2);
        prop_assert!((got - exact).abs() <= 1e-11 * exact.max(1.0), "{got} vs {exact}");
    }

    #[test]
    fn futaki_is_linear_in_zeta(c in prop::collection::vec(-2.0f64..2.0, 6), a in prop::collection::vec(-0.3f64..0.3, 3)) {
        let q = QuadratureScheme::new(&bl1(), 16).unwrap();
        let a = SolitonVector::new(a).unwrap();
        let z1 = AffineFunction::new(c[..3].to_vec()).unwrap();
        let z2 = AffineFunction::new(c[3..].to_vec()).unwrap();
        let sum = futaki_with_scheme(&q, &a, |z| z1.eval(z) + 2.0 * z2.eval(z));
        let parts = futaki_with_scheme(&q, &a, |z| z1.eval(z)) + 2.0 * futaki_with_scheme(&q, &a, |z| z2.eval(z));
        prop_assert!((sum - parts).abs() < 1e-11);
    }

    // Derivatives from differences of H against the closed-form jet.
    #[test]
    fn finite_differences_match_analytic_jet(
        s in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 2),
        z in prop::collection::vec(-0.5f64..0.5, 2),
    ) {
        let make = |with_derivatives: bool| {
            let (s, b) = (s.clone(), b.clone());
            let (b0, b1) = (b[0], b[1]);
            let e = move |z: &[f64]| (b0 * z[0] + b1 * z[1]).exp();
            let c = DMatrix::from_row_slice(2, 2, &[s[0], s[1], s[1], s[2]]);
            let (c1, e1) = (c.clone(), e);
            let h = Arc::new(move |z: &[f64]| DMatrix::identity(2, 2) * 3.0 + &c1 * e1(z));
            let bb = b.clone();
            let (c2, e2) = (c.clone(), e);
            let dh = Arc::new(move |z: &[f64]| (0..2).map(|k| &c2 * (bb[k] * e2(z))).collect());
            let bb = b.clone();
            let d2h = Arc::new(move |z: &[f64]| {
                (0..4).map(|kl| &c * (bb[kl / 2] * bb[kl % 2] * e(z))).collect()
            });
            if with_derivatives {
                analytic_field(2, h, Some(dh), Some(d2h), None)
            } else {
                analytic_field(2, h, None, None, None)
            }
        };
        let exact = make(true).jet(&z).unwrap();
        let fd = make(false).jet(&z).unwrap();
        for k in 0..2 {
            prop_assert!((&exact.dh[k] - &fd.dh[k]).amax() < 1e-8);
        }
        for kl in 0..4 {
            prop_assert!((&exact.d2h[kl] - &fd.d2h[kl]).amax() < 1e-5);
        }
    }

    #[test]
    fn scalars_are_equivariant(map in unimodular2(), z in point_in_cp2(), a in prop::collection::vec(-0.5f64..0.5, 3)) {
        let p = cp2();
        let h: SharedField = Arc::new(field_from_potential(guillemin_field(&p)));
        let pushed = TransformedField::new(h.clone(), map.clone()).unwrap();
        let a = SolitonVector::new(a).unwrap();
        let at = a.transform(&map);
        let zt = map.apply(&z);
        prop_assert!((a.eval(&z) - at.eval(&zt)).abs() < 1e-12);
        let s0 = modified_scalar(h.as_ref(), &a, &z).unwrap();
        let s1 = modified_scalar(&pushed, &at, &zt).unwrap();
        prop_assert!((s0 - s1).abs() < 1e-9 * s0.abs().max(1.0), "{s0} vs {s1}");
        prop_assert!((chern_scalar(&pushed, &zt).unwrap() - 2.0).abs() < 1e-8);
        // The soliton residual transforms like z: S' = A S.
        let r0 = soliton_residual(h.as_ref(), &a, &z).unwrap();
        let r1 = soliton_residual(&pushed, &at, &zt).unwrap();
        let r0t = map.apply(&r0);
        prop_assert!(r0t.iter().zip(&r1).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn plain_bump_is_flat_at_both_ends(lo in -1.0f64..0.0, width in 0.1f64..1.0, class in 4usize..8) {
        let b = make_bump((lo, lo + width), class, false, None).unwrap();
        for k in 0..class {
            prop_assert_eq!(b.derivative(lo, k), 0.0);
            prop_assert_eq!(b.derivative(lo + width, k), 0.0);
        }
        let m = make_bump((lo, lo + width), class, true, None).unwrap();
        prop_assert!(m.primitive(lo + width).unwrap().abs() < 1e-14);
        prop_assert!(m.primitive(lo).unwrap().abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Any box well inside CP2 gives a family that keeps s^c_ξ and S fixed.
    #[test]
    fn deformation_preserves_soliton_data(
        x0 in -0.8f64..-0.2, y0 in -0.8f64..-0.2,
        wx in 0.3f64..0.6, wy in 0.3f64..0.6,
        amplitude in 0.1f64..2.0, frac in -0.9f64..0.9,
    ) {
        let p = cp2();
        prop_assume!(x0 + wx + y0 + wy < 0.9);
        let h: SharedField = Arc::new(field_from_potential(guillemin_field(&p)));
        let pair = PairSpec::new(2, 0, 1, (x0, x0 + wx), (y0, y0 + wy), (0.0, 0.0)).with_amplitude(amplitude);
        let fam = build_deformation(h, &p, &DeformationSpec::new(vec![pair], SolitonVector::zero(2))).unwrap();
        let t = if frac > 0.0 { frac * fam.t_plus } else { -frac * fam.t_minus };
        let grid = p.interior_grid(12, 0.05).unwrap();
        let rep = verify_family(&fam, &p, &grid, &[t]).unwrap();
        prop_assert!(rep.divergence_residual < 1e-12);
        prop_assert!(rep.max_scalar_drift() < 1e-8);
        prop_assert!(rep.samples[0].soliton_drift < 1e-10);
        prop_assert!(rep.min_positivity() > 0.0);
        prop_assert!(rep.samples[0].boundary_matches);
    }
}
