use proptest::prelude::*;

use toricak::catalog;
use toricak::format::{parse_polytope, polytope_hash, polytope_json, read_field_csv, write_field_csv};
use toricak_core::field::{field_from_potential, guillemin_field};
use toricak_core::MetricField;

#[test]
fn catalog_documents_round_trip() {
    for p in catalog::all() {
        let back = parse_polytope(&polytope_json(&p)).unwrap();
        assert_eq!(polytope_hash(&back), polytope_hash(&p));
        assert_eq!(back.vertices().len(), p.vertices().len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Written values are exact decimal round trips, so the spline field
    // reproduces H at the nodes up to the interpolation's own arithmetic.
    #[test]
    fn field_csv_round_trip(res in 12usize..30, which in 0usize..5) {
        let p = catalog::load(catalog::SMOOTH_REFLEXIVE_POLYGONS[which]).unwrap();
        let h = field_from_potential(guillemin_field(&p));
        let pts = p.interior_grid(res, 0.05).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&h, &pts, &mut buf).unwrap();
        let g = read_field_csv(buf.as_slice()).unwrap();
        let mut checked = 0;
        for z in &pts {
            if let Ok(m) = g.h(z) {
                prop_assert!((m - h.h(z).unwrap()).amax() < 1e-12);
                checked += 1;
            }
        }
        prop_assert!(checked * 2 > pts.len());
    }
}
