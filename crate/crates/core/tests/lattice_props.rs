mod common;

use approx::assert_relative_eq;
use lamcert::lattice::{total_normalized_length, CompleteSlope, FlatTorusLattice, Slope};
use proptest::prelude::*;

fn basis() -> impl Strategy<Value = FlatTorusLattice> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -15i64..=15).prop_filter_map(
        "degenerate or tiny basis",
        |(a, b, c, d, k)| {
            let (n1, n2) = (a.hypot(b), c.hypot(d));
            if (a * d - b * c).abs() < 0.02 * n1 * n2 || n1 < 0.05 || n2 < 0.05 {
                return None;
            }
            FlatTorusLattice::new([a, b], [c + k as f64 * a, d + k as f64 * b]).ok()
        },
    )
}

fn det(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_unimodular_and_reduced(lat in basis()) {
        let red = lat.reduce();
        let c = red.coeffs;
        prop_assert_eq!((c[0][0] * c[1][1] - c[0][1] * c[1][0]).abs(), 1);
        for (b, row) in [(red.b1, c[0]), (red.b2, c[1])] {
            let v = lat.vector(row[0], row[1]);
            prop_assert!((v[0] - b[0]).abs() <= 1e-9 * (1.0 + b[0].abs()));
            prop_assert!((v[1] - b[1]).abs() <= 1e-9 * (1.0 + b[1].abs()));
        }
        assert_relative_eq!(det(red.b1, red.b2).abs(), lat.area(), max_relative = 1e-9);
        let (n1, n2) = (red.b1[0].hypot(red.b1[1]), red.b2[0].hypot(red.b2[1]));
        let dot = red.b1[0] * red.b2[0] + red.b1[1] * red.b2[1];
        prop_assert!(n1 <= n2 * (1.0 + 1e-12));
        prop_assert!(2.0 * dot.abs() <= n1 * n1 * (1.0 + 1e-9));
    }

    #[test]
    fn shortest_vector_matches_brute_force(lat in basis()) {
        let (s, len) = lat.shortest_vector();
        assert_relative_eq!(len, common::brute_shortest(&lat, 30), max_relative = 1e-12);
        assert_relative_eq!(lat.slope_length(&s), len, max_relative = 1e-15);
        prop_assert!(s.p() > 0 || (s.p() == 0 && s.q() > 0));
    }

    #[test]
    fn covering_radius_brackets_grid(lat in basis()) {
        let iv = lat.covering_radius(1e-9).unwrap();
        let (lo, gap) = common::grid_covering(&lat, 60);
        prop_assert!(iv.hi >= lo * (1.0 - 1e-12), "{:?} below grid {}", iv, lo);
        prop_assert!(iv.lo <= lo + gap, "{:?} above grid {} + {}", iv, lo, gap);
    }

    #[test]
    fn closest_vector_is_within_covering_radius(lat in basis(), x in -20.0..20.0f64, y in -20.0..20.0f64) {
        let ((p, q), v) = lat.closest_vector([x, y]);
        let w = lat.vector(p, q);
        prop_assert_eq!(v, w);
        let dist = (x - v[0]).hypot(y - v[1]);
        prop_assert!(dist <= lat.covering_radius(1e-9).unwrap().hi * (1.0 + 1e-9));
    }

    #[test]
    fn normalized_length_is_scale_invariant(lat in basis(), k in 0.01..100.0f64, p in -50i64..50, q in -50i64..50) {
        prop_assume!(lamcert::lattice::gcd(p, q) == 1);
        let s = Slope::new(p, q).unwrap();
        let scaled = lat.scaled(k).unwrap();
        assert_relative_eq!(scaled.normalized_length(&s), lat.normalized_length(&s), max_relative = 1e-12);
        assert_relative_eq!(scaled.slope_length(&s), k * lat.slope_length(&s), max_relative = 1e-12);
    }

    #[test]
    fn total_length_combines_reciprocal_squares(a in basis(), b in basis(), p in 1i64..20, q in -20i64..20) {
        prop_assume!(lamcert::lattice::gcd(p, q) == 1);
        let s = Slope::new(p, q).unwrap();
        let (la, lb) = (a.normalized_length(&s), b.normalized_length(&s));
        let total = total_normalized_length(&[a, b], &CompleteSlope(vec![s, s])).unwrap();
        assert_relative_eq!(total.powi(-2), la.powi(-2) + lb.powi(-2), max_relative = 1e-12);
        prop_assert!(total <= la.min(lb));
    }
}

#[test]
fn square_and_hexagonal_tori() {
    let sq = FlatTorusLattice::new([1.0, 0.0], [0.0, 1.0]).unwrap();
    assert_eq!(sq.slope_length(&Slope::new(3, 4).unwrap()), 5.0);
    assert_relative_eq!(sq.covering_radius(1e-12).unwrap().mid(), 0.5f64.sqrt(), max_relative = 1e-12);
    let hex = FlatTorusLattice::new([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]).unwrap();
    assert_relative_eq!(hex.covering_radius(1e-12).unwrap().mid(), 1.0 / 3f64.sqrt(), max_relative = 1e-12);
    assert_eq!(hex.shortest_vector().0, Slope::new(1, 0).unwrap());
}

#[test]
fn degenerate_bases_rejected() {
    assert!(FlatTorusLattice::new([1.0, 2.0], [2.0, 4.0]).is_err());
    assert!(FlatTorusLattice::new([f64::NAN, 0.0], [0.0, 1.0]).is_err());
    assert!(FlatTorusLattice::new([0.0, 0.0], [0.0, 1.0]).is_err());
}
