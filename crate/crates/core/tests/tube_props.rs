mod common;

use std::f64::consts::TAU;

use approx::assert_relative_eq;
use lamcert::lattice::{FlatTorusLattice, Slope};
use lamcert::tube::{
    distance, geodesic, nz_core_length_window, outward_ratio_bounds, project_curve, projection_factor_bound,
    tube_depth, NZ_MIN_LENGTH,
};
use lamcert::{TubePath, TubePoint, TubeShape};
use proptest::prelude::*;

fn tube() -> impl Strategy<Value = TubeShape> {
    (0.005..0.5f64, 0.0..TAU, 0.3..6.0f64).prop_map(|(e, t, r)| TubeShape::new(e, t, r).unwrap())
}

fn torus_curve(r: f64, steps: &[(f64, f64)]) -> TubePath {
    let mut pts = vec![TubePoint::new(r, 0.4, -0.2)];
    for &(dt, dz) in steps {
        let last = *pts.last().unwrap();
        pts.push(TubePoint::new(r, last.theta + dt, last.z + dz));
    }
    TubePath::new(pts).unwrap()
}

fn steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-2.0..2.0f64, -0.5..0.5f64), 1..10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_factor_inequality(big_r in 1e-6..50.0f64, frac in 1e-6..0.999_999f64) {
        let r = frac * big_r;
        let f = projection_factor_bound(r, big_r).unwrap();
        assert_relative_eq!(f.exact, r.cosh() / big_r.cosh(), max_relative = 1e-12);
        assert_relative_eq!(f.bound, (-r).exp() + (r - big_r).exp(), max_relative = 1e-15);
        prop_assert!(f.exact <= f.bound * (1.0 + 1e-15));
    }

    #[test]
    fn inward_then_outward_is_identity(t in tube(), frac in 0.05..0.95f64, s in steps()) {
        let big_r = t.radius();
        let r = frac * big_r;
        let curve = torus_curve(big_r, &s);
        let down = project_curve(&t, &curve, r).unwrap();
        let up = project_curve(&t, &down, big_r).unwrap();
        assert_relative_eq!(up.length(), curve.length(), max_relative = 1e-9);
        let ratio = down.length() / curve.length();
        prop_assert!(ratio >= r.sinh() / big_r.sinh() * (1.0 - 1e-9));
        prop_assert!(ratio <= r.cosh() / big_r.cosh() * (1.0 + 1e-9));
        let out = outward_ratio_bounds(r, big_r).unwrap();
        let back = up.length() / down.length();
        prop_assert!(back >= out.lo * (1.0 - 1e-9) && back <= out.hi * (1.0 + 1e-9));
    }

    #[test]
    fn torus_areas_increase(t in tube(), a in 0.01..0.99f64, b in 0.01..0.99f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r = t.radius();
        let area = |x: f64| t.torus_lattice_at_radius(x * r).unwrap().area();
        prop_assert!(area(lo) < area(hi));
        assert_relative_eq!(area(hi), TAU * t.core_length() * (hi * r).sinh() * (hi * r).cosh(), max_relative = 1e-12);
    }

    #[test]
    fn nz_window_decreasing(a in 7.9..1e4f64, b in 7.9..1e4f64) {
        prop_assume!(a < b * (1.0 - 1e-9));
        let (wa, wb) = (nz_core_length_window(a).unwrap(), nz_core_length_window(b).unwrap());
        prop_assert!(wa.lo > wb.lo && wa.hi > wb.hi);
        prop_assert!(wa.lo < wa.hi);
    }

    #[test]
    fn distance_matches_hyperboloid(r1 in 0.0..5.0f64, t1 in -10.0..10.0f64, z1 in -2.0..2.0f64,
                                    r2 in 0.0..5.0f64, t2 in -10.0..10.0f64, z2 in -2.0..2.0f64) {
        let (a, b) = (TubePoint::new(r1, t1, z1), TubePoint::new(r2, t2, z2));
        let d = distance(a, b);
        let oracle = common::h3_distance((r1, t1, z1), (r2, t2, z2));
        prop_assert!((d - oracle).abs() <= 1e-7 * (1.0 + d), "{} vs {}", d, oracle);
        prop_assert_eq!(d, distance(b, a));
    }

    #[test]
    fn deck_transformations_are_isometries(t in tube(), m in -3i64..3, k in -3i64..3,
                                           r1 in 0.0..0.3f64, r2 in 0.0..0.3f64, dt in -3.0..3.0f64, dz in -1.0..1.0f64) {
        let (a, b) = (TubePoint::new(r1 * t.radius(), 0.2, 0.1), TubePoint::new(r2 * t.radius(), 0.2 + dt, 0.1 + dz));
        let d = distance(a, b);
        let e = distance(t.deck(a, m, k), t.deck(b, m, k));
        prop_assert!((d - e).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn sampled_geodesic_is_nearly_straight(r1 in 0.1..3.0f64, r2 in 0.1..3.0f64, dt in -3.0..3.0f64, dz in -1.0..1.0f64) {
        let (a, b) = (TubePoint::new(r1, 1.0, 0.0), TubePoint::new(r2, 1.0 + dt, dz));
        let g = geodesic(a, b, 2048);
        let d = distance(a, b);
        prop_assert!(g.length() >= d * (1.0 - 1e-12));
        prop_assert!(g.length() <= d * (1.0 + 1e-4) + 1e-12);
        prop_assert_eq!(g.start(), a);
        prop_assert!((g.end().r - b.r).abs() < 1e-12 && (g.end().z - b.z).abs() < 1e-12);
    }

    #[test]
    fn boundary_lattice_round_trip(side in 0.2..2.0f64, shear in -0.5..0.5f64, n in 3i64..2000) {
        let lat = FlatTorusLattice::new([side, 0.0], [side * shear, side * 0.9]).unwrap();
        let t = TubeShape::from_boundary_lattice(&lat, Slope::new(1, -n).unwrap()).unwrap();
        let back = t.boundary_lattice();
        assert_relative_eq!(back.area(), lat.area(), max_relative = 1e-9);
        assert_relative_eq!(back.shortest_vector().1, lat.shortest_vector().1, max_relative = 1e-9);
        assert_relative_eq!(TAU * t.radius().sinh(), lat.slope_length(&Slope::new(1, -n).unwrap()), max_relative = 1e-12);
    }

    #[test]
    fn thick_boundary_radius_realizes_mu(t in tube(), mu in 0.1..1.0f64) {
        let t = t.with_radius(8.0).unwrap();
        prop_assume!(t.core_length() < mu);
        let r = t.thick_boundary_radius(mu).unwrap();
        let min_disp = |x: f64| {
            (1..=400)
                .map(|k| common::h3_distance((x, 0.0, 0.0), (x, k as f64 * t.twist(), k as f64 * t.core_length())))
                .fold(f64::INFINITY, f64::min)
        };
        prop_assert!((min_disp(r) - mu).abs() <= 1e-6 * mu, "{} at r = {}", min_disp(r), r);
        prop_assert!(min_disp(r + 0.05) > mu);
    }

    #[test]
    fn meyerhoff_radius_decreasing(a in 1e-6..0.09f64, b in 1e-6..0.09f64) {
        prop_assume!(a < b * (1.0 - 1e-9));
        prop_assert!(TubeShape::meyerhoff_radius(a).unwrap() > TubeShape::meyerhoff_radius(b).unwrap());
    }
}

#[test]
fn lattice_at_radius_example() {
    let t = TubeShape::new(0.05, 1.0, 3.0).unwrap();
    let lat = t.torus_lattice_at_radius(2.0).unwrap();
    let (s, c) = (2f64.sinh(), 2f64.cosh());
    let (m, l) = (lat.v1(), lat.v2());
    assert_relative_eq!(m[0].hypot(m[1]), TAU * s, max_relative = 1e-12);
    assert_relative_eq!(l[0].hypot(l[1]), (s * s + 0.0025 * c * c).sqrt(), max_relative = 1e-12);
}

#[test]
fn spiral_projection_ratio() {
    let t = TubeShape::new(0.1, 0.3, 2.5).unwrap();
    let pts: Vec<TubePoint> = (0..=200)
        .map(|i| {
            let s = i as f64 / 200.0;
            TubePoint::new(2.5, 3.0 * TAU * s, 0.8 * s)
        })
        .collect();
    let curve = TubePath::new(pts).unwrap();
    let proj = project_curve(&t, &curve, 1.0).unwrap();
    let ratio = common::path_length(&proj) / common::path_length(&curve);
    assert!(ratio >= 1f64.sinh() / 2.5f64.sinh() && ratio <= 1f64.cosh() / 2.5f64.cosh(), "{ratio}");
    assert_relative_eq!(proj.length() / curve.length(), ratio, max_relative = 1e-8);
}

#[test]
fn radial_arc_projects_to_a_point() {
    let t = TubeShape::new(0.1, 0.3, 2.5).unwrap();
    let arc = TubePath::new(vec![TubePoint::new(2.5, 1.0, 0.2), TubePoint::new(1.5, 1.0, 0.2)]).unwrap();
    assert_eq!(project_curve(&t, &arc, 1.0).unwrap().length(), 0.0);
}

#[test]
fn depth_examples() {
    let t = TubeShape::new(0.1, 0.3, 3.0).unwrap();
    let p = TubePath::new(vec![
        TubePoint::new(3.0, 0.0, 0.0),
        TubePoint::new(0.7, 1.0, 0.1),
        TubePoint::new(3.0, 2.0, 0.2),
    ])
    .unwrap();
    assert_relative_eq!(tube_depth(&t, &[&p]).unwrap(), 2.3, max_relative = 1e-15);
    let on = TubePath::new(vec![TubePoint::new(3.0, 0.0, 0.0), TubePoint::new(3.0, 1.0, 0.0)]).unwrap();
    assert_eq!(tube_depth(&t, &[&on]).unwrap(), 0.0);
}

#[test]
fn nz_threshold_and_asymptotics() {
    assert!(nz_core_length_window(NZ_MIN_LENGTH).is_err());
    assert!(nz_core_length_window(f64::INFINITY).is_err());
    let w = nz_core_length_window(1e6).unwrap();
    assert_relative_eq!(w.lo / w.hi, 1.0, max_relative = 1e-10);
}
