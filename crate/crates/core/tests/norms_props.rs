use approx::assert_relative_eq;
use lamcert::curves::{core_loop, k_functional, HybridCurve, MultiCurve, Pairing, Segment};
use lamcert::norms::{empirical_norm_estimate, stable_lower_bound_from_cores, thick_stable_upper_bound};
use lamcert::tube::nz_core_length_window;
use lamcert::{CohomologyClass, TubeShape};
use proptest::prelude::*;

fn thick_curve(len: f64, tag: Vec<i64>) -> MultiCurve {
    MultiCurve::single(HybridCurve::new(vec![Segment::thick("e", len, tag)], &[]).unwrap())
}

fn family() -> impl Strategy<Value = Vec<(String, MultiCurve)>> {
    proptest::collection::vec((0.1..10.0f64, proptest::collection::vec(-5i64..=5, 2), 1i64..4), 1..8).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (len, tag, w))| (format!("c{i}"), thick_curve(len, tag).scaled(w).unwrap()))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn core_bound_is_n_over_window_top(n in 1usize..6, ell in 7.824..1e3f64) {
        let lower = stable_lower_bound_from_cores(n, ell).unwrap();
        let w = nz_core_length_window(ell).unwrap();
        assert_relative_eq!(lower, n as f64 / w.hi, max_relative = 1e-12);
        prop_assert!(lower < n as f64 / w.lo);
        let more = stable_lower_bound_from_cores(n, ell * 1.001).unwrap();
        prop_assert!(more > lower);
    }

    #[test]
    fn union_never_lowers_the_estimate(a in family(), b in family(), cls in proptest::collection::vec(-4i64..=4, 2)) {
        let p = Pairing { thick: CohomologyClass::new(cls), core_values: vec![] };
        let ea = empirical_norm_estimate(&p, &a, &[], None).unwrap();
        let mut ab = a.clone();
        ab.extend(b);
        let eab = empirical_norm_estimate(&p, &ab, &[], None).unwrap();
        prop_assert!(eab.lower >= ea.lower);
        for (w, (_, g)) in eab.witnesses.iter().zip(&ab) {
            prop_assert_eq!(w.k, k_functional(&p, g, &[], None).unwrap());
            prop_assert!(w.k.abs() <= eab.lower);
        }
    }

    #[test]
    fn every_bound_scales_with_the_class(f in family(), cls in proptest::collection::vec(-4i64..=4, 2), m in -5i64..=5,
                                         c in 0.1..10.0f64, norm in 0u64..1000) {
        let p = Pairing { thick: CohomologyClass::new(cls), core_values: vec![] };
        let base = empirical_norm_estimate(&p, &f, &[], None).unwrap();
        let scaled = empirical_norm_estimate(&p.scale(m), &f, &[], None).unwrap();
        assert_relative_eq!(scaled.lower, m.unsigned_abs() as f64 * base.lower, max_relative = 1e-12);
        for (a, b) in base.witnesses.iter().zip(&scaled.witnesses) {
            assert_relative_eq!(b.k, m as f64 * a.k, max_relative = 1e-12);
        }
        let upper = thick_stable_upper_bound(c, norm).unwrap();
        assert_relative_eq!(
            thick_stable_upper_bound(c, m.unsigned_abs() * norm).unwrap(),
            m.unsigned_abs() as f64 * upper,
            max_relative = 1e-12
        );
    }
}

#[test]
fn core_multicurve_witness() {
    let ell = 12.0;
    let w = nz_core_length_window(ell).unwrap();
    let tubes = [
        TubeShape::new(w.lo + 0.25 * w.width(), 0.3, 4.0).unwrap(),
        TubeShape::new(w.lo + 0.75 * w.width(), 2.0, 4.0).unwrap(),
    ];
    let cores: Vec<(HybridCurve, i64)> = (0..2)
        .map(|t| {
            let seg = Segment::Tube {
                tube: t,
                path: core_loop(&tubes[t], 1, 0.0, 0.0),
            };
            (HybridCurve::new(vec![seg], &tubes).unwrap(), 1)
        })
        .collect();
    let g = MultiCurve::new(cores).unwrap();
    let p = Pairing {
        thick: CohomologyClass::new(vec![1, 1]),
        core_values: vec![1, 1],
    };
    let est = empirical_norm_estimate(&p, &[("cores".into(), g)], &tubes, None).unwrap();
    assert!(est.lower > 1.0 / w.hi && est.lower < 1.0 / w.lo);
    assert_relative_eq!(est.lower, 2.0 / (tubes[0].core_length() + tubes[1].core_length()), max_relative = 1e-12);
    assert_relative_eq!(stable_lower_bound_from_cores(2, ell).unwrap(), 115.22 / std::f64::consts::PI, max_relative = 1e-13);
}

#[test]
fn trivial_family_is_zero() {
    let p = Pairing {
        thick: CohomologyClass::new(vec![0, 1]),
        core_values: vec![],
    };
    let est = empirical_norm_estimate(&p, &[("x".into(), thick_curve(2.0, vec![7, 0]))], &[], None).unwrap();
    assert_eq!(est.lower, 0.0);
    assert!(empirical_norm_estimate(&p, &[], &[], None).is_err());
}
