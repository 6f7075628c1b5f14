//! Seeded Monte-Carlo property suites for the tube estimates.
//!
//! Every sample draws from its own ChaCha stream `(seed, suite, index)`, so a
//! run is bit-reproducible regardless of the number of worker threads.
//! Samples are evaluated in parallel and merged in index order.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::SCHEMA;
use crate::curves::{cap_and_tighten, shorten_deep_multicurve, HybridCurve, Pairing, Segment};
use crate::decimal;
use crate::error::Result;
use crate::homology::CohomologyClass;
use crate::lattice::{FlatTorusLattice, Slope};
use crate::tube::{
    projection_factor_bound, project_curve, TubePath, TubePoint, TubeShape, DIAMETER_TOL, LOG4,
};

/// Relative slack for the pointwise factor comparison (a few ulps).
pub const PAIR_SLACK: f64 = 1e-15;
/// Relative slack for projected curve lengths.
pub const CURVE_SLACK: f64 = 1e-8;
/// Relative slack for the homology check after shortening.
pub const PAIRING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSizes {
    pub pairs: usize,
    pub curves: usize,
    pub arcs: usize,
    pub fixtures: usize,
}

impl SuiteSizes {
    /// `samples` factor pairs, and `samples/100`, `samples/100`, `samples/500`
    /// of the costlier suites (at least one each).
    pub fn from_samples(samples: usize) -> Self {
        SuiteSizes {
            pairs: samples.max(1),
            curves: (samples / 100).max(1),
            arcs: (samples / 100).max(1),
            fixtures: (samples / 500).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sample: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest margin seen; nonnegative when every sample passed.
    #[serde(with = "decimal")]
    pub worst_margin: f64,
    /// Samples whose hypotheses guarantee the property.
    pub guaranteed: usize,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.suites.iter().map(|s| s.violations).sum()
    }
}

/// Outcome of one sample.
#[derive(Debug, Clone)]
pub struct Sample {
    pub margin: f64,
    pub guaranteed: bool,
    pub failure: Option<String>,
}

impl Sample {
    fn check(margin: f64, guaranteed: bool, failure: Option<String>) -> Self {
        Sample {
            margin,
            guaranteed,
            failure,
        }
    }
}

pub fn sample_rng(seed: u64, suite: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite << 48) | index as u64);
    rng
}

fn run_suite<F>(name: &str, suite: u64, n: usize, seed: u64, f: F) -> SuiteResult
where
    F: Fn(&mut ChaCha8Rng) -> Result<Sample> + Sync,
{
    let outcomes: Vec<Sample> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, suite, i);
            f(&mut rng).unwrap_or_else(|e| Sample::check(f64::NEG_INFINITY, false, Some(format!("error: {e}"))))
        })
        .collect();
    let mut res = SuiteResult {
        name: name.to_string(),
        samples: n,
        violations: 0,
        worst_margin: f64::INFINITY,
        guaranteed: 0,
        first_violation: None,
    };
    for (i, s) in outcomes.into_iter().enumerate() {
        res.worst_margin = res.worst_margin.min(s.margin);
        res.guaranteed += s.guaranteed as usize;
        if let Some(detail) = s.failure {
            res.violations += 1;
            if res.first_violation.is_none() {
                res.first_violation = Some(Violation { sample: i, detail });
            }
        }
    }
    res
}

/// `cosh r / cosh R ≤ e^{−r} + e^{r−R}` for random `0 < r < R < 50`.
pub fn projection_pairs(n: usize, seed: u64) -> SuiteResult {
    run_suite("projection-factor", 1, n, seed, |rng| {
        let big_r = rng.random_range(1e-6..50.0);
        let r = rng.random_range(0.0..1.0) * big_r;
        if !(r > 0.0 && r < big_r) {
            return Ok(Sample::check(0.0, true, None));
        }
        let f = projection_factor_bound(r, big_r)?;
        let margin = (f.bound - f.exact) / f.bound;
        let failure = (f.exact > f.bound * (1.0 + PAIR_SLACK))
            .then(|| format!("r = {r}, R = {big_r}: exact {} > bound {}", f.exact, f.bound));
        Ok(Sample::check(margin, true, failure))
    })
}

/// A tube with random core, twist and radius in the given range.
pub fn random_tube(rng: &mut impl Rng, radius: std::ops::Range<f64>) -> Result<TubeShape> {
    TubeShape::new(
        rng.random_range(0.005..0.5),
        rng.random_range(0.0..TAU),
        rng.random_range(radius),
    )
}

/// A random closed-up polyline on the torus `T_r`.
pub fn random_torus_curve(rng: &mut impl Rng, r: f64) -> Result<TubePath> {
    let k = rng.random_range(2..=12);
    let mut pts = Vec::with_capacity(k);
    let (mut th, mut z) = (rng.random_range(0.0..TAU), rng.random_range(-1.0..1.0));
    for _ in 0..k {
        pts.push(TubePoint::new(r, th, z));
        th += rng.random_range(-2.0..2.0);
        z += rng.random_range(-0.5..0.5);
    }
    TubePath::new(pts)
}

/// Random curves on `T_R` projected inward to `T_r`: the length ratio lies in
/// `[sinh r / sinh R, cosh r / cosh R]`, hence below `e^{−r} + e^{r−R}`.
pub fn projected_curves(n: usize, seed: u64) -> SuiteResult {
    run_suite("projected-curves", 2, n, seed, |rng| {
        let tube = random_tube(rng, 0.2..10.0)?;
        let big_r = tube.radius();
        let r = big_r * rng.random_range(0.01..0.99);
        let curve = random_torus_curve(rng, big_r)?;
        let proj = project_curve(&tube, &curve, r)?;
        let (orig, new) = (curve.length(), proj.length());
        let f = projection_factor_bound(r, big_r)?;
        let (lo, hi) = (r.sinh() / big_r.sinh(), f.exact);
        let margin = (f.bound * orig - new) / orig;
        let failure = if new > f.bound * orig * (1.0 + CURVE_SLACK) {
            Some(format!("r = {r}, R = {big_r}: projected {new} > bound·{orig}"))
        } else if new > hi * orig * (1.0 + CURVE_SLACK) || new < lo * orig * (1.0 - CURVE_SLACK) {
            Some(format!("r = {r}, R = {big_r}: ratio {} outside [{lo}, {hi}]", new / orig))
        } else {
            None
        };
        Ok(Sample::check(margin, true, failure))
    })
}

/// A boundary-to-boundary arc reaching below radius `floor`.
pub fn random_deep_arc(rng: &mut impl Rng, tube: &TubeShape, floor: f64) -> Result<TubePath> {
    let big_r = tube.radius();
    let inner = rng.random_range(1..=5);
    let deepest = rng.random_range(0..inner);
    let th0 = rng.random_range(0.0..TAU);
    let z0 = rng.random_range(-0.5..0.5);
    let mut pts = vec![TubePoint::new(big_r, th0, z0)];
    for i in 0..inner {
        let r = if i == deepest {
            rng.random_range(0.0..1.0) * floor
        } else {
            rng.random_range(0.0..big_r)
        };
        pts.push(TubePoint::new(
            r,
            th0 + rng.random_range(-3.0..3.0),
            z0 + rng.random_range(-0.5..0.5),
        ));
    }
    pts.push(TubePoint::new(
        big_r,
        th0 + rng.random_range(-3.0..3.0),
        z0 + rng.random_range(-0.5..0.5),
    ));
    TubePath::new(pts)
}

/// Margins `len(σ̄) − len(γ) − D/4 − len(α)/2` of random deep arcs in tubes of
/// radius `big_r` with depth parameter `d`.
pub fn cap_margins(n: usize, seed: u64, big_r: f64, d: f64) -> SuiteResult {
    run_suite("cap-margins", 3, n, seed, |rng| {
        let tube = random_tube(rng, 1.0..2.0)?.with_radius(big_r)?;
        let floor = (big_r - d).max(0.0) * (1.0 - 1e-6);
        let arc = random_deep_arc(rng, &tube, floor)?;
        let res = cap_and_tighten(&tube, &arc, d)?;
        let failure = (res.margin < 0.0).then(|| {
            format!(
                "margin {} (depth {}, capped {}, tightened {}, cap {})",
                res.margin, res.depth, res.capped_length, res.tightened_length, res.cap_length
            )
        });
        Ok(Sample::check(res.margin, res.guaranteed, failure))
    })
}

/// A tube whose boundary is a near-hexagonal torus of side about 0.35 with a
/// long meridian, so that it is deep enough for the shortening procedure.
/// Returns the tube and a depth `D` meeting `D ≥ 8·diam + 2 log 4`.
pub fn random_deep_tube(rng: &mut impl Rng) -> Result<(TubeShape, f64)> {
    let a = rng.random_range(0.3..0.4);
    let shear = rng.random_range(0.45..0.55);
    let lat = FlatTorusLattice::new([a, 0.0], [a * shear, a * 3f64.sqrt() / 2.0])?;
    let n = rng.random_range(8_000..20_000);
    let tube = TubeShape::from_boundary_lattice(&lat, Slope::new(1, -n)?)?;
    let diam = tube.boundary_diameter(DIAMETER_TOL)?;
    let d = 8.0 * diam.hi + 2.0 * LOG4 + rng.random_range(0.0..0.2);
    Ok((tube, d))
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub tubes: Vec<TubeShape>,
    pub d: f64,
    pub curve: HybridCurve,
    pub pairing: Pairing,
}

/// A hybrid curve through one or two deep tubes with one to four strands,
/// at least one of which is deeper than `D`.
pub fn random_fixture(rng: &mut impl Rng) -> Result<Fixture> {
    let count = rng.random_range(1..=2);
    let mut tubes = Vec::new();
    let mut d: f64 = 0.0;
    for _ in 0..count {
        let (t, dt) = random_deep_tube(rng)?;
        tubes.push(t);
        d = d.max(dt);
    }
    // R > D + log 4 for every tube
    let min_r = tubes.iter().map(|t| t.radius()).fold(f64::INFINITY, f64::min);
    d = d.min(min_r - LOG4 - 1e-3);
    let strands = rng.random_range(1..=4);
    let deep_one = rng.random_range(0..strands);
    let mut segments = Vec::new();
    for s in 0..strands {
        segments.push(Segment::thick(
            format!("e{s}"),
            rng.random_range(0.5..5.0),
            vec![rng.random_range(-3..=3), rng.random_range(-3..=3)],
        ));
        let t = rng.random_range(0..count);
        let shape = &tubes[t];
        let big_r = shape.radius();
        let deep = s == deep_one || rng.random_bool(0.5);
        let path = if deep {
            random_deep_arc(rng, shape, (big_r - d) * 0.95)?
        } else {
            let floor = big_r - 0.9 * d;
            let th0 = rng.random_range(0.0..TAU);
            let z0 = rng.random_range(-0.01..0.01);
            let mut pts = vec![TubePoint::new(big_r, th0, z0)];
            for _ in 0..rng.random_range(1..=3) {
                pts.push(TubePoint::new(
                    rng.random_range(floor..big_r),
                    th0 + rng.random_range(-0.1..0.1),
                    z0 + rng.random_range(-0.01..0.01),
                ));
            }
            pts.push(TubePoint::new(
                big_r,
                th0 + rng.random_range(-0.1..0.1),
                z0 + rng.random_range(-0.01..0.01),
            ));
            TubePath::new(pts)?
        };
        segments.push(Segment::Tube { tube: t, path });
    }
    let curve = HybridCurve::new(segments, &tubes)?;
    let pairing = Pairing {
        thick: CohomologyClass::new(vec![rng.random_range(-3..=3), rng.random_range(-3..=3)]),
        core_values: (0..count).map(|_| rng.random_range(-3..=3)).collect(),
    };
    Ok(Fixture {
        tubes,
        d,
        curve,
        pairing,
    })
}

/// Every property of the shortening procedure on one fixture; `Err` strings
/// name the first one that fails.
pub fn check_shortening(fx: &Fixture) -> Result<(f64, Option<String>)> {
    let res = shorten_deep_multicurve(&fx.curve, &fx.tubes, fx.d)?;
    let margin = res.original_length - res.new_length;
    let fail = |m: String| Ok((margin, Some(m)));
    if !(res.new_length < res.original_length) {
        return fail(format!("not shorter: {} -> {}", res.original_length, res.new_length));
    }
    let key = |s: &Segment| match s {
        Segment::Thick { label, length, tag } => Some((label.clone(), length.to_bits(), tag.clone())),
        Segment::Tube { .. } => None,
    };
    let mut before: Vec<_> = fx.curve.segments.iter().filter_map(key).collect();
    let mut after: Vec<_> = res
        .multicurve
        .components
        .iter()
        .flat_map(|(c, w)| std::iter::repeat_n(c, w.unsigned_abs() as usize))
        .flat_map(|c| c.segments.iter().filter_map(key))
        .collect();
    before.sort();
    after.sort();
    if before != after {
        return fail("thick trace changed".into());
    }
    for l in &res.ledger {
        if !l.nets_to_zero() {
            return fail(format!("tube {}: ledger does not net to zero: {:?}", l.tube, l));
        }
        let n = l.caps / 2;
        if l.added_cap_length > 2.0 * n as f64 * l.diameter_hi {
            return fail(format!(
                "tube {}: added cap length {} exceeds 2n·diam = {}",
                l.tube,
                l.added_cap_length,
                2.0 * n as f64 * l.diameter_hi
            ));
        }
    }
    let added: f64 = res.ledger.iter().map(|l| l.added_cap_length).sum();
    if !(res.savings > added) {
        return fail(format!("savings {} do not exceed added caps {added}", res.savings));
    }
    let rho_old = fx.pairing.curve(&fx.curve, &fx.tubes);
    let rho_new = fx.pairing.multicurve(&res.multicurve, &fx.tubes);
    let scale: f64 = fx
        .curve
        .segments
        .iter()
        .map(|s| fx.pairing.segment(s, &fx.tubes).abs())
        .sum::<f64>()
        + 1.0;
    if (rho_old - rho_new).abs() > PAIRING_SLACK * scale {
        return fail(format!("pairing changed: {rho_old} -> {rho_new}"));
    }
    if rho_old > 0.0 && rho_new / res.new_length < rho_old / res.original_length {
        return fail("K decreased".into());
    }
    for (c, _) in &res.multicurve.components {
        if c.segments.iter().any(Segment::is_thick) {
            for t in 0..fx.tubes.len() {
                let depth = c.depth_in(&fx.tubes, t);
                if depth > fx.d {
                    return fail(format!("component keeps depth {depth} > D in tube {t}"));
                }
            }
        }
    }
    Ok((margin, None))
}

pub fn shortening_fixtures(n: usize, seed: u64) -> SuiteResult {
    run_suite("multicurve-shortening", 4, n, seed, |rng| {
        let fx = random_fixture(rng)?;
        let (margin, failure) = check_shortening(&fx)?;
        Ok(Sample::check(margin, true, failure))
    })
}

/// The four suites with the sizes of `sizes`. The cap-margin suite uses
/// `R = 4` and `D = 2 log 4`.
pub fn verify_tubes(sizes: SuiteSizes, seed: u64) -> VerifyReport {
    VerifyReport {
        schema: SCHEMA.to_string(),
        seed,
        suites: vec![
            projection_pairs(sizes.pairs, seed),
            projected_curves(sizes.curves, seed),
            cap_margins(sizes.arcs, seed, 4.0, 2.0 * LOG4),
            shortening_fixtures(sizes.fixtures, seed),
        ],
    }
}
