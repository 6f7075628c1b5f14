//! Hyperbolic tubes around a short geodesic.
//!
//! A tube of radius `R` around a core of length `ε` and twist `θ₀` carries the
//! metric `dr² + sinh²r dθ² + cosh²r dz²`. Points are stored in lifted
//! coordinates `(r, θ, z)` with `θ, z` unrestricted reals; the deck group is
//! generated by the meridian `θ ↦ θ + 2π` and the longitude
//! `(θ, z) ↦ (θ + θ₀, z + ε)`. These coordinates are exactly cylindrical
//! coordinates on H³ about the lifted core, which gives closed forms for
//! distances and geodesics.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::error::{Error, Result};
use crate::interval::{Interval, Tri};
use crate::lattice::{ext_gcd, FlatTorusLattice, Slope};
use crate::quad;

/// `log 4`.
pub const LOG4: f64 = std::f64::consts::LN_2 * 2.0;

/// Total normalized length at or below which the core-length window is void.
pub const NZ_MIN_LENGTH: f64 = 7.823;
pub const NZ_LOWER_SHIFT: f64 = 16.17;
pub const NZ_UPPER_SHIFT: f64 = 28.78;

/// Relative tolerance for path length quadrature.
pub const LENGTH_TOL: f64 = 1e-9;

/// Longest core for which the Meyerhoff radius estimate applies.
pub const MEYERHOFF_MAX_CORE: f64 = 0.0978;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTube", into = "RawTube")]
pub struct TubeShape {
    core_length: f64,
    twist: f64,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct RawTube {
    #[serde(with = "decimal")]
    core_length: f64,
    #[serde(with = "decimal")]
    twist: f64,
    #[serde(with = "decimal")]
    radius: f64,
}

impl TryFrom<RawTube> for TubeShape {
    type Error = Error;
    fn try_from(r: RawTube) -> Result<Self> {
        TubeShape::new(r.core_length, r.twist, r.radius)
    }
}

impl From<TubeShape> for RawTube {
    fn from(t: TubeShape) -> Self {
        RawTube {
            core_length: t.core_length,
            twist: t.twist(),
            radius: t.radius,
        }
    }
}

fn positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            reason: "must be positive and finite".into(),
        })
    }
}

impl TubeShape {
    /// The twist is taken modulo `2π`.
    pub fn new(core_length: f64, twist: f64, radius: f64) -> Result<Self> {
        positive("core length", core_length)?;
        positive("tube radius", radius)?;
        if !twist.is_finite() {
            return Err(Error::OutOfRange {
                what: "twist",
                value: twist,
                reason: "must be finite".into(),
            });
        }
        // stored in (−π, π] so that twists near a full turn keep their precision
        let mut twist = twist;
        if !(twist > -PI && twist <= PI) {
            twist = twist.rem_euclid(TAU);
            if twist > PI {
                twist -= TAU;
            }
        }
        Ok(TubeShape {
            core_length,
            twist,
            radius,
        })
    }

    /// The tube whose boundary torus is isometric to `lattice`, with `meridian`
    /// bounding the disk.
    pub fn from_boundary_lattice(lattice: &FlatTorusLattice, meridian: Slope) -> Result<Self> {
        let (p, q) = meridian.pair();
        let m = lattice.vector(p, q);
        let m_len = m[0].hypot(m[1]);
        // (p, q) and (p', q') with p·q' − q·p' = 1 form a basis.
        let (_, x, y) = ext_gcd(p, q);
        let (pp, qp) = (-y, x);
        let mut t = lattice.vector(pp, qp);
        let e = [m[0] / m_len, m[1] / m_len];
        let mut ty = e[0] * t[1] - e[1] * t[0];
        if ty < 0.0 {
            t = [-t[0], -t[1]];
            ty = -ty;
        }
        let tx = e[0] * t[0] + e[1] * t[1];
        let radius = (m_len / TAU).asinh();
        TubeShape::new(ty / radius.cosh(), TAU * tx / m_len, radius)
    }

    pub fn core_length(&self) -> f64 {
        self.core_length
    }

    /// The twist in `[0, 2π)`.
    pub fn twist(&self) -> f64 {
        if self.twist < 0.0 {
            (self.twist + TAU).min(TAU.next_down())
        } else {
            self.twist
        }
    }

    /// The twist in `(−π, π]`.
    pub fn signed_twist(&self) -> f64 {
        self.twist
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        TubeShape::new(self.core_length, self.twist, radius)
    }

    /// Flat structure of the torus `T_r`: meridian `(2π sinh r, 0)`, longitude
    /// `(θ₀ sinh r, ε cosh r)`.
    pub fn torus_lattice_at_radius(&self, r: f64) -> Result<FlatTorusLattice> {
        if !(r > 0.0 && r <= self.radius) {
            return Err(Error::OutOfRange {
                what: "torus radius",
                value: r,
                reason: format!("must lie in (0, {}]", self.radius),
            });
        }
        let (s, c) = (r.sinh(), r.cosh());
        FlatTorusLattice::new([TAU * s, 0.0], [self.twist * s, self.core_length * c])
    }

    pub fn boundary_lattice(&self) -> FlatTorusLattice {
        self.torus_lattice_at_radius(self.radius)
            .expect("radius is positive by construction")
    }

    /// Diameter of the boundary torus, as a certified interval.
    pub fn boundary_diameter(&self, tol: f64) -> Result<Interval> {
        self.boundary_lattice().covering_radius(tol)
    }

    /// Lift of the `(m, k)` deck transformation: meridian `m` times, longitude `k` times.
    pub fn deck(&self, p: TubePoint, m: i64, k: i64) -> TubePoint {
        TubePoint {
            r: p.r,
            theta: p.theta + TAU * m as f64 + self.twist * k as f64,
            z: p.z + self.core_length * k as f64,
        }
    }

    /// Radius of the torus `T^μ` where the injectivity radius is `μ/2`.
    ///
    /// A point at radius `r` is moved by the `k`-th power of the core by
    /// `cosh d = cosh kε + sinh²r (cosh kε − cos kθ₀)`, so `r_μ` is the largest
    /// `r` with some power moving by exactly `μ`. Only best approximations of
    /// `θ₀/2π` can realize the maximum. Returns `None` when the core itself is
    /// not shorter than `μ` (the core lies in the thick part).
    pub fn thick_boundary_radius(&self, mu: f64) -> Option<f64> {
        let eps = self.core_length;
        if !(mu > 0.0) || eps >= mu {
            return None;
        }
        let x = self.twist.abs() / TAU;
        let half_mu = (0.5 * mu).sinh();
        let eval = |k: u64| -> Option<f64> {
            let ke = k as f64 * eps;
            if ke >= mu {
                return None;
            }
            let sh = (0.5 * ke).sinh();
            let num = 2.0 * (half_mu * half_mu - sh * sh);
            let v = k as f64 * x;
            let frac = (v - v.round()).abs();
            let sn = (PI * frac).sin();
            let den = 2.0 * (sh * sh + sn * sn);
            Some((num / den).sqrt().asinh())
        };
        let mut best = eval(1)?;
        // Continued-fraction denominators of x.
        let (mut q_prev, mut q) = (1u64, 0u64);
        let mut y = x;
        for _ in 0..64 {
            let a = y.floor();
            let next = (a as u64).saturating_mul(q).saturating_add(q_prev);
            q_prev = q;
            q = next;
            if q > 0 {
                match eval(q) {
                    Some(r) => best = best.max(r),
                    None => break,
                }
            }
            let f = y - a;
            if f < 1e-15 {
                break;
            }
            y = 1.0 / f;
        }
        Some(best)
    }

    /// Maximal-tube radius estimate from the core length alone (Meyerhoff,
    /// Corollary 2): with `k = cosh √(4πε/√3) − 1`,
    /// `sinh² R = ½(√(1 − 2k)/k − 1)`. Valid for `ε < 0.0978`.
    pub fn meyerhoff_radius(core_length: f64) -> Option<f64> {
        if !(core_length > 0.0 && core_length < MEYERHOFF_MAX_CORE) {
            return None;
        }
        // cosh x − 1, without cancellation for tiny cores
        let k = 2.0 * (0.5 * (4.0 * PI * core_length / 3f64.sqrt()).sqrt()).sinh().powi(2);
        let s2 = 0.5 * ((1.0 - 2.0 * k).sqrt() / k - 1.0);
        if !(s2 > 0.0) {
            return None;
        }
        Some(s2.sqrt().asinh())
    }
}

/// A point of the tube in lifted coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubePoint {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

impl TubePoint {
    pub fn new(r: f64, theta: f64, z: f64) -> Self {
        TubePoint { r, theta, z }
    }

    /// Embedding in the hyperboloid model of H³.
    pub fn hyperboloid(&self) -> [f64; 4] {
        let (ch, sh) = (self.r.cosh(), self.r.sinh());
        [
            ch * self.z.cosh(),
            ch * self.z.sinh(),
            sh * self.theta.cos(),
            sh * self.theta.sin(),
        ]
    }
}

/// Hyperbolic distance between two lifted points.
pub fn distance(a: TubePoint, b: TubePoint) -> f64 {
    let sz = (0.5 * (b.z - a.z)).sinh();
    let sr = (0.5 * (b.r - a.r)).sinh();
    let st = (0.5 * (b.theta - a.theta)).sin();
    let s2 = a.r.cosh() * b.r.cosh() * sz * sz + sr * sr + a.r.sinh() * b.r.sinh() * st * st;
    2.0 * s2.max(0.0).sqrt().asinh()
}

/// Length of the coordinate-linear segment from `a` to `b`.
pub fn segment_length(a: TubePoint, b: TubePoint, rel_tol: f64) -> f64 {
    let (dr, dt, dz) = (b.r - a.r, b.theta - a.theta, b.z - a.z);
    let speed = |r: f64| {
        let (s, c) = (r.sinh(), r.cosh());
        (dr * dr + s * s * dt * dt + c * c * dz * dz).sqrt()
    };
    if dr == 0.0 {
        return speed(a.r);
    }
    quad::integrate(|s| speed(a.r + s * dr), 0.0, 1.0, rel_tol)
}

/// Polyline in lifted coordinates, interpolated linearly between vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TubePath {
    pub points: Vec<TubePoint>,
}

impl TubePath {
    pub fn new(points: Vec<TubePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPath);
        }
        for p in &points {
            if !(p.r >= 0.0 && p.r.is_finite() && p.theta.is_finite() && p.z.is_finite()) {
                return Err(Error::PathOutsideRegion(format!(
                    "vertex ({}, {}, {}) is not a valid tube point",
                    p.r, p.theta, p.z
                )));
            }
        }
        Ok(TubePath { points })
    }

    pub fn start(&self) -> TubePoint {
        self.points[0]
    }

    pub fn end(&self) -> TubePoint {
        self.points[self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length_with_tol(LENGTH_TOL)
    }

    pub fn length_with_tol(&self, rel_tol: f64) -> f64 {
        self.points
            .windows(2)
            .map(|w| segment_length(w[0], w[1], rel_tol))
            .sum()
    }

    pub fn min_r(&self) -> f64 {
        self.points.iter().fold(f64::INFINITY, |m, p| m.min(p.r))
    }

    pub fn max_r(&self) -> f64 {
        self.points.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.r))
    }

    /// Net displacement along the core direction.
    pub fn dz(&self) -> f64 {
        self.end().z - self.start().z
    }

    pub fn reversed(&self) -> TubePath {
        let mut points = self.points.clone();
        points.reverse();
        TubePath { points }
    }

    /// The same path with every radius replaced by `f(r)`.
    pub fn map_r(&self, f: impl Fn(f64) -> f64) -> TubePath {
        TubePath {
            points: self
                .points
                .iter()
                .map(|p| TubePoint::new(f(p.r), p.theta, p.z))
                .collect(),
        }
    }
}

/// Lipschitz factors for the projection `T_R → T_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFactors {
    /// `e^{−r} + e^{r−R}`.
    #[serde(with = "decimal")]
    pub bound: f64,
    /// `cosh r / cosh R`.
    #[serde(with = "decimal")]
    pub exact: f64,
}

pub fn projection_factor_bound(r: f64, big_r: f64) -> Result<ProjectionFactors> {
    if !(r > 0.0 && r < big_r && big_r.is_finite()) {
        return Err(Error::OutOfRange {
            what: "projection radius",
            value: r,
            reason: format!("need 0 < r < R = {big_r}"),
        });
    }
    // cosh r / cosh R computed without overflow for large R.
    let exact = (r - big_r).exp() * (1.0 + (-2.0 * r).exp()) / (1.0 + (-2.0 * big_r).exp());
    Ok(ProjectionFactors {
        bound: (-r).exp() + (r - big_r).exp(),
        exact,
    })
}

/// Length ratio bounds `[cosh t / cosh s, sinh t / sinh s]` for pushing a
/// curve on `T_s` out to `T_t`, `s < t`.
pub fn outward_ratio_bounds(s: f64, t: f64) -> Result<Interval> {
    if !(s > 0.0 && s <= t) {
        return Err(Error::OutOfRange {
            what: "projection radius",
            value: s,
            reason: format!("need 0 < s ≤ t = {t}"),
        });
    }
    Ok(Interval::new(t.cosh() / s.cosh(), t.sinh() / s.sinh()))
}

/// Cylindrical projection onto `T_{target_r}`.
///
/// A path lying in `target_r ≤ r ≤ R` is pushed inward; a path lying in
/// `r ≤ target_r` is pushed outward. Anything else is rejected.
pub fn project_curve(tube: &TubeShape, path: &TubePath, target_r: f64) -> Result<TubePath> {
    let slack = 1e-12 * (1.0 + tube.radius);
    if !(target_r > 0.0 && target_r <= tube.radius + slack) {
        return Err(Error::OutOfRange {
            what: "projection target radius",
            value: target_r,
            reason: format!("must lie in (0, {}]", tube.radius),
        });
    }
    let (lo, hi) = (path.min_r(), path.max_r());
    if hi > tube.radius + slack {
        return Err(Error::PathOutsideRegion(format!(
            "path reaches r = {hi} beyond tube radius {}",
            tube.radius
        )));
    }
    if lo >= target_r - slack || hi <= target_r + slack {
        Ok(path.map_r(|_| target_r))
    } else {
        Err(Error::PathOutsideRegion(format!(
            "path spans r ∈ [{lo}, {hi}] on both sides of target {target_r}"
        )))
    }
}

/// `radius − min r` over one or more paths.
pub fn tube_depth(tube: &TubeShape, paths: &[&TubePath]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    for p in paths {
        if p.is_empty() {
            return Err(Error::EmptyPath);
        }
        lo = lo.min(p.min_r());
    }
    if paths.is_empty() {
        return Err(Error::EmptyPath);
    }
    Ok((tube.radius - lo).max(0.0))
}

/// Window `(2π/(ℓ² + 16.17), 2π/(ℓ² − 28.78))` for the length of a filling core.
pub fn nz_core_length_window(ell: f64) -> Result<Interval> {
    if !(ell > NZ_MIN_LENGTH) || !ell.is_finite() {
        return Err(Error::BelowNzThreshold { ell });
    }
    let l2 = ell * ell;
    Ok(Interval::new(TAU / (l2 + NZ_LOWER_SHIFT), TAU / (l2 - NZ_UPPER_SHIFT)))
}

/// The H³ geodesic from `a` to `b`, sampled at `samples + 1` points.
///
/// θ along the result is continuous from `a.theta`; the final vertex agrees with
/// `b` modulo `2π` in θ.
pub fn geodesic(a: TubePoint, b: TubePoint, samples: usize) -> TubePath {
    let samples = samples.max(1);
    let d = distance(a, b);
    // Work relative to a so that large z and θ offsets cost no precision.
    let a0 = TubePoint::new(a.r, 0.0, 0.0);
    let b0 = TubePoint::new(b.r, b.theta - a.theta, b.z - a.z);
    let (x, y) = (a0.hyperboloid(), b0.hyperboloid());
    let mut points = Vec::with_capacity(samples + 1);
    points.push(a);
    let mut theta = 0.0;
    for i in 1..=samples {
        if i == samples {
            let mut dt = (b0.theta - theta).rem_euclid(TAU);
            if dt > PI {
                dt -= TAU;
            }
            points.push(TubePoint::new(b.r, a.theta + theta + dt, b.z));
            break;
        }
        let s = i as f64 / samples as f64;
        let p = if d < 1e-300 {
            x
        } else {
            let (ca, cb) = (((1.0 - s) * d).sinh() / d.sinh(), (s * d).sinh() / d.sinh());
            [
                ca * x[0] + cb * y[0],
                ca * x[1] + cb * y[1],
                ca * x[2] + cb * y[2],
                ca * x[3] + cb * y[3],
            ]
        };
        let sh = p[2].hypot(p[3]);
        let r = sh.asinh();
        let ch = r.cosh();
        let z = (p[1] / ch).asinh();
        if sh > 1e-15 {
            let t = p[3].atan2(p[2]);
            let mut dt = (t - theta).rem_euclid(TAU);
            if dt > PI {
                dt -= TAU;
            }
            theta += dt;
        }
        points.push(TubePoint::new(r, a.theta + theta, a.z + z));
    }
    TubePath { points }
}

/// One named hypothesis with its margin and status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub tube: Option<usize>,
    pub margin: Interval,
    pub status: Tri,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeDeepnessRecord {
    #[serde(with = "decimal")]
    pub radius: f64,
    pub boundary_diameter: Interval,
    /// `R − r_μ`; `None` when the core is not in the thin part.
    #[serde(with = "decimal::opt")]
    pub dist_thick_to_boundary: Option<f64>,
    /// `r_μ`.
    #[serde(with = "decimal::opt")]
    pub dist_thick_to_core: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepnessCertificate {
    #[serde(with = "decimal")]
    pub d: f64,
    #[serde(with = "decimal")]
    pub t: f64,
    #[serde(with = "decimal")]
    pub mu: f64,
    pub tubes: Vec<TubeDeepnessRecord>,
}

pub const DIAMETER_TOL: f64 = 1e-9;

impl DeepnessCertificate {
    pub fn from_tubes(d: f64, t: f64, mu: f64, tubes: &[TubeShape]) -> Result<Self> {
        positive("D", d)?;
        positive("t", t)?;
        positive("mu", mu)?;
        let mut records = Vec::with_capacity(tubes.len());
        for tube in tubes {
            let r_mu = tube.thick_boundary_radius(mu);
            records.push(TubeDeepnessRecord {
                radius: tube.radius,
                boundary_diameter: tube.boundary_diameter(DIAMETER_TOL)?,
                dist_thick_to_boundary: r_mu.map(|r| tube.radius - r),
                dist_thick_to_core: r_mu,
            });
        }
        Ok(DeepnessCertificate {
            d,
            t,
            mu,
            tubes: records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepnessVerdict {
    /// Depth required of the thick boundary: `2D` when doubled, else `D`.
    #[serde(with = "decimal")]
    pub required_depth: f64,
    pub doubled: bool,
    pub checks: Vec<ConditionCheck>,
    pub overall: Tri,
}

impl DeepnessVerdict {
    pub fn failing(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| c.status != Tri::Pass)
    }
}

/// Checks the depth hypotheses for a `(D', log 4)`-deep constant, `D' = 2D`
/// when `doubled`, together with the diameter and radius conditions on each tube.
pub fn check_deepness(cert: &DeepnessCertificate, doubled: bool) -> DeepnessVerdict {
    let depth = if doubled { 2.0 * cert.d } else { cert.d };
    let mut checks = Vec::new();
    let mut push = |name: &str, tube: Option<usize>, margin: Interval, status: Tri| {
        checks.push(ConditionCheck {
            name: name.to_string(),
            tube,
            margin,
            status,
        })
    };
    let m = Interval::point(cert.d - 2.0 * LOG4);
    push("D >= 2 log 4", None, m, Tri::nonneg(m));
    let m = Interval::point(cert.t - LOG4);
    push("t >= log 4", None, m, Tri::nonneg(m));
    for (i, rec) in cert.tubes.iter().enumerate() {
        let base = cert.d - 2.0 * LOG4;
        let m = Interval::new(base - 8.0 * rec.boundary_diameter.hi, base - 8.0 * rec.boundary_diameter.lo);
        push("D >= 8 diam + 2 log 4", Some(i), m, Tri::nonneg(m));
        let m = Interval::point(rec.radius - depth - LOG4);
        push("radius > depth + log 4", Some(i), m, Tri::positive(m));
        match (rec.dist_thick_to_boundary, rec.dist_thick_to_core) {
            (Some(outer), Some(inner)) => {
                let m = Interval::point(outer - depth);
                push("dist(thick boundary, tube boundary) >= depth", Some(i), m, Tri::nonneg(m));
                let m = Interval::point(inner - cert.t);
                push("dist(thick boundary, core) >= t", Some(i), m, Tri::nonneg(m));
            }
            _ => {
                let m = Interval::point(f64::NEG_INFINITY);
                push("core shorter than mu", Some(i), m, Tri::Fail);
            }
        }
    }
    let overall = checks.iter().fold(Tri::Pass, |acc, c| acc.and(c.status));
    DeepnessVerdict {
        required_depth: depth,
        doubled,
        checks,
        overall,
    }
}
