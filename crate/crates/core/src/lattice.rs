//! Flat 2-tori: slope lengths, normalized lengths, systoles and diameters.
//!
//! A flat torus is `R² / Λ` for a rank-2 lattice `Λ`. Cusp cross-sections and
//! the boundary tori of hyperbolic tubes are both modelled this way. Slopes
//! are primitive integer pairs `(p, q)` in the lattice basis, so the geodesic
//! length of a slope is the norm of `p·v₁ + q·v₂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub type Vec2 = [f64; 2];

fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

fn det(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn comb(p: f64, a: Vec2, q: f64, b: Vec2) -> Vec2 {
    [p * a[0] + q * b[0], p * a[1] + q * b[1]]
}

/// Extended Euclid: `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// A primitive homology class `(p, q)` on a torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        let g = gcd(p, q);
        if g != 1 {
            return Err(Error::NonPrimitiveSlope { p, q, gcd: g });
        }
        Ok(Slope { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn pair(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    pub fn neg(&self) -> Slope {
        Slope { p: -self.p, q: -self.q }
    }
}

impl TryFrom<(i64, i64)> for Slope {
    type Error = Error;
    fn try_from((p, q): (i64, i64)) -> Result<Self> {
        Slope::new(p, q)
    }
}

impl From<Slope> for (i64, i64) {
    fn from(s: Slope) -> Self {
        (s.p, s.q)
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

/// One slope per cusp, in cusp order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompleteSlope(pub Vec<Slope>);

impl CompleteSlope {
    pub fn new(per_cusp: Vec<Slope>) -> Self {
        CompleteSlope(per_cusp)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Slope> {
        self.0.iter()
    }

    /// Parses `"p,q;p,q;..."`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for (i, part) in s.split(';').enumerate() {
            let nums: Vec<&str> = part.split(',').map(str::trim).collect();
            if nums.len() != 2 {
                return Err(Error::Invalid(format!(
                    "slope entry {i} ({part:?}) must be \"p,q\""
                )));
            }
            let p = nums[0]
                .parse()
                .map_err(|_| Error::Invalid(format!("slope entry {i}: bad p {:?}", nums[0])))?;
            let q = nums[1]
                .parse()
                .map_err(|_| Error::Invalid(format!("slope entry {i}: bad q {:?}", nums[1])))?;
            out.push(Slope::new(p, q)?);
        }
        Ok(CompleteSlope(out))
    }
}

impl std::fmt::Display for CompleteSlope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A Lagrange-reduced basis together with the unimodular change of basis.
///
/// `b1 = c[0][0]·v₁ + c[0][1]·v₂` and `b2 = c[1][0]·v₁ + c[1][1]·v₂`, with
/// `|b1| ≤ |b2|` and `b1·b2 ≥ 0`, `2·|b1·b2| ≤ |b1|²`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedBasis {
    pub b1: Vec2,
    pub b2: Vec2,
    pub coeffs: [[i64; 2]; 2],
}

/// A rank-2 Euclidean lattice, the deck group of a flat torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct FlatTorusLattice {
    v1: Vec2,
    v2: Vec2,
    area: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLattice {
    v1: Vec2,
    v2: Vec2,
}

impl TryFrom<RawLattice> for FlatTorusLattice {
    type Error = Error;
    fn try_from(r: RawLattice) -> Result<Self> {
        FlatTorusLattice::new(r.v1, r.v2)
    }
}

impl From<FlatTorusLattice> for RawLattice {
    fn from(l: FlatTorusLattice) -> Self {
        RawLattice { v1: l.v1, v2: l.v2 }
    }
}

impl FlatTorusLattice {
    pub fn new(v1: Vec2, v2: Vec2) -> Result<Self> {
        if !(v1.iter().chain(v2.iter()).all(|x| x.is_finite())) {
            return Err(Error::DegenerateLattice);
        }
        let area = det(v1, v2).abs();
        // exceeds the rounding error of the determinant itself
        let noise = 4.0 * f64::EPSILON * ((v1[0] * v2[1]).abs() + (v1[1] * v2[0]).abs());
        if !(area > noise) || area < f64::MIN_POSITIVE {
            return Err(Error::DegenerateLattice);
        }
        Ok(FlatTorusLattice { v1, v2, area })
    }

    /// Builds the lattice of a cusp cross-section from its shape modulus
    /// `τ = re + i·im` (upper half plane) and area `A`: the basis is
    /// `s·(1, 0)`, `s·(re, im)` with `s = √(A / im)`.
    pub fn from_cusp_shape(re: f64, im: f64, area: f64) -> Result<Self> {
        if !(im > 0.0) {
            return Err(Error::OutOfRange {
                what: "cusp modulus imaginary part",
                value: im,
                reason: "must be positive".into(),
            });
        }
        if !(area > 0.0) {
            return Err(Error::OutOfRange {
                what: "cusp area",
                value: area,
                reason: "must be positive".into(),
            });
        }
        let s = (area / im).sqrt();
        FlatTorusLattice::new([s, 0.0], [s * re, s * im])
    }

    pub fn v1(&self) -> Vec2 {
        self.v1
    }

    pub fn v2(&self) -> Vec2 {
        self.v2
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        FlatTorusLattice::new([k * self.v1[0], k * self.v1[1]], [k * self.v2[0], k * self.v2[1]])
    }

    /// `p·v₁ + q·v₂`.
    pub fn vector(&self, p: i64, q: i64) -> Vec2 {
        comb(p as f64, self.v1, q as f64, self.v2)
    }

    /// Largest absolute basis coordinate; sets the scale of rounding error.
    fn magnitude(&self) -> f64 {
        self.v1
            .iter()
            .chain(self.v2.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Lagrange (Gauss) reduction.
    pub fn reduce(&self) -> ReducedBasis {
        let (mut b1, mut b2) = (self.v1, self.v2);
        let (mut c1, mut c2) = ([1i64, 0], [0i64, 1]);
        if dot(b1, b1) > dot(b2, b2) {
            std::mem::swap(&mut b1, &mut b2);
            std::mem::swap(&mut c1, &mut c2);
        }
        loop {
            let m = (dot(b1, b2) / dot(b1, b1)).round();
            if m != 0.0 {
                b2 = comb(1.0, b2, -m, b1);
                let mi = m as i64;
                c2 = [c2[0] - mi * c1[0], c2[1] - mi * c1[1]];
            }
            if dot(b2, b2) >= dot(b1, b1) {
                break;
            }
            std::mem::swap(&mut b1, &mut b2);
            std::mem::swap(&mut c1, &mut c2);
        }
        if dot(b1, b2) < 0.0 {
            b2 = [-b2[0], -b2[1]];
            c2 = [-c2[0], -c2[1]];
        }
        ReducedBasis { b1, b2, coeffs: [c1, c2] }
    }

    /// Geodesic length of a slope: `|p·v₁ + q·v₂|`.
    pub fn slope_length(&self, s: &Slope) -> f64 {
        norm(self.vector(s.p, s.q))
    }

    /// Slope length scaled by `1/√area`; unchanged under rescaling the torus.
    pub fn normalized_length(&self, s: &Slope) -> f64 {
        self.slope_length(s) / self.area.sqrt()
    }

    /// A shortest primitive class and its length.
    ///
    /// Among classes of equal length (to 1e-12 relative), the returned one has
    /// sign normalized so the first nonzero coordinate is positive, and the
    /// smallest `(|q|, p)`: multiples of `v₁` win ties.
    pub fn shortest_vector(&self) -> (Slope, f64) {
        let red = self.reduce();
        let min = norm(red.b1);
        let mut best: Option<((i64, i64), f64)> = None;
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                if (x, y) == (0, 0) {
                    continue;
                }
                let v = comb(x as f64, red.b1, y as f64, red.b2);
                let len = norm(v);
                if len > min * (1.0 + 1e-12) {
                    continue;
                }
                let mut p = x * red.coeffs[0][0] + y * red.coeffs[1][0];
                let mut q = x * red.coeffs[0][1] + y * red.coeffs[1][1];
                if p < 0 || (p == 0 && q < 0) {
                    p = -p;
                    q = -q;
                }
                if gcd(p, q) != 1 {
                    continue;
                }
                let key = (q.abs(), p);
                let take = match best {
                    None => true,
                    Some(((bp, bq), _)) => key < (bq.abs(), bp),
                };
                if take {
                    best = Some(((p, q), self.slope_length(&Slope { p, q })));
                }
            }
        }
        let ((p, q), len) = best.expect("reduced basis vector is always a candidate");
        (Slope { p, q }, len)
    }

    /// Lattice point nearest to `target`, as original-basis coefficients and
    /// the vector itself.
    pub fn closest_vector(&self, target: Vec2) -> ((i64, i64), Vec2) {
        let red = self.reduce();
        let d = det(red.b1, red.b2);
        // coordinates of target in the reduced basis
        let x = det(target, red.b2) / d;
        let y = det(red.b1, target) / d;
        let (x0, y0) = (x.round() as i64, y.round() as i64);
        let mut best = (i64::MAX, i64::MAX);
        let mut best_d = f64::INFINITY;
        for dx in -2..=2 {
            for dy in -2..=2 {
                let (a, b) = (x0 + dx, y0 + dy);
                let v = comb(a as f64, red.b1, b as f64, red.b2);
                let dist = norm([target[0] - v[0], target[1] - v[1]]);
                if dist < best_d {
                    best_d = dist;
                    best = (a, b);
                }
            }
        }
        let (a, b) = best;
        let p = a * red.coeffs[0][0] + b * red.coeffs[1][0];
        let q = a * red.coeffs[0][1] + b * red.coeffs[1][1];
        ((p, q), self.vector(p, q))
    }

    /// Covering radius of the lattice, which is also the diameter of the flat
    /// torus, as an interval of width at most `tol` whenever floating point
    /// allows.
    ///
    /// For a reduced basis oriented with `b1·b2 ≥ 0` the triangle
    /// `0, b1, b2` is non-obtuse, hence a Delaunay triangle, and its
    /// circumradius is the covering radius. The interval is padded by a
    /// rounding bound scaled by the input basis magnitude, since reducing a
    /// badly skewed basis loses absolute precision in proportion to it.
    pub fn covering_radius(&self, tol: f64) -> Result<Interval> {
        if !(tol > 0.0) {
            return Err(Error::OutOfRange {
                what: "covering radius tolerance",
                value: tol,
                reason: "must be positive".into(),
            });
        }
        let red = self.reduce();
        let (a, b) = (red.b1, red.b2);
        let c = comb(1.0, b, -1.0, a);
        let area2 = det(a, b).abs();
        let la = norm(a);
        let lb = norm(b);
        let lc = norm(c);
        // non-obtuse check; fails only through rounding on near-right triangles
        let acute = dot(a, b) >= -1e-12 * la * lb
            && dot([-a[0], -a[1]], c) >= -1e-12 * la * lc
            && dot(b, c) >= -1e-12 * lb * lc;
        if !acute || area2 <= 0.0 {
            return self.covering_radius_by_grid(tol);
        }
        let r = la * lb * lc / (2.0 * area2);
        let pad = 1e-12 * r + 64.0 * f64::EPSILON * self.magnitude();
        Ok(Interval::new((r - pad).max(0.0), r + pad))
    }

    /// Grid bound on the covering radius: the maximum distance-to-lattice over
    /// an `N × N` grid on the reduced fundamental parallelogram gives the lower
    /// end; adding the grid's maximal gap (half the longer cell diagonal) gives
    /// an upper end, since distance to the lattice is 1-Lipschitz. `N` is
    /// chosen so that this gap is below `tol / 2`, capped at 2000 per side, so
    /// the width can exceed `tol` for very fine tolerances.
    pub fn covering_radius_by_grid(&self, tol: f64) -> Result<Interval> {
        if !(tol > 0.0) {
            return Err(Error::OutOfRange {
                what: "covering radius tolerance",
                value: tol,
                reason: "must be positive".into(),
            });
        }
        let red = self.reduce();
        let (a, b) = (red.b1, red.b2);
        let diag = norm(comb(1.0, a, 1.0, b)).max(norm(comb(1.0, a, -1.0, b)));
        let n = ((diag / tol).ceil() as usize).clamp(4, 2_000);
        let gap = 0.5 * diag / n as f64;
        let mut lo = 0.0f64;
        for i in 0..=n {
            for j in 0..=n {
                let x = comb(i as f64 / n as f64, a, j as f64 / n as f64, b);
                let mut d = f64::INFINITY;
                for u in -1..=2 {
                    for w in -1..=2 {
                        let l = comb(u as f64, a, w as f64, b);
                        d = d.min(norm([x[0] - l[0], x[1] - l[1]]));
                    }
                }
                lo = lo.max(d);
            }
        }
        Ok(Interval::new(lo, lo + gap))
    }
}

/// Total normalized length `ℓ̂` defined by `ℓ̂⁻² = Σᵢ ℓᵢ⁻²` over cusps.
pub fn total_normalized_length(lattices: &[FlatTorusLattice], s: &CompleteSlope) -> Result<f64> {
    if lattices.is_empty() {
        return Err(Error::EmptyCuspList);
    }
    if lattices.len() != s.len() {
        return Err(Error::CuspCountMismatch {
            expected: lattices.len(),
            got: s.len(),
        });
    }
    let inv: f64 = lattices
        .iter()
        .zip(s.iter())
        .map(|(l, si)| l.normalized_length(si).powi(-2))
        .sum();
    Ok(inv.powf(-0.5))
}

/// Signed intersection number `⟨u, v⟩ = u.x·v.y − u.y·v.x` on `H₁(T²)`.
pub fn intersection(u: (i64, i64), v: (i64, i64)) -> i64 {
    u.0 * v.1 - u.1 * v.0
}
