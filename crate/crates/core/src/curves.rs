//! Hybrid curves: abstract thick-part segments joined by explicit in-tube paths.
//!
//! Thick segments carry a declared length and a homology tag. Tube segments are
//! polylines in lifted tube coordinates. The cohomology class is represented by
//! a [`Pairing`]: a covector on thick tags plus the value of the class on each
//! tube core, which inside a tube is the closed form `c · dz / ε`.

use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::error::{Error, Result};
use crate::homology::CohomologyClass;
use crate::lattice::FlatTorusLattice;
use crate::tube::{self, TubePath, TubePoint, TubeShape, LOG4};

/// Slack used when deciding whether a vertex sits on a tube boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Segment {
    Thick {
        label: String,
        #[serde(with = "decimal")]
        length: f64,
        tag: Vec<i64>,
    },
    Tube {
        tube: usize,
        path: TubePath,
    },
}

impl Segment {
    pub fn thick(label: impl Into<String>, length: f64, tag: Vec<i64>) -> Segment {
        Segment::Thick {
            label: label.into(),
            length,
            tag,
        }
    }

    pub fn is_thick(&self) -> bool {
        matches!(self, Segment::Thick { .. })
    }

    pub fn length(&self) -> f64 {
        match self {
            Segment::Thick { length, .. } => *length,
            Segment::Tube { path, .. } => path.length(),
        }
    }
}

/// A closed curve as a cyclic list of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridCurve {
    pub segments: Vec<Segment>,
}

impl HybridCurve {
    /// Validates the segment list against `tubes`.
    ///
    /// If any thick segment is present, tube segments must run from boundary
    /// to boundary and be separated by thick segments. A curve with no thick
    /// segment is a single tube segment.
    pub fn new(segments: Vec<Segment>, tubes: &[TubeShape]) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyPath);
        }
        let has_thick = segments.iter().any(Segment::is_thick);
        if !has_thick && segments.len() != 1 {
            return Err(Error::Invalid(
                "a curve without thick segments must be a single tube segment".into(),
            ));
        }
        let n = segments.len();
        for (i, seg) in segments.iter().enumerate() {
            match seg {
                Segment::Thick { length, .. } => {
                    if !(*length > 0.0 && length.is_finite()) {
                        return Err(Error::OutOfRange {
                            what: "thick segment length",
                            value: *length,
                            reason: format!("segment {i} must have positive finite length"),
                        });
                    }
                }
                Segment::Tube { tube, path } => {
                    let shape = tubes.get(*tube).ok_or(Error::IndexOutOfRange {
                        what: "tube",
                        index: *tube,
                        len: tubes.len(),
                    })?;
                    if path.is_empty() {
                        return Err(Error::EmptyPath);
                    }
                    let slack = BOUNDARY_TOL * (1.0 + shape.radius());
                    if path.max_r() > shape.radius() + slack {
                        return Err(Error::PathOutsideRegion(format!(
                            "segment {i} leaves tube {tube}"
                        )));
                    }
                    if has_thick {
                        let on = |p: TubePoint| (p.r - shape.radius()).abs() <= slack;
                        if !on(path.start()) || !on(path.end()) {
                            return Err(Error::PathOutsideRegion(format!(
                                "segment {i} does not start and end on the boundary of tube {tube}"
                            )));
                        }
                        if !segments[(i + 1) % n].is_thick() {
                            return Err(Error::Invalid(format!(
                                "tube segments {i} and {} are not separated by a thick segment",
                                (i + 1) % n
                            )));
                        }
                    }
                }
            }
        }
        Ok(HybridCurve { segments })
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Length with every tube path pushed out to at least the interface
    /// radius of its tube, i.e. kept inside the thick part.
    pub fn thick_length(&self, interfaces: &[f64]) -> f64 {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Thick { length, .. } => *length,
                Segment::Tube { tube, path } => {
                    let floor = interfaces.get(*tube).copied().unwrap_or(0.0);
                    path.map_r(|r| r.max(floor)).length()
                }
            })
            .sum()
    }

    pub fn thick_segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.is_thick())
    }

    pub fn depth_in(&self, tubes: &[TubeShape], tube: usize) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Tube { tube: t, path } if *t == tube => {
                    Some(tubes[tube].radius() - path.min_r())
                }
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Weighted sum of closed curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCurve {
    pub components: Vec<(HybridCurve, i64)>,
}

impl MultiCurve {
    pub fn new(components: Vec<(HybridCurve, i64)>) -> Result<Self> {
        if components.iter().any(|(_, w)| *w == 0) {
            return Err(Error::Invalid("multicurve weights must be nonzero".into()));
        }
        Ok(MultiCurve { components })
    }

    pub fn single(curve: HybridCurve) -> Self {
        MultiCurve {
            components: vec![(curve, 1)],
        }
    }

    pub fn length(&self) -> f64 {
        self.components
            .iter()
            .map(|(c, w)| w.unsigned_abs() as f64 * c.length())
            .sum()
    }

    pub fn thick_length(&self, interfaces: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|(c, w)| w.unsigned_abs() as f64 * c.thick_length(interfaces))
            .sum()
    }

    pub fn scaled(&self, k: i64) -> Result<Self> {
        MultiCurve::new(self.components.iter().map(|(c, w)| (c.clone(), w * k)).collect())
    }
}

/// Evaluation of a cohomology class on hybrid curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub thick: CohomologyClass,
    /// Value of the class on each tube core.
    pub core_values: Vec<i64>,
}

impl Pairing {
    pub fn segment(&self, seg: &Segment, tubes: &[TubeShape]) -> f64 {
        match seg {
            Segment::Thick { tag, .. } => self.thick.pair(tag) as f64,
            Segment::Tube { tube, path } => {
                let c = self.core_values.get(*tube).copied().unwrap_or(0) as f64;
                c * path.dz() / tubes[*tube].core_length()
            }
        }
    }

    pub fn curve(&self, curve: &HybridCurve, tubes: &[TubeShape]) -> f64 {
        curve.segments.iter().map(|s| self.segment(s, tubes)).sum()
    }

    pub fn multicurve(&self, g: &MultiCurve, tubes: &[TubeShape]) -> f64 {
        g.components
            .iter()
            .map(|(c, w)| *w as f64 * self.curve(c, tubes))
            .sum()
    }

    pub fn scale(&self, k: i64) -> Pairing {
        Pairing {
            thick: self.thick.scale(k),
            core_values: self.core_values.iter().map(|c| c * k).collect(),
        }
    }
}

/// `K(g) = ρ(g) / len(g)`, with the thick length when `interfaces` is given.
/// The zero chain has `K = 0`.
pub fn k_functional(
    pairing: &Pairing,
    g: &MultiCurve,
    tubes: &[TubeShape],
    interfaces: Option<&[f64]>,
) -> Result<f64> {
    let rho = pairing.multicurve(g, tubes);
    if g.components.is_empty() || rho == 0.0 {
        return Ok(0.0);
    }
    let len = match interfaces {
        Some(i) => g.thick_length(i),
        None => g.length(),
    };
    if !(len > 0.0) {
        return Err(Error::ZeroLengthChain);
    }
    Ok(rho / len)
}

/// The shortest flat geodesic on `T_R` from `from` to a translate of `to`.
///
/// Returns the translate as deck coefficients `(m, k)` and the cap length.
pub fn euclid_cap(tube: &TubeShape, from: TubePoint, to: TubePoint) -> ((i64, i64), f64) {
    let r = tube.radius();
    let lat: FlatTorusLattice = tube.boundary_lattice();
    let diff = [r.sinh() * (to.theta - from.theta), r.cosh() * (to.z - from.z)];
    let ((m, k), v) = lat.closest_vector([-diff[0], -diff[1]]);
    let len = (diff[0] + v[0]).hypot(diff[1] + v[1]);
    ((m, k), len)
}

/// The core traversed `k` times from height `z0`, or a constant loop for `k = 0`.
pub fn core_loop(tube: &TubeShape, k: i64, theta0: f64, z0: f64) -> TubePath {
    let start = TubePoint::new(0.0, theta0, z0);
    if k == 0 {
        return TubePath { points: vec![start] };
    }
    TubePath {
        points: vec![start, tube.deck(start, 0, k)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    FixedEndpoints,
    /// Free homotopy of a closed loop; the result is a power of the core.
    FreeLoop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tightened {
    pub path: TubePath,
    #[serde(with = "decimal")]
    pub length: f64,
    #[serde(with = "decimal")]
    pub original_length: f64,
    pub core_power: Option<i64>,
}

/// Number of samples along a tightened fixed-endpoint path.
pub const GEODESIC_SAMPLES: usize = 64;

/// Power of the core represented by a closed in-tube loop.
pub fn loop_core_power(tube: &TubeShape, path: &TubePath) -> Result<i64> {
    let (a, b) = (path.start(), path.end());
    let kf = (b.z - a.z) / tube.core_length();
    let k = kf.round();
    let scale = 1.0 + kf.abs();
    if (kf - k).abs() > 1e-6 * scale || (a.r - b.r).abs() > 1e-9 * (1.0 + a.r) {
        return Err(Error::Invalid(format!(
            "path is not closed in the tube: Δz/ε = {kf}, r from {} to {}",
            a.r, b.r
        )));
    }
    let k = k as i64;
    if a.r > 1e-12 {
        let dt = b.theta - a.theta - tube.signed_twist() * k as f64;
        let off = dt - std::f64::consts::TAU * (dt / std::f64::consts::TAU).round();
        if off.abs() > 1e-6 * scale {
            return Err(Error::Invalid(format!(
                "path is not closed in the tube: angular mismatch {off}"
            )));
        }
    }
    Ok(k)
}

/// Replaces `path` by the length minimizer in its class.
///
/// Tube coordinates are cylindrical coordinates on H³ and tubes are convex,
/// so the fixed-endpoint minimizer is the H³ geodesic, and a closed loop
/// tightens to the matching power of the core.
pub fn tighten_in_tube(tube: &TubeShape, path: &TubePath, constraint: Constraint) -> Result<Tightened> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let slack = BOUNDARY_TOL * (1.0 + tube.radius());
    if path.max_r() > tube.radius() + slack {
        return Err(Error::PathOutsideRegion("path leaves the tube".into()));
    }
    let original_length = path.length();
    match constraint {
        Constraint::FixedEndpoints => {
            let (a, b) = (path.start(), path.end());
            Ok(Tightened {
                path: tube::geodesic(a, b, GEODESIC_SAMPLES),
                length: tube::distance(a, b),
                original_length,
                core_power: None,
            })
        }
        Constraint::FreeLoop => {
            let k = loop_core_power(tube, path)?;
            let s = path.start();
            Ok(Tightened {
                path: core_loop(tube, k, s.theta, s.z),
                length: k.unsigned_abs() as f64 * tube.core_length(),
                original_length,
                core_power: Some(k),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapResult {
    /// The arc closed up by the flat cap.
    pub capped: TubePath,
    pub tightened: TubePath,
    pub core_power: i64,
    #[serde(with = "decimal")]
    pub capped_length: f64,
    #[serde(with = "decimal")]
    pub tightened_length: f64,
    #[serde(with = "decimal")]
    pub cap_length: f64,
    #[serde(with = "decimal")]
    pub depth: f64,
    /// `len(σ̄) − len(γ) − D/4 − len(α)/2`.
    #[serde(with = "decimal")]
    pub margin: f64,
    /// Whether the arc and tube meet the hypotheses under which the margin is
    /// known to be nonnegative.
    pub guaranteed: bool,
    pub notes: Vec<String>,
}

fn on_boundary(tube: &TubeShape, p: TubePoint) -> bool {
    (p.r - tube.radius()).abs() <= BOUNDARY_TOL * (1.0 + tube.radius())
}

/// Closes a boundary-to-boundary arc with the shortest flat cap and tightens it.
pub fn cap_and_tighten(tube: &TubeShape, arc: &TubePath, d: f64) -> Result<CapResult> {
    if arc.len() < 2 {
        return Err(Error::EmptyPath);
    }
    if !on_boundary(tube, arc.start()) || !on_boundary(tube, arc.end()) {
        return Err(Error::PathOutsideRegion(
            "arc must start and end on the tube boundary".into(),
        ));
    }
    let depth = tube::tube_depth(tube, &[arc])?;
    let ((m, k), cap_length) = euclid_cap(tube, arc.end(), arc.start());
    let close = tube.deck(arc.start(), m, k);
    let mut points = arc.points.clone();
    points.push(close);
    let capped = TubePath { points };
    let arc_length = arc.length();
    let capped_length = arc_length + cap_length;
    let tight = tighten_in_tube(tube, &capped, Constraint::FreeLoop)?;
    let core_power = tight.core_power.unwrap_or(0);

    let mut notes = Vec::new();
    if !(depth > d) {
        notes.push(format!("depth {depth} does not exceed D = {d}"));
    }
    if !(d >= 2.0 * LOG4) {
        notes.push(format!("D = {d} is below 2 log 4"));
    }
    if !(tube.radius() >= d + LOG4) {
        notes.push(format!("radius {} is below D + log 4", tube.radius()));
    }
    let guaranteed = notes.is_empty();
    if !guaranteed {
        notes.push("inequality not guaranteed".into());
    }
    Ok(CapResult {
        margin: capped_length - tight.length - d / 4.0 - cap_length / 2.0,
        capped,
        tightened: tight.path,
        core_power,
        capped_length,
        tightened_length: tight.length,
        cap_length,
        depth,
        guaranteed,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeLedger {
    pub tube: usize,
    pub entries: usize,
    pub exits: usize,
    pub caps: usize,
    /// Net deck translation over all caps, interior and exterior.
    pub net_translation: (i64, i64),
    #[serde(with = "decimal")]
    pub added_cap_length: f64,
    #[serde(with = "decimal")]
    pub diameter_hi: f64,
}

impl TubeLedger {
    pub fn nets_to_zero(&self) -> bool {
        self.entries == self.exits && self.net_translation == (0, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortenResult {
    pub multicurve: MultiCurve,
    /// Interior loops before tightening, parallel to the interior components.
    pub interior_capped: Vec<TubePath>,
    pub ledger: Vec<TubeLedger>,
    #[serde(with = "decimal")]
    pub original_length: f64,
    #[serde(with = "decimal")]
    pub new_length: f64,
    /// Length removed by tightening the interior loops.
    #[serde(with = "decimal")]
    pub savings: f64,
    pub deep_strands: usize,
}

struct Strand {
    index: usize,
    tube: usize,
    path: TubePath,
}

/// Replaces deep excursions of `curve` by caps on the tube boundary.
///
/// Strands of depth greater than `d` are cut out. Within each tube, exits
/// are paired with entries greedily by shortest flat cap (ties by traversal
/// order). Interior pieces are closed by these caps and tightened to core
/// powers; exterior pieces are closed by the same caps reversed, so the
/// homology class and the thick-part trace are unchanged.
pub fn shorten_deep_multicurve(curve: &HybridCurve, tubes: &[TubeShape], d: f64) -> Result<ShortenResult> {
    let original_length = curve.length();
    let strands: Vec<Strand> = curve
        .segments
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Segment::Tube { tube, path }
                if curve.segments.iter().any(Segment::is_thick)
                    && tubes[*tube].radius() - path.min_r() > d =>
            {
                Some(Strand {
                    index: i,
                    tube: *tube,
                    path: path.clone(),
                })
            }
            _ => None,
        })
        .collect();
    if strands.is_empty() {
        return Ok(ShortenResult {
            multicurve: MultiCurve::single(curve.clone()),
            interior_capped: Vec::new(),
            ledger: Vec::new(),
            original_length,
            new_length: original_length,
            savings: 0.0,
            deep_strands: 0,
        });
    }

    let mut used: Vec<usize> = strands.iter().map(|s| s.tube).collect();
    used.sort_unstable();
    used.dedup();
    let mut diam_hi = vec![0.0; tubes.len()];
    for &t in &used {
        let shape = &tubes[t];
        let diam = shape.boundary_diameter(tube::DIAMETER_TOL)?;
        diam_hi[t] = diam.hi;
        if !(d >= 8.0 * diam.hi + 2.0 * LOG4) {
            return Err(Error::Hypothesis(format!(
                "tube {t}: D = {d} is below 8·diam + 2 log 4 = {}",
                8.0 * diam.hi + 2.0 * LOG4
            )));
        }
        if !(shape.radius() > d + LOG4) {
            return Err(Error::Hypothesis(format!(
                "tube {t}: radius {} is not above D + log 4 = {}",
                shape.radius(),
                d + LOG4
            )));
        }
    }

    // partner[i] = j: the exit of strand i is capped to the entry of strand j.
    let n = strands.len();
    let mut partner = vec![usize::MAX; n];
    let mut caps = vec![((0i64, 0i64), 0.0f64); n];
    for &t in &used {
        let idx: Vec<usize> = (0..n).filter(|&i| strands[i].tube == t).collect();
        let mut cands = Vec::with_capacity(idx.len() * idx.len());
        for &i in &idx {
            for &j in &idx {
                let (mk, len) = euclid_cap(&tubes[t], strands[i].path.end(), strands[j].path.start());
                cands.push((len, i, j, mk));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut taken = vec![false; n];
        for (len, i, j, mk) in cands {
            if partner[i] == usize::MAX && !taken[j] {
                partner[i] = j;
                taken[j] = true;
                caps[i] = (mk, len);
            }
        }
    }

    let mut components = Vec::new();
    let mut interior_capped = Vec::new();
    let mut savings = 0.0;
    let mut net = vec![(0i64, 0i64); tubes.len()];

    // Interior loops: follow the partner permutation.
    let mut seen = vec![false; n];
    for s0 in 0..n {
        if seen[s0] {
            continue;
        }
        let t = strands[s0].tube;
        let shape = &tubes[t];
        let (mut m_acc, mut k_acc) = (0i64, 0i64);
        let mut points: Vec<TubePoint> = Vec::new();
        let mut i = s0;
        let mut capped_len = 0.0;
        loop {
            seen[i] = true;
            for p in &strands[i].path.points {
                let q = shape.deck(*p, m_acc, k_acc);
                if points.last() != Some(&q) {
                    points.push(q);
                }
            }
            capped_len += strands[i].path.length() + caps[i].1;
            let ((m, k), _) = caps[i];
            m_acc += m;
            k_acc += k;
            net[t].0 += m;
            net[t].1 += k;
            i = partner[i];
            if i == s0 {
                points.push(shape.deck(strands[s0].path.start(), m_acc, k_acc));
                break;
            }
        }
        let capped = TubePath::new(points)?;
        let tight = tighten_in_tube(shape, &capped, Constraint::FreeLoop)?;
        savings += capped_len - tight.length;
        interior_capped.push(capped);
        let k = tight.core_power.unwrap_or(0);
        if k != 0 {
            components.push((
                HybridCurve {
                    segments: vec![Segment::Tube {
                        tube: t,
                        path: tight.path,
                    }],
                },
                1,
            ));
        }
    }

    // Exterior loops: the piece after strand i runs to the entry of strand
    // i + 1, then the reversed cap leads to the exit of its partner's preimage.
    let mut preimage = vec![0usize; n];
    for (i, &j) in partner.iter().enumerate() {
        preimage[j] = i;
    }
    let len = curve.segments.len();
    let mut seen = vec![false; n];
    for s0 in 0..n {
        if seen[s0] {
            continue;
        }
        let mut segments = Vec::new();
        let mut i = s0;
        loop {
            seen[i] = true;
            let next = (i + 1) % n;
            let mut pos = (strands[i].index + 1) % len;
            while pos != strands[next].index {
                segments.push(curve.segments[pos].clone());
                pos = (pos + 1) % len;
            }
            let a = preimage[next];
            let t = strands[next].tube;
            let ((m, k), _) = caps[a];
            let from = strands[next].path.start();
            let to = tubes[t].deck(strands[a].path.end(), -m, -k);
            net[t].0 -= m;
            net[t].1 -= k;
            segments.push(Segment::Tube {
                tube: t,
                path: TubePath {
                    points: vec![from, to],
                },
            });
            i = a;
            if i == s0 {
                break;
            }
        }
        components.push((HybridCurve { segments }, 1));
    }

    let mut ledger = Vec::new();
    for &t in &used {
        let mine: Vec<usize> = (0..n).filter(|&i| strands[i].tube == t).collect();
        let added: f64 = mine.iter().map(|&i| 2.0 * caps[i].1).sum();
        ledger.push(TubeLedger {
            tube: t,
            entries: mine.iter().filter(|&&j| partner.contains(&j)).count(),
            exits: mine.iter().filter(|&&i| partner[i] != usize::MAX).count(),
            caps: 2 * mine.len(),
            net_translation: net[t],
            added_cap_length: added,
            diameter_hi: diam_hi[t],
        });
    }

    let multicurve = MultiCurve { components };
    let new_length = multicurve.length();
    Ok(ShortenResult {
        multicurve,
        interior_capped,
        ledger,
        original_length,
        new_length,
        savings,
        deep_strands: n,
    })
}
