//! Integer linear algebra for surgery classes.
//!
//! Homology is taken modulo torsion throughout. A cohomology class on the
//! cusped manifold is an integer covector on `H₁(W)/torsion`; each cusp torus
//! carries a meridian/longitude basis `(μᵢ, λᵢ)` whose images in `H₁(W)` are
//! recorded in a [`BoundaryInclusionMap`].
//!
//! Orientation convention: on each torus `⟨(x, y), (p, q)⟩ = x·q − y·p` with
//! `(μ, λ)` positively oriented. The boundary slope of a class `ρ` on cusp `i`
//! is `∂ᵢ = (−ρ(λᵢ), ρ(μᵢ))`, which satisfies `⟨c, ∂ᵢ⟩ = ρ(c)` for every
//! peripheral curve `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{gcd, CompleteSlope, Slope};

/// Integer covector on `H₁(W)/torsion`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomologyClass(pub Vec<i64>);

impl CohomologyClass {
    pub fn new(coefficients: Vec<i64>) -> Self {
        CohomologyClass(coefficients)
    }

    pub fn zero(betti: usize) -> Self {
        CohomologyClass(vec![0; betti])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn pair(&self, h: &[i64]) -> i64 {
        self.0.iter().zip(h).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: i64) -> Self {
        CohomologyClass(self.0.iter().map(|c| k * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        CohomologyClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Parses `"a,b,c"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Invalid(format!("class coefficient {t:?} is not an integer")))
            })
            .collect::<Result<Vec<_>>>()
            .map(CohomologyClass)
    }
}

/// Images of the peripheral basis of one cusp in `H₁(W)/torsion`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeripheralImages {
    pub meridian: Vec<i64>,
    pub longitude: Vec<i64>,
}

/// `H₁(Tᵢ) → H₁(W)/torsion` for every cusp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInclusion", into = "RawInclusion")]
pub struct BoundaryInclusionMap {
    betti: usize,
    per_cusp: Vec<PeripheralImages>,
}

#[derive(Serialize, Deserialize)]
struct RawInclusion {
    betti: usize,
    inclusions: Vec<PeripheralImages>,
}

impl TryFrom<RawInclusion> for BoundaryInclusionMap {
    type Error = Error;
    fn try_from(r: RawInclusion) -> Result<Self> {
        BoundaryInclusionMap::new(r.betti, r.inclusions)
    }
}

impl From<BoundaryInclusionMap> for RawInclusion {
    fn from(m: BoundaryInclusionMap) -> Self {
        RawInclusion {
            betti: m.betti,
            inclusions: m.per_cusp,
        }
    }
}

impl BoundaryInclusionMap {
    pub fn new(betti: usize, per_cusp: Vec<PeripheralImages>) -> Result<Self> {
        if per_cusp.is_empty() {
            return Err(Error::EmptyCuspList);
        }
        for (i, c) in per_cusp.iter().enumerate() {
            if c.meridian.len() != betti || c.longitude.len() != betti {
                return Err(Error::DimensionMismatch(format!(
                    "cusp {i}: peripheral images must have length {betti}"
                )));
            }
        }
        Ok(BoundaryInclusionMap { betti, per_cusp })
    }

    /// Every cusp includes by the identity matrix (needs `betti == 2`).
    pub fn identity(cusps: usize) -> Self {
        let per = PeripheralImages {
            meridian: vec![1, 0],
            longitude: vec![0, 1],
        };
        BoundaryInclusionMap::new(2, vec![per; cusps]).expect("identity inclusion is valid")
    }

    pub fn betti(&self) -> usize {
        self.betti
    }

    pub fn cusps(&self) -> usize {
        self.per_cusp.len()
    }

    pub fn cusp(&self, i: usize) -> Result<&PeripheralImages> {
        self.per_cusp.get(i).ok_or(Error::IndexOutOfRange {
            what: "cusp",
            index: i,
            len: self.per_cusp.len(),
        })
    }

    /// The `b × 2` matrix of cusp `i` (columns are the images of μ, λ).
    pub fn matrix(&self, i: usize) -> Result<IntMatrix> {
        let c = self.cusp(i)?;
        let mut m = IntMatrix::zeros(self.betti, 2);
        for r in 0..self.betti {
            m[(r, 0)] = c.meridian[r];
            m[(r, 1)] = c.longitude[r];
        }
        Ok(m)
    }

    /// Whether `H₁(Tᵢ) → H₁(W)/torsion` is an isomorphism (needs `betti = 2`
    /// and unit invariant factors).
    pub fn is_isomorphism_on(&self, i: usize) -> Result<bool> {
        let m = self.matrix(i)?;
        if m.rows != m.cols {
            return Ok(false);
        }
        let snf = smith_normal_form(&m);
        Ok((0..m.rows).all(|k| snf.d[(k, k)] == 1))
    }
}

/// `ρ(ι_*(p·μ + q·λ))` for a peripheral curve on cusp `cusp`.
pub fn evaluate(
    cls: &CohomologyClass,
    inc: &BoundaryInclusionMap,
    cusp: usize,
    curve: (i64, i64),
) -> Result<i64> {
    check_dim(cls, inc)?;
    let c = inc.cusp(cusp)?;
    Ok(curve.0 * cls.pair(&c.meridian) + curve.1 * cls.pair(&c.longitude))
}

fn check_dim(cls: &CohomologyClass, inc: &BoundaryInclusionMap) -> Result<()> {
    if cls.dim() != inc.betti {
        return Err(Error::DimensionMismatch(format!(
            "class has {} coefficients, homology has rank {}",
            cls.dim(),
            inc.betti
        )));
    }
    Ok(())
}

/// A complete slope is compatible with `ρ` when `ρ` kills every filled slope.
pub fn is_compatible(cls: &CohomologyClass, inc: &BoundaryInclusionMap, s: &CompleteSlope) -> Result<bool> {
    Ok(first_incompatible_cusp(cls, inc, s)?.is_none())
}

/// The first cusp whose slope `ρ` does not kill, with the offending value.
pub fn first_incompatible_cusp(
    cls: &CohomologyClass,
    inc: &BoundaryInclusionMap,
    s: &CompleteSlope,
) -> Result<Option<(usize, i64)>> {
    if s.len() != inc.cusps() {
        return Err(Error::CuspCountMismatch {
            expected: inc.cusps(),
            got: s.len(),
        });
    }
    for (i, si) in s.iter().enumerate() {
        let v = evaluate(cls, inc, i, si.pair())?;
        if v != 0 {
            return Ok(Some((i, v)));
        }
    }
    Ok(None)
}

/// Boundary of the dual surface on one cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySlope {
    /// `(−ρ(λ), ρ(μ))`.
    pub pair: (i64, i64),
    /// Number of parallel boundary curves.
    pub gcd: i64,
    pub primitive: bool,
}

impl BoundarySlope {
    pub fn slope(&self) -> Option<Slope> {
        if self.primitive {
            Slope::new(self.pair.0, self.pair.1).ok()
        } else {
            None
        }
    }
}

/// Per-cusp boundary slope of the surface dual to `ρ`; `None` where the
/// surface misses the cusp.
pub fn boundary_slope_of_class(
    cls: &CohomologyClass,
    inc: &BoundaryInclusionMap,
) -> Result<Vec<Option<BoundarySlope>>> {
    check_dim(cls, inc)?;
    (0..inc.cusps())
        .map(|i| {
            let rm = evaluate(cls, inc, i, (1, 0))?;
            let rl = evaluate(cls, inc, i, (0, 1))?;
            let pair = (-rl, rm);
            if pair == (0, 0) {
                return Ok(None);
            }
            let g = gcd(pair.0, pair.1);
            Ok(Some(BoundarySlope {
                pair,
                gcd: g,
                primitive: g == 1,
            }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurgeryKind {
    GeneralSurgery,
    ZeroSurgery,
}

/// A surgery class with its Thurston norm and boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryClassDatum {
    pub cls: CohomologyClass,
    pub thurston_norm: u64,
    pub boundary_slopes: Vec<Option<BoundarySlope>>,
    pub kind: SurgeryKind,
}

impl SurgeryClassDatum {
    pub fn new(cls: CohomologyClass, inc: &BoundaryInclusionMap, thurston_norm: u64) -> Result<Self> {
        let boundary_slopes = boundary_slope_of_class(&cls, inc)?;
        let zero = boundary_slopes
            .iter()
            .all(|b| matches!(b, Some(BoundarySlope { primitive: true, .. })));
        Ok(SurgeryClassDatum {
            cls,
            thurston_norm,
            boundary_slopes,
            kind: if zero {
                SurgeryKind::ZeroSurgery
            } else {
                SurgeryKind::GeneralSurgery
            },
        })
    }

    pub fn cusps(&self) -> usize {
        self.boundary_slopes.len()
    }

    /// The boundary slope of a 0-surgery class.
    pub fn zero_surgery_slope(&self) -> Option<CompleteSlope> {
        if self.kind != SurgeryKind::ZeroSurgery {
            return None;
        }
        self.boundary_slopes
            .iter()
            .map(|b| b.and_then(|b| b.slope()))
            .collect::<Option<Vec<_>>>()
            .map(CompleteSlope)
    }
}

/// `ρ_s(c)` for the multicurve of filling cores, oriented so each core
/// meets the capped surface positively: one per cusp.
pub fn pairing_with_cores(datum: &SurgeryClassDatum) -> Result<i64> {
    match datum.kind {
        SurgeryKind::ZeroSurgery => Ok(datum.cusps() as i64),
        SurgeryKind::GeneralSurgery => Err(Error::NotZeroSurgery(
            "the pairing with cores is fixed only when each cusp carries one boundary curve".into(),
        )),
    }
}

/// Thurston-norm data: either a table of known values or a fibered cone on
/// which the norm is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThurstonData {
    Cone {
        alpha: CohomologyClass,
        beta: CohomologyClass,
        norm_alpha: u64,
        norm_beta: u64,
    },
    Table(Vec<ThurstonEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThurstonEntry {
    pub class: CohomologyClass,
    pub norm: u64,
}

impl ThurstonData {
    /// Norm of `cls`; classes in the negated cone or table use symmetry.
    pub fn norm_of(&self, cls: &CohomologyClass) -> Result<u64> {
        if cls.is_zero() {
            return Ok(0);
        }
        match self {
            ThurstonData::Table(rows) => rows
                .iter()
                .find(|r| r.class == *cls || r.class == cls.scale(-1))
                .map(|r| r.norm)
                .ok_or_else(|| Error::Invalid(format!("no Thurston norm recorded for class {:?}", cls.0))),
            ThurstonData::Cone {
                alpha,
                beta,
                norm_alpha,
                norm_beta,
            } => cone_norm(alpha, beta, *norm_alpha, *norm_beta, cls)
                .or_else(|_| cone_norm(alpha, beta, *norm_alpha, *norm_beta, &cls.scale(-1))),
        }
    }
}

/// `x·‖α‖ + y·‖β‖` for `cls = x·α + y·β` with `x, y ≥ 0`.
fn cone_norm(
    alpha: &CohomologyClass,
    beta: &CohomologyClass,
    na: u64,
    nb: u64,
    cls: &CohomologyClass,
) -> Result<u64> {
    if alpha.dim() != cls.dim() || beta.dim() != cls.dim() {
        return Err(Error::DimensionMismatch("cone generators and class differ in rank".into()));
    }
    let n = cls.dim();
    let (a, b, c): (Vec<i128>, Vec<i128>, Vec<i128>) = (
        alpha.0.iter().map(|&v| v as i128).collect(),
        beta.0.iter().map(|&v| v as i128).collect(),
        cls.0.iter().map(|&v| v as i128).collect(),
    );
    let pivot = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| a[i] * b[j] - a[j] * b[i] != 0);
    let Some((i, j)) = pivot else {
        return Err(Error::Invalid("cone generators are parallel".into()));
    };
    let d = a[i] * b[j] - a[j] * b[i];
    let xn = c[i] * b[j] - c[j] * b[i];
    let yn = a[i] * c[j] - a[j] * c[i];
    // d·c = xn·α + yn·β must hold in every coordinate
    if (0..n).any(|k| d * c[k] != xn * a[k] + yn * b[k]) {
        return Err(Error::Invalid(format!("class {:?} is not in the span of the cone", cls.0)));
    }
    let (xn, yn, d) = if d < 0 { (-xn, -yn, -d) } else { (xn, yn, d) };
    if xn < 0 || yn < 0 {
        return Err(Error::Invalid(format!("class {:?} lies outside the declared cone", cls.0)));
    }
    let num = xn * na as i128 + yn * nb as i128;
    if num % d != 0 {
        return Err(Error::Invalid(format!(
            "class {:?} has non-integral Thurston norm {num}/{d} on the cone",
            cls.0
        )));
    }
    u64::try_from(num / d).map_err(|_| Error::Invalid("Thurston norm overflow".into()))
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i64 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]) as i64
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k · row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: i64) {
        for j in 0..self.cols {
            let v = self[(src, j)];
            self[(dst, j)] += k * v;
        }
    }

    /// col[dst] += k · col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: i64) {
        for i in 0..self.rows {
            let v = self[(i, src)];
            self[(i, dst)] += k * v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            self[(r, j)] = -self[(r, j)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `U · M · V = D`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries of `D`.
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.d.rows.min(self.d.cols))
            .map(|k| self.d[(k, k)])
            .filter(|&x| x != 0)
            .collect()
    }
}

/// Smith normal form with unimodular transforms.
///
/// Diagonal entries are nonnegative and each divides the next.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| d[(i, j)] != 0)
            .min_by_key(|&(i, j)| d[(i, j)].unsigned_abs());
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut changed = false;
            for i in t + 1..rows {
                let q = d[(i, t)].div_euclid(d[(t, t)]);
                if q != 0 {
                    d.add_row(i, t, -q);
                    u.add_row(i, t, -q);
                }
                if d[(i, t)] != 0 {
                    // remainder smaller than the pivot: make it the pivot
                    d.swap_rows(t, i);
                    u.swap_rows(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                let q = d[(t, j)].div_euclid(d[(t, t)]);
                if q != 0 {
                    d.add_col(j, t, -q);
                    v.add_col(j, t, -q);
                }
                if d[(t, j)] != 0 {
                    d.swap_cols(t, j);
                    v.swap_cols(t, j);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| d[(i, j)] % d[(t, t)] != 0);
            match bad {
                Some((i, _)) => {
                    d.add_row(t, i, 1);
                    u.add_row(t, i, 1);
                }
                None => break,
            }
        }
        if d[(t, t)] < 0 {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}
