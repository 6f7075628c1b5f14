//! Surgery families `ρₙ = n·α + β` with slopes `a − n·b` on every cusp.
//!
//! With `α(a) = β(b) = 1` and `α(b) = β(a) = 0` on each cusp,
//! `ρₙ(a − n·b) = n − n = 0`, so every slope in the family is compatible
//! with its class, and `ρₙ` lies in the cone spanned by `α` and `β`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{check_schema, ManifoldBundle};
use crate::certify::{certify_with_norm, subquadratic_threshold, CertificationReport, ThresholdResult, Verdict};
use crate::error::{Error, Result};
use crate::homology::{evaluate, is_compatible, BoundaryInclusionMap, CohomologyClass, SurgeryClassDatum};
use crate::lattice::{gcd, CompleteSlope, Slope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormModel {
    /// `n·‖α‖ + ‖β‖`.
    Cone { norm_alpha: u64, norm_beta: u64 },
    /// `Σ cᵢ nⁱ`, for testing growth rates that no cone produces.
    Polynomial(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    Linear { step: u64 },
    /// `count` values spaced geometrically over the range, deduplicated.
    Geometric { count: usize },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Linear { step: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub schema: String,
    pub alpha: CohomologyClass,
    pub beta: CohomologyClass,
    pub a: Vec<(i64, i64)>,
    pub b: Vec<(i64, i64)>,
    pub n_range: (i64, i64),
    #[serde(default)]
    pub sampling: Sampling,
    pub norm: NormModel,
    /// Cusp permutation under which the family is symmetric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<Vec<usize>>,
}

impl FamilySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: FamilySpec = serde_json::from_str(text)?;
        check_schema(&s.schema)?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        FamilySpec::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks the duality relations and the range against `inc`.
    pub fn validate(&self, inc: &BoundaryInclusionMap) -> Result<()> {
        let (lo, hi) = self.n_range;
        if lo > hi {
            return Err(Error::Invalid(format!("n_range: [{lo}, {hi}] is reversed")));
        }
        if lo < 0 {
            return Err(Error::Invalid(format!(
                "n_range: n = {lo} puts the class outside the cone"
            )));
        }
        if hi > (1i64 << 52) {
            return Err(Error::Invalid(format!("n_range: {hi} exceeds 2^52")));
        }
        let cusps = inc.cusps();
        if self.a.len() != cusps || self.b.len() != cusps {
            return Err(Error::CuspCountMismatch {
                expected: cusps,
                got: self.a.len().min(self.b.len()),
            });
        }
        for j in 0..cusps {
            let table = [
                ("alpha(a)", &self.alpha, self.a[j], 1),
                ("beta(b)", &self.beta, self.b[j], 1),
                ("alpha(b)", &self.alpha, self.b[j], 0),
                ("beta(a)", &self.beta, self.a[j], 0),
            ];
            for (name, cls, curve, want) in table {
                let got = evaluate(cls, inc, j, curve)?;
                if got != want {
                    return Err(Error::Invalid(format!(
                        "duality: {name} = {got} on cusp {j}, expected {want}"
                    )));
                }
            }
        }
        if let Some(p) = &self.involution {
            let mut seen = vec![false; cusps];
            if p.len() != cusps || p.iter().any(|&i| i >= cusps || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::Invalid("involution: not a permutation of the cusps".into()));
            }
        }
        Ok(())
    }

    pub fn class(&self, n: i64) -> CohomologyClass {
        self.alpha.scale(n).add(&self.beta)
    }

    pub fn norm(&self, n: i64) -> u64 {
        let n = n as u64;
        match &self.norm {
            NormModel::Cone {
                norm_alpha,
                norm_beta,
            } => n.saturating_mul(*norm_alpha).saturating_add(*norm_beta),
            NormModel::Polynomial(c) => c.iter().rev().fold(0u64, |acc, &ci| acc.saturating_mul(n).saturating_add(ci)),
        }
    }

    /// `a − n·b` per cusp, rejected with the gcd when not primitive.
    pub fn slope(&self, n: i64) -> Result<CompleteSlope> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&(ap, aq), &(bp, bq))| {
                let (p, q) = (ap - n * bp, aq - n * bq);
                Slope::new(p, q).map_err(|_| Error::NonPrimitiveSlope { p, q, gcd: gcd(p, q) })
            })
            .collect::<Result<Vec<_>>>()
            .map(CompleteSlope)
    }

    pub fn samples(&self) -> Vec<i64> {
        let (lo, hi) = self.n_range;
        match self.sampling {
            Sampling::Linear { step } => {
                let step = step.max(1) as i64;
                let mut v: Vec<i64> = (0..).map(|i| lo + i * step).take_while(|&n| n <= hi).collect();
                if v.last() != Some(&hi) {
                    v.push(hi);
                }
                v
            }
            Sampling::Geometric { count } => {
                let count = count.max(2);
                let (a, b) = ((lo.max(1)) as f64, hi.max(1) as f64);
                let mut v: Vec<i64> = (0..count)
                    .map(|i| (a * (b / a).powf(i as f64 / (count - 1) as f64)).round() as i64)
                    .collect();
                if lo == 0 {
                    v.insert(0, 0);
                }
                v.dedup();
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub n: i64,
    pub datum: SurgeryClassDatum,
    pub slope: CompleteSlope,
}

/// Class, norm and slope at index `n`.
pub fn generate(spec: &FamilySpec, inc: &BoundaryInclusionMap, n: i64) -> Result<Generated> {
    let (lo, hi) = spec.n_range;
    if n < lo || n > hi {
        return Err(Error::OutOfRange {
            what: "family index",
            value: n as f64,
            reason: format!("must lie in [{lo}, {hi}]"),
        });
    }
    let cls = spec.class(n);
    let slope = spec.slope(n)?;
    if !is_compatible(&cls, inc, &slope)? {
        return Err(Error::Invalid(format!("family index {n}: slope {slope} is incompatible")));
    }
    let datum = SurgeryClassDatum::new(cls, inc, spec.norm(n))?;
    Ok(Generated { n, datum, slope })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RowOutcome {
    Report(Box<CertificationReport>),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub n: i64,
    pub outcome: RowOutcome,
    /// Whether the involution preserves the normalized slope lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric_cusps: Option<bool>,
}

impl FamilyRow {
    pub fn report(&self) -> Option<&CertificationReport> {
        match &self.outcome {
            RowOutcome::Report(r) => Some(r),
            RowOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTable {
    pub rows: Vec<FamilyRow>,
    pub threshold: ThresholdResult,
    /// First sampled index from which every later non-skipped row is certified.
    pub certified_from: Option<i64>,
}

/// Row for index `n`, as certified on its own.
pub fn family_row(spec: &FamilySpec, bundle: &ManifoldBundle, n: i64) -> Result<FamilyRow> {
    let g = match generate(spec, &bundle.homology, n) {
        Ok(g) => g,
        Err(e @ Error::NonPrimitiveSlope { .. }) => {
            return Ok(FamilyRow {
                n,
                outcome: RowOutcome::Skipped { reason: e.to_string() },
                symmetric_cusps: None,
            })
        }
        Err(e) => return Err(e),
    };
    // The family's norm model is used in place of the bundle's norm data.
    let mut report = certify_with_norm(bundle, &g.datum.cls, &g.slope, g.datum.thurston_norm, None)?;
    report.filling_id = format!("n={n}");
    let symmetric_cusps = match &spec.involution {
        None => None,
        Some(p) => {
            let lats = bundle.lattices()?;
            let len: Vec<f64> = lats.iter().zip(g.slope.iter()).map(|(l, s)| l.normalized_length(s)).collect();
            Some(p.iter().enumerate().all(|(i, &j)| (len[i] - len[j]).abs() <= 1e-12 * len[i].max(len[j])))
        }
    };
    Ok(FamilyRow {
        n,
        outcome: RowOutcome::Report(Box::new(report)),
        symmetric_cusps,
    })
}

/// Certifies every sampled index and locates the thresholds.
pub fn family_table(spec: &FamilySpec, bundle: &ManifoldBundle) -> Result<FamilyTable> {
    spec.validate(&bundle.homology)?;
    let ns = spec.samples();
    let rows = ns
        .par_iter()
        .map(|&n| family_row(spec, bundle, n))
        .collect::<Result<Vec<_>>>()?;
    let lattices = bundle.lattices()?;
    let mut samples = Vec::new();
    for row in &rows {
        if let Some(r) = row.report() {
            samples.push((row.n, r.ell, r.thurston_norm));
        }
    }
    if samples.is_empty() {
        return Err(Error::Invalid("every index in the family was skipped".into()));
    }
    let threshold = subquadratic_threshold(&samples, lattices.len(), bundle.constants.c)?;
    let reports: Vec<&FamilyRow> = rows.iter().filter(|r| r.report().is_some()).collect();
    let last_bad = reports
        .iter()
        .rev()
        .find(|r| r.report().map(|x| x.verdict) != Some(Verdict::CertifiedCores))
        .map(|r| r.n);
    let certified_from = match last_bad {
        None => reports.first().map(|r| r.n),
        Some(b) => reports.iter().find(|r| r.n > b).map(|r| r.n),
    };
    Ok(FamilyTable {
        rows,
        threshold,
        certified_from,
    })
}
