//! Certification of fillings: does `‖ρ‖₀ > 3‖ρ‖_μ` provably hold, and with
//! which depth hypotheses.

use serde::{Deserialize, Serialize};

use crate::bundle::{Constants, ManifoldBundle, TubeSet};
use crate::decimal;
use crate::error::{Error, Result};
use crate::homology::{first_incompatible_cusp, CohomologyClass, SurgeryClassDatum, SurgeryKind};
use crate::interval::{Interval, Tri};
use crate::lattice::{total_normalized_length, CompleteSlope};
use crate::norms::{stable_lower_bound_from_cores, thick_stable_upper_bound, NormEstimate, Provenance};
use crate::tube::{
    check_deepness, nz_core_length_window, ConditionCheck, DeepnessCertificate, DeepnessVerdict, NZ_MIN_LENGTH,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedCores,
    NotCertified,
    HypothesesFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub filling_id: String,
    pub slope: CompleteSlope,
    pub class: CohomologyClass,
    pub kind: SurgeryKind,
    pub thurston_norm: u64,
    #[serde(with = "decimal")]
    pub ell: f64,
    pub nz_window: Option<Interval>,
    #[serde(with = "decimal::opt")]
    pub stable_lower: Option<f64>,
    pub stable_lower_method: Option<Provenance>,
    #[serde(with = "decimal")]
    pub thick_upper_conditional: f64,
    /// `stable_lower − 3·thick_upper_conditional`.
    #[serde(with = "decimal::opt")]
    pub criterion_margin: Option<f64>,
    /// `stable_lower − thick_upper_conditional`.
    #[serde(with = "decimal::opt")]
    pub partial_margin: Option<f64>,
    pub side_conditions: Vec<ConditionCheck>,
    /// `(2D, log 4)`-deep check, used for the full conclusion.
    pub deepness_doubled: Option<DeepnessVerdict>,
    /// `(D, log 4)`-deep check, used for the partial conclusion.
    pub deepness_single: Option<DeepnessVerdict>,
    pub tubes: Option<TubeSet>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
    pub assumptions: Constants,
}

fn check(name: &str, margin: f64, strict: bool) -> ConditionCheck {
    let m = Interval::point(margin);
    ConditionCheck {
        name: name.to_string(),
        tube: None,
        margin: m,
        status: if strict { Tri::positive(m) } else { Tri::nonneg(m) },
    }
}

fn side_conditions(ell: f64, k: &Constants) -> Vec<ConditionCheck> {
    let mut out = vec![
        check("ell > 7.823", ell - NZ_MIN_LENGTH, true),
        check("ell > L", ell - k.l, true),
        check("mu < log(3)/1.2", 3f64.ln() / 1.2 - k.mu, true),
    ];
    if let Some(sys) = k.systole {
        out.push(check("mu < systole/4", sys / 4.0 - k.mu, true));
    }
    if let Some(mu3) = k.mu3 {
        out.push(check("mu <= mu3", mu3 - k.mu, false));
    }
    out
}

/// Evaluates every criterion inequality for the filling of `bundle` along
/// `slope`, for the class `cls`.
///
/// Extra empirical witnesses may raise the stable-norm lower bound; they are
/// the only source of one for classes that are not 0-surgery classes.
pub fn certify_filling(
    bundle: &ManifoldBundle,
    cls: &CohomologyClass,
    slope: &CompleteSlope,
    witnesses: Option<&NormEstimate>,
) -> Result<CertificationReport> {
    if cls.is_zero() {
        return Err(Error::ZeroClass);
    }
    let norm = bundle.thurston.norm_of(cls)?;
    certify_with_norm(bundle, cls, slope, norm, witnesses)
}

/// As [`certify_filling`], with the Thurston norm supplied by the caller.
pub fn certify_with_norm(
    bundle: &ManifoldBundle,
    cls: &CohomologyClass,
    slope: &CompleteSlope,
    norm: u64,
    witnesses: Option<&NormEstimate>,
) -> Result<CertificationReport> {
    if cls.is_zero() {
        return Err(Error::ZeroClass);
    }
    if let Some((cusp, value)) = first_incompatible_cusp(cls, &bundle.homology, slope)? {
        return Err(Error::IncompatibleSlope { cusp, value });
    }
    let k = &bundle.constants;
    let datum = SurgeryClassDatum::new(cls.clone(), &bundle.homology, norm)?;
    let lattices = bundle.lattices()?;
    let ell = total_normalized_length(&lattices, slope)?;
    let nz_ok = ell > NZ_MIN_LENGTH;
    let side = side_conditions(ell, k);
    let mut reasons = Vec::new();

    let nz_window = if nz_ok { Some(nz_core_length_window(ell)?) } else { None };

    let mut stable_lower = None;
    let mut stable_lower_method = None;
    if datum.kind == SurgeryKind::ZeroSurgery && nz_ok {
        stable_lower = Some(stable_lower_bound_from_cores(datum.cusps(), ell)?);
        stable_lower_method = Some(Provenance::CoreCurves);
    }
    if let Some(w) = witnesses {
        if stable_lower.is_none_or(|s| w.lower > s) {
            stable_lower = Some(w.lower);
            stable_lower_method = Some(w.method);
        }
    }
    let thick_upper = thick_stable_upper_bound(k.c, norm)?;
    let criterion_margin = stable_lower.map(|s| s - 3.0 * thick_upper);
    let partial_margin = stable_lower.map(|s| s - thick_upper);

    let tubes = if nz_ok { bundle.tubes_for(slope, ell)? } else { None };
    let (deepness_doubled, deepness_single) = match &tubes {
        Some(set) => {
            let cert = DeepnessCertificate::from_tubes(k.d, k.t, k.mu, &set.tubes)?;
            (Some(check_deepness(&cert, true)), Some(check_deepness(&cert, false)))
        }
        None => (None, None),
    };

    let mut failed = false;
    let mut unsure = false;
    for c in &side {
        match c.status {
            Tri::Pass => {}
            Tri::Fail => {
                failed = true;
                reasons.push(format!("{} fails", c.name));
            }
            Tri::Indeterminate => {
                unsure = true;
                reasons.push(format!("{} is indeterminate", c.name));
            }
        }
    }
    match &deepness_doubled {
        None if nz_ok => {
            unsure = true;
            reasons.push("no tube shapes available for the depth hypotheses".into());
        }
        None => {}
        Some(v) => match v.overall {
            Tri::Pass => {}
            Tri::Fail => {
                failed = true;
                for c in v.failing().filter(|c| c.status == Tri::Fail) {
                    let at = c.tube.map(|t| format!(" (tube {t})")).unwrap_or_default();
                    reasons.push(format!("(2D, log 4)-deep: {} fails{at}", c.name));
                }
            }
            Tri::Indeterminate => {
                unsure = true;
                reasons.push("(2D, log 4)-deep check is indeterminate; tighten the diameter tolerance".into());
            }
        },
    }
    if stable_lower.is_none() && nz_ok {
        reasons.push("no stable lower bound available".into());
    }
    let verdict = if failed {
        Verdict::HypothesesFailed
    } else if unsure {
        Verdict::NotCertified
    } else {
        match criterion_margin {
            Some(m) if m > 0.0 => Verdict::CertifiedCores,
            Some(m) => {
                reasons.push(format!("criterion margin {m} is not positive"));
                Verdict::NotCertified
            }
            None => Verdict::NotCertified,
        }
    };

    Ok(CertificationReport {
        filling_id: slope.to_string(),
        slope: slope.clone(),
        class: cls.clone(),
        kind: datum.kind,
        thurston_norm: norm,
        ell,
        nz_window,
        stable_lower,
        stable_lower_method,
        thick_upper_conditional: thick_upper,
        criterion_margin,
        partial_margin,
        side_conditions: side,
        deepness_doubled,
        deepness_single,
        tubes,
        verdict,
        reasons,
        assumptions: k.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    EveryLeafIsCore,
    ContainsCore,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub conclusion: Conclusion,
    pub text: String,
}

/// The strongest conclusion about the stretch lamination that the report
/// supports.
pub fn dichotomy_statement(report: &CertificationReport) -> Dichotomy {
    if report.verdict == Verdict::CertifiedCores {
        return Dichotomy {
            conclusion: Conclusion::EveryLeafIsCore,
            text: format!(
                "filling {}: every leaf of the stretch lamination is a filling core curve \
                 (conditional on the assumption bundle)",
                report.filling_id
            ),
        };
    }
    let side_ok = report.side_conditions.iter().all(|c| c.status.is_pass());
    let single_ok = report
        .deepness_single
        .as_ref()
        .is_some_and(|v| v.overall.is_pass());
    let partial_ok = report.partial_margin.is_some_and(|m| m > 0.0);
    if side_ok && single_ok && partial_ok {
        return Dichotomy {
            conclusion: Conclusion::ContainsCore,
            text: format!(
                "filling {}: the stretch lamination contains a nonempty union of filling core curves \
                 (conditional on the assumption bundle)",
                report.filling_id
            ),
        };
    }
    Dichotomy {
        conclusion: Conclusion::None,
        text: format!("filling {}: no conclusion", report.filling_id),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub index: i64,
    #[serde(with = "decimal")]
    pub ell: f64,
    pub thurston_norm: u64,
    /// `n/(2π)·(ℓ² − 28.78)`.
    #[serde(with = "decimal")]
    pub lhs: f64,
    /// `3·C·‖ρ‖_Th`.
    #[serde(with = "decimal")]
    pub rhs: f64,
    #[serde(with = "decimal")]
    pub margin: f64,
    /// `lhs > rhs` and `ℓ > 7.823`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// First sampled index from which the inequality holds at every later sample.
    pub n: Option<i64>,
    /// Last sampled index at which the inequality fails, if any.
    pub trailing_violation: Option<i64>,
    pub rows: Vec<ThresholdRow>,
}

/// Scans `(index, ℓ, ‖ρ‖_Th)` samples for the point past which
/// `n/(2π)(ℓ² − 28.78) > 3C‖ρ‖_Th` holds throughout.
pub fn subquadratic_threshold(samples: &[(i64, f64, u64)], n_cusps: usize, c: f64) -> Result<ThresholdResult> {
    if samples.is_empty() {
        return Err(Error::Invalid("empty family".into()));
    }
    if n_cusps == 0 {
        return Err(Error::EmptyCuspList);
    }
    let upper = |norm| thick_stable_upper_bound(c, norm);
    let mut sorted = samples.to_vec();
    sorted.sort_by_key(|s| s.0);
    let mut rows = Vec::with_capacity(sorted.len());
    for (index, ell, norm) in sorted {
        let lhs = n_cusps as f64 / std::f64::consts::TAU * (ell * ell - crate::tube::NZ_UPPER_SHIFT);
        let rhs = 3.0 * upper(norm)?;
        rows.push(ThresholdRow {
            index,
            ell,
            thurston_norm: norm,
            lhs,
            rhs,
            margin: lhs - rhs,
            holds: lhs > rhs && ell > NZ_MIN_LENGTH,
        });
    }
    let trailing_violation = rows.iter().rev().find(|r| !r.holds).map(|r| r.index);
    let n = match trailing_violation {
        None => Some(rows[0].index),
        Some(v) => rows.iter().find(|r| r.index > v).map(|r| r.index),
    };
    Ok(ThresholdResult {
        n,
        trailing_violation,
        rows,
    })
}
