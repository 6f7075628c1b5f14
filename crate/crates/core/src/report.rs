//! Report files: each embeds its full input, so it can be re-derived and
//! compared.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::{check_schema, ManifoldBundle, SCHEMA};
use crate::certify::{certify_filling, dichotomy_statement, CertificationReport, Dichotomy};
use crate::error::Result;
use crate::family::{family_table, FamilySpec, FamilyTable};
use crate::homology::CohomologyClass;
use crate::lattice::CompleteSlope;
use crate::norms::NormEstimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportBody {
    Certify {
        manifold: ManifoldBundle,
        class: CohomologyClass,
        slope: CompleteSlope,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witnesses: Option<NormEstimate>,
        report: Box<CertificationReport>,
        dichotomy: Dichotomy,
    },
    Family {
        manifold: ManifoldBundle,
        spec: FamilySpec,
        table: FamilyTable,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: String,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl ReportFile {
    pub fn certify(
        manifold: &ManifoldBundle,
        class: &CohomologyClass,
        slope: &CompleteSlope,
        witnesses: Option<&NormEstimate>,
    ) -> Result<Self> {
        let report = certify_filling(manifold, class, slope, witnesses)?;
        let dichotomy = dichotomy_statement(&report);
        Ok(ReportFile {
            schema: SCHEMA.to_string(),
            body: ReportBody::Certify {
                manifold: manifold.clone(),
                class: class.clone(),
                slope: slope.clone(),
                witnesses: witnesses.cloned(),
                report: Box::new(report),
                dichotomy,
            },
        })
    }

    pub fn family(manifold: &ManifoldBundle, spec: &FamilySpec) -> Result<Self> {
        let table = family_table(spec, manifold)?;
        Ok(ReportFile {
            schema: SCHEMA.to_string(),
            body: ReportBody::Family {
                manifold: manifold.clone(),
                spec: spec.clone(),
                table,
            },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ReportFile = serde_json::from_str(text)?;
        check_schema(&f.schema)?;
        match &f.body {
            ReportBody::Certify { manifold, .. } | ReportBody::Family { manifold, .. } => manifold.validate()?,
        }
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ReportFile::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report re-derived from its embedded inputs.
    pub fn recompute(&self) -> Result<ReportFile> {
        match &self.body {
            ReportBody::Certify {
                manifold,
                class,
                slope,
                witnesses,
                ..
            } => ReportFile::certify(manifold, class, slope, witnesses.as_ref()),
            ReportBody::Family { manifold, spec, .. } => ReportFile::family(manifold, spec),
        }
    }
}

/// JSON paths at which the stored and re-derived reports differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCheck {
    pub identical: bool,
    pub mismatches: Vec<String>,
}

pub fn verify_report(file: &ReportFile) -> Result<ReportCheck> {
    let fresh = file.recompute()?;
    let (a, b) = (serde_json::to_value(file)?, serde_json::to_value(&fresh)?);
    let mut mismatches = Vec::new();
    diff("$", &a, &b, &mut mismatches);
    Ok(ReportCheck {
        identical: mismatches.is_empty(),
        mismatches,
    })
}

fn diff(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    if out.len() >= 50 {
        return;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                match y.get(k) {
                    Some(w) => diff(&format!("{path}.{k}"), v, w, out),
                    None => out.push(format!("{path}.{k}: missing after recomputation")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                out.push(format!("{path}.{k}: missing in stored report"));
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                diff(&format!("{path}[{i}]"), v, w, out);
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: stored {a}, recomputed {b}")),
    }
}
