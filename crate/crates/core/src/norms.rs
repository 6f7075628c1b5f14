//! Bounds on the stable norm and the thick stable norm.
//!
//! Neither norm is computed exactly. This module produces the core-curve
//! lower bound, the conditional upper bound `C·‖ρ‖_Th`, and witnessed
//! empirical lower bounds from explicit curve families.

use serde::{Deserialize, Serialize};

use crate::curves::{k_functional, MultiCurve, Pairing};
use crate::decimal;
use crate::error::{Error, Result};
use crate::tube::{TubeShape, NZ_MIN_LENGTH, NZ_UPPER_SHIFT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Core multicurve of a 0-surgery filling with the core-length window.
    CoreCurves,
    /// `C·‖ρ‖_Th`, valid only if the supplied `C` is admissible.
    ConditionalOnC,
    /// Maximum of `|K|` over an explicit curve family.
    Empirical,
}

/// `n/(2π)·(ℓ² − 28.78)`, a strict lower bound for the stable norm of the
/// extension of a 0-surgery class on `n` cusps.
pub fn stable_lower_bound_from_cores(n_cusps: usize, ell: f64) -> Result<f64> {
    if n_cusps == 0 {
        return Err(Error::EmptyCuspList);
    }
    if !(ell > NZ_MIN_LENGTH) || !ell.is_finite() {
        return Err(Error::BelowNzThreshold { ell });
    }
    Ok(n_cusps as f64 / std::f64::consts::TAU * (ell * ell - NZ_UPPER_SHIFT))
}

/// `C·‖ρ‖_Th`.
pub fn thick_stable_upper_bound(c: f64, thurston_norm: u64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange {
            what: "C",
            value: c,
            reason: "must be positive and finite".into(),
        });
    }
    Ok(c * thurston_norm as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub id: String,
    #[serde(with = "decimal")]
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    #[serde(with = "decimal")]
    pub lower: f64,
    /// `None` stands for `+∞`.
    #[serde(with = "decimal::opt", default)]
    pub upper: Option<f64>,
    pub upper_method: Option<Provenance>,
    pub witnesses: Vec<Witness>,
    /// Index into `witnesses` of the maximizer, if any witness beats the zero chain.
    pub argmax: Option<usize>,
    pub method: Provenance,
}

impl NormEstimate {
    pub fn with_upper(mut self, upper: f64, method: Provenance) -> Self {
        self.upper = Some(upper);
        self.upper_method = Some(method);
        self
    }
}

/// Largest `|K|` over `family`; a reversed curve negates `K`, so both signs
/// bound the norm. The zero chain gives 0.
///
/// With `interfaces` the thick length is used, giving an estimate of the
/// thick stable norm.
pub fn empirical_norm_estimate(
    pairing: &Pairing,
    family: &[(String, MultiCurve)],
    tubes: &[TubeShape],
    interfaces: Option<&[f64]>,
) -> Result<NormEstimate> {
    if family.is_empty() {
        return Err(Error::Invalid("empty curve family".into()));
    }
    let mut witnesses = Vec::with_capacity(family.len());
    let mut lower = 0.0;
    let mut argmax = None;
    for (i, (id, g)) in family.iter().enumerate() {
        let k = k_functional(pairing, g, tubes, interfaces)?;
        if k.abs() > lower {
            lower = k.abs();
            argmax = Some(i);
        }
        witnesses.push(Witness { id: id.clone(), k });
    }
    Ok(NormEstimate {
        lower,
        upper: None,
        upper_method: None,
        witnesses,
        argmax,
        method: Provenance::Empirical,
    })
}
