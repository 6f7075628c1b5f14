//! Input files: the manifold bundle and its assumption constants.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decimal;
use crate::error::{Error, Result};
use crate::homology::{BoundaryInclusionMap, ThurstonData};
use crate::lattice::{CompleteSlope, FlatTorusLattice};
use crate::tube::{nz_core_length_window, TubeShape};

pub const SCHEMA: &str = "lamcert-v1";

pub(crate) fn check_schema(found: &str) -> Result<()> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "schema: expected {SCHEMA:?}, found {found:?}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspShape {
    /// Shape modulus `[Re τ, Im τ]`.
    #[serde(with = "decimal::pair")]
    pub modulus: [f64; 2],
    #[serde(with = "decimal")]
    pub area: f64,
}

impl CuspShape {
    pub fn lattice(&self) -> Result<FlatTorusLattice> {
        FlatTorusLattice::from_cusp_shape(self.modulus[0], self.modulus[1], self.area)
    }
}

/// The constants the certification is conditional on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C", with = "decimal")]
    pub c: f64,
    #[serde(rename = "L", with = "decimal")]
    pub l: f64,
    #[serde(with = "decimal")]
    pub mu: f64,
    #[serde(rename = "D", with = "decimal")]
    pub d: f64,
    #[serde(with = "decimal")]
    pub t: f64,
    #[serde(with = "decimal::opt", default, skip_serializing_if = "Option::is_none")]
    pub mu3: Option<f64>,
    #[serde(with = "decimal::opt", default, skip_serializing_if = "Option::is_none")]
    pub systole: Option<f64>,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let fields = [("C", self.c), ("mu", self.mu), ("D", self.d), ("t", self.t)];
        for (what, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    reason: "must be positive and finite".into(),
                });
            }
        }
        if !(self.l >= 0.0) {
            return Err(Error::OutOfRange {
                what: "L",
                value: self.l,
                reason: "must be nonnegative".into(),
            });
        }
        for (what, v) in [("mu3", self.mu3), ("systole", self.systole)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::OutOfRange {
                        what,
                        value: v,
                        reason: "must be positive".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusEstimator {
    /// Meyerhoff's estimate from the core length; not derived in this crate's
    /// source material, taken from the literature.
    Meyerhoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeriveMode {
    DeriveFromNz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedTubes {
    pub mode: DeriveMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_estimator: Option<RadiusEstimator>,
}

/// Tube shapes for the filled cusps: ingested, or estimated per filling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TubeSource {
    Explicit(Vec<TubeShape>),
    Derived(DerivedTubes),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeProvenance {
    Ingested,
    /// Core length from the upper end of the core-length window, twist from the
    /// cusp shape, radius from the named estimator.
    DerivedEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSet {
    pub tubes: Vec<TubeShape>,
    pub provenance: TubeProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldBundle {
    pub schema: String,
    pub name: String,
    pub cusps: Vec<CuspShape>,
    pub homology: BoundaryInclusionMap,
    pub tubes: TubeSource,
    pub thurston: ThurstonData,
    pub constants: Constants,
}

impl ManifoldBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        let b: ManifoldBundle = serde_json::from_str(text)?;
        b.validate()?;
        Ok(b)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ManifoldBundle::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(&self.schema)?;
        if self.cusps.is_empty() {
            return Err(Error::EmptyCuspList);
        }
        for c in &self.cusps {
            c.lattice()?;
        }
        if self.homology.cusps() != self.cusps.len() {
            return Err(Error::CuspCountMismatch {
                expected: self.cusps.len(),
                got: self.homology.cusps(),
            });
        }
        if let TubeSource::Explicit(t) = &self.tubes {
            if t.len() != self.cusps.len() {
                return Err(Error::CuspCountMismatch {
                    expected: self.cusps.len(),
                    got: t.len(),
                });
            }
        }
        self.constants.validate()
    }

    pub fn lattices(&self) -> Result<Vec<FlatTorusLattice>> {
        self.cusps.iter().map(CuspShape::lattice).collect()
    }

    /// Tubes for the filling along `slope`, or `None` when derivation is
    /// requested without a radius estimator or the estimator does not apply.
    pub fn tubes_for(&self, slope: &CompleteSlope, ell: f64) -> Result<Option<TubeSet>> {
        match &self.tubes {
            TubeSource::Explicit(t) => Ok(Some(TubeSet {
                tubes: t.clone(),
                provenance: TubeProvenance::Ingested,
            })),
            TubeSource::Derived(spec) => {
                let Some(RadiusEstimator::Meyerhoff) = spec.radius_estimator else {
                    return Ok(None);
                };
                let eps = nz_core_length_window(ell)?.hi;
                let Some(radius) = TubeShape::meyerhoff_radius(eps) else {
                    return Ok(None);
                };
                let lattices = self.lattices()?;
                let mut tubes = Vec::with_capacity(lattices.len());
                for (lat, s) in lattices.iter().zip(slope.iter()) {
                    let shape = TubeShape::from_boundary_lattice(lat, *s)?;
                    tubes.push(TubeShape::new(eps, shape.signed_twist(), radius)?);
                }
                Ok(Some(TubeSet {
                    tubes,
                    provenance: TubeProvenance::DerivedEstimate,
                }))
            }
        }
    }
}
