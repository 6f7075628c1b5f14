//! Geometry and certification for Dehn surgery families.
//!
//! The crate evaluates the explicit quantities behind a criterion for the
//! cohomology stretch lamination of a filled manifold to consist of filling
//! core curves: slope lengths on cusp tori, the core-length window, tube
//! geometry, stable-norm bounds and the integer homology of surgery classes.
//! Constants that exist only non-constructively are taken as declared
//! assumptions and carried through every report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod certify;
pub mod curves;
pub mod decimal;
pub mod error;
pub mod family;
pub mod homology;
pub mod interval;
pub mod lattice;
pub mod norms;
mod quad;
pub mod report;
pub mod tube;
pub mod verify;

pub use bundle::{Constants, ManifoldBundle, SCHEMA};
pub use certify::{certify_filling, CertificationReport, Verdict};
pub use error::{Error, Result};
pub use family::{family_table, FamilySpec};
pub use homology::{BoundaryInclusionMap, CohomologyClass, SurgeryClassDatum};
pub use interval::{Interval, Tri};
pub use lattice::{CompleteSlope, FlatTorusLattice, Slope};
pub use tube::{TubePath, TubePoint, TubeShape};
