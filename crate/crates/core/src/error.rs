use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: malformed input (bad files, bad
/// arguments, invalid geometry) and hypothesis failures, where the input is
/// well formed but a mathematical precondition does not hold.
#[derive(Debug, Error)]
pub enum Error {
    #[error("slope ({p}, {q}) is not primitive (gcd {gcd})")]
    NonPrimitiveSlope { p: i64, q: i64, gcd: i64 },

    #[error("degenerate lattice: basis vectors are (nearly) linearly dependent")]
    DegenerateLattice,

    #[error("expected {expected} cusps, got {got}")]
    CuspCountMismatch { expected: usize, got: usize },

    #[error("cusp list is empty")]
    EmptyCuspList,

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what} = {value} is out of range: {reason}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        reason: String,
    },

    #[error("total normalized length {ell} does not exceed 7.823; core-length window invalid")]
    BelowNzThreshold { ell: f64 },

    #[error("path is empty")]
    EmptyPath,

    #[error("path leaves the admissible region: {0}")]
    PathOutsideRegion(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("class is not a 0-surgery class: {0}")]
    NotZeroSurgery(String),

    #[error("cohomology class is zero")]
    ZeroClass,

    #[error("slope on cusp {cusp} is incompatible with the class (class evaluates to {value})")]
    IncompatibleSlope { cusp: usize, value: i64 },

    #[error("chain is nonzero but has zero length")]
    ZeroLengthChain,

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error reflects a failed mathematical precondition rather
    /// than malformed input.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::BelowNzThreshold { .. }
                | Error::NotZeroSurgery(_)
                | Error::ZeroClass
                | Error::IncompatibleSlope { .. }
                | Error::Hypothesis(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
