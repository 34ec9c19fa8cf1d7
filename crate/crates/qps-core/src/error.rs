use thiserror::Error;

/// Unified error type for the phase-space toolkit.
#[derive(Debug, Error)]
pub enum QpsError {
    /// The requested characteristic is not a prime number.
    #[error("characteristic d = {0} is not prime")]
    NotPrime(u64),

    /// A modulus polynomial could not be parsed or has the wrong shape.
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    /// The supplied modulus polynomial factors over Z_d.
    #[error("polynomial {0} is reducible over Z_{1}")]
    Reducible(String, u64),

    /// The field size d^n exceeds the configured cap.
    #[error("field size {d}^{n} exceeds the size cap {cap}")]
    SizeCapExceeded { d: u64, n: usize, cap: u64 },

    /// Multiplicative inverse of the zero element requested.
    #[error("the zero element has no multiplicative inverse")]
    ZeroInverse,

    /// Field elements from different field contexts were combined.
    #[error("field elements belong to different field contexts")]
    ContextMismatch,

    /// A coefficient list does not match the basis length.
    #[error("coefficient list of length {got} does not match basis of length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    /// The Gram matrix tr(θ_i θ_j) of a proposed basis is singular.
    #[error("the Gram matrix of the proposed basis is singular (not a basis)")]
    SingularGram,

    /// Bases passed to a basis-change do not fit the context.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A selfdual basis was required but the supplied one is not selfdual.
    #[error("not a selfdual basis: {0}")]
    NotSelfdual(String),

    /// The squeeze parameter must be a nonzero field element.
    #[error("squeeze parameter must be nonzero")]
    ZeroSqueeze,

    /// The construction requires an odd dimension/characteristic.
    #[error("dimension {0} is even; this construction requires odd d")]
    EvenDimension(u64),

    /// An operator expected to be unitary fails the unitarity test.
    #[error("operator is not unitary within tolerance")]
    NotUnitary,

    /// An operator expected to be hermitian fails the hermiticity test.
    #[error("operator is not hermitian within tolerance")]
    NotHermitian,

    /// A state vector is not normalized within tolerance.
    #[error("state vector norm {norm} violates unit normalization")]
    NotNormalized { norm: f64 },

    /// The s = +1 (P-function) kernel family is singular for this fiducial:
    /// some displacement overlap falls below the regularity threshold.
    #[error(
        "P kernel is singular: minimum fiducial displacement overlap {min_overlap:e} is below threshold"
    )]
    SingularPKernel { min_overlap: f64 },

    /// An operation that requires a Wigner (s = 0) grid got a different order.
    #[error("operation requires an s = 0 (Wigner) grid")]
    NotWignerGrid,

    /// Dimension mismatch between numerical objects.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Malformed or schema-incompatible file content.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// CSV (de)serialization failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
