use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not expanding: eigenvalue modulus {modulus} is within the margin of 1")]
    NonExpandingMatrix { modulus: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("digit set contains duplicate digit {0}")]
    DuplicateDigits(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("atom budget exceeded: {requested} atoms requested, budget is {budget}")]
    AtomBudgetExceeded { requested: u128, budget: usize },
    #[error("measures carry different real offsets and cannot be merged exactly")]
    OffsetMismatch,
    #[error("tolerance {0} cannot be reached in double precision")]
    ToleranceUnreachable(f64),
    #[error("no packing certificate: {0}")]
    NotCertifiedPacking(String),
    #[error("no singularity witness found (max overlap {max_overlap}); try a deeper level")]
    NoWitnessFound { max_overlap: String },
    #[error("eigen budget exceeded: {atoms} atoms, budget is {budget}")]
    EigenBudgetExceeded { atoms: usize, budget: usize },
    #[error("frequency set is empty")]
    EmptyFrequencySet,
    #[error("frequencies {0} and {1} coincide within resolution")]
    DuplicateFrequency(usize, usize),
    #[error("test function has zero norm")]
    ZeroNormInput,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("(R, B, L) is not a Hadamard triple")]
    NotHadamard,
    #[error("block A4 is singular (|det| = {det:e}); the image subspace meets the first coordinate block")]
    SingularA4 { det: f64 },
    #[error("linear map is not invertible")]
    NotInvertible,
    #[error("frequency pool cannot reach full rank ({rank} < {atoms})")]
    PoolExhausted { rank: usize, atoms: usize },
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
}
