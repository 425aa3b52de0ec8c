use thiserror::Error;

/// Errors raised anywhere in the code construction, repair, and simulation paths.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // field and linear algebra
    #[error("modulus {0} is not a prime >= 3")]
    NotPrime(u64),
    #[error("no primitive element found modulo {0}")]
    NoPrimitiveElement(u64),
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),
    #[error("evaluation point is zero")]
    ZeroPoint,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    // parameters
    #[error("ordering violated: need 2b < k <= d_1 <= ... <= d_delta ({0})")]
    OrderingViolation(String),
    #[error("alpha = {alpha} is not a multiple of lcm(d - 2b) = {lcm}")]
    AlphaNotMultiple { alpha: usize, lcm: usize },
    #[error("largest helper count {d} exceeds n - 1 = {max}")]
    DTooLarge { d: usize, max: usize },
    #[error("helper count {0} is not in D")]
    DNotInD(usize),
    #[error("gamma is missing an entry for d = {0}")]
    GammaMissingD(usize),
    #[error("invalid bound arguments: {0}")]
    InvalidRange(String),
    #[error("alpha fails the segment divisibility requirement for d = {d}: {detail}")]
    DivisibilityViolation { d: usize, detail: String },
    #[error("field too small: p = {p} gives fewer than n = {n} distinct nonzero points")]
    FieldTooSmall { p: u64, n: usize },

    // encoding
    #[error("message has {got} symbols, expected {expected}")]
    WrongMessageLength { got: usize, expected: usize },
    #[error("data matrix structure violated: {0}")]
    StructureViolation(String),
    #[error("node index {0} out of range")]
    BadNodeIndex(usize),

    // decoding
    #[error("no consistent test group found")]
    NoConsistentGroup,
    #[error("Omega truncation for d = {d} is rank deficient over GF({p})")]
    OmegaRankDeficient { d: usize, p: u64 },
    #[error("no certified prime field found in [{from}, {to}]")]
    NoCertifiedField { from: u64, to: u64 },
    #[error("merge operator dimensions invalid: {0}")]
    BadDimensions(String),
    #[error("repair symbols do not match the iteration plan: {0}")]
    PlanMismatch(String),
    #[error("reduced repair system is singular")]
    SingularReducedSystem,
    #[error("{0} entries remain unresolved")]
    UnresolvedEntries(usize),
    #[error("assignment degree {0} is not integral")]
    NonIntegralDegree(String),
    #[error("helper set is invalid: {0}")]
    BadHelperSet(String),

    // simulation
    #[error("node {0} has already failed")]
    NodeAlreadyFailed(usize),
    #[error("node {0} is live and cannot be repaired")]
    RepairOfLiveNode(usize),
    #[error("not enough live helpers: need {need}, have {have}")]
    NotEnoughHelpers { need: usize, have: usize },
    #[error("scheme {0} does not support this operation")]
    UnsupportedScheme(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
