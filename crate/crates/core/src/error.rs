use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h - h†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not square or has non-finite entries")]
    MalformedMatrix,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("spin index {index} out of range for {n_spins} spins")]
    IndexOutOfRange { index: usize, n_spins: usize },
    #[error("exchange requires two distinct spins, got {0} twice")]
    EqualIndices(usize),
    #[error("register size {0} outside 1..=12")]
    InvalidRegister(usize),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("profile integral must be nonnegative, got {0:e}")]
    NegativeDuration(f64),
    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),
    #[error("pulse angles disagree with their Zeeman provenance at spin {0}")]
    ProvenanceMismatch(usize),
    #[error("pairs overlap on spin {0}")]
    OverlappingPairs(usize),
    #[error("target is not a 2x2 unitary")]
    NotUnitary2x2,
    #[error("degenerate device weights: spins {0} and {1} see the same field")]
    DegenerateWeights(usize, usize),
    #[error("synthesis alphabet is empty")]
    EmptyAlphabet,
    #[error("inconsistent synthesis problem: {0}")]
    InvalidProblem(String),
    #[error("candidate budget exceeded: need {needed}, cap {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("evaluation point lies inside the wire cross-section")]
    PointInsideWire,
    #[error("quadrature did not converge")]
    QuadratureFailure,
    #[error("field vanishes at site {0}")]
    ZeroFieldSite(usize),
    #[error("field gradient must be positive, got {0:e} T")]
    NonpositiveGradient(f64),
    #[error("op {op_index}: angles are not realizable by the device ({reason})")]
    UnrealizableAngles { op_index: usize, reason: String },
    #[error("op {op_index}: field pulse of {duration_ns:.3} ns exceeds cap {cap_ns:.3} ns")]
    DurationCapExceeded {
        op_index: usize,
        duration_ns: f64,
        cap_ns: f64,
    },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
