//! Numerical thresholds shared by the builders, the search and the tests.

/// Algebraic identities between closed-form unitaries.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Long composed sequences (11-step blocks, Euler concatenations).
pub const COMPOSITE_TOL: f64 = 1e-10;

/// Unitarity invariant, max-entry norm of `U†U - I`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Hermiticity precondition of the exponential oracle.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Schedule round trips pass through physical constants and durations.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

/// Euler-compiled single-spin gates.
pub const EULER_TOL: f64 = 1e-8;

/// Success threshold of the continuous Hadamard fit.
pub const HADAMARD_TOL: f64 = 1e-6;

/// Relative tolerance when checking that pulse angles follow the device
/// weights.
pub const REALIZABILITY_RTOL: f64 = 1e-9;
