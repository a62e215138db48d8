//! Single-spin gates from Heisenberg exchange and a global, inhomogeneous
//! magnetic field.
//!
//! The crate builds the primitive pulse unitaries of an N-spin register,
//! verifies the swap / refocusing identities the construction rests on,
//! searches pulse-template space for rotation circuits, models the twin-wire
//! zig-zag device that supplies the field gradients, and lowers circuits to
//! timed current/exchange schedules.
//!
//! Conventions used everywhere:
//!
//! * spin 0 is the highest-order tensor factor;
//! * `S^α = σ^α / 2`;
//! * circuits list operations in time order (first op acts first), so a
//!   circuit `[A, B]` evaluates to the matrix product `B·A`.

pub mod circuit;
pub mod device;
pub mod error;
pub mod linalg;
pub mod register;
pub mod scheduler;
pub mod suite;
pub mod synthesis;
pub mod templates;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{hermitian_expm, kron, phase_distance, CMatrix, Unitary};
pub use register::{Axis, Convention, RegisterSpec};
