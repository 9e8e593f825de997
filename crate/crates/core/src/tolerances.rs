//! Numerical tolerances, centralized.
//!
//! Every floating-point threshold used by the simulator lives in this module
//! so that accuracy trade-offs are visible in one place rather than scattered
//! through the code as magic numbers. The values are deliberate: the protocol
//! is algebraically exact, so deviations only come from f64 round-off, and the
//! thresholds sit several orders of magnitude above accumulated round-off for
//! registers of at most eight qubits.

/// Maximum allowed deviation of a state norm (or of a unitarity /
/// completeness check) from its exact value.
pub const EPS_NORM: f64 = 1e-12;

/// Norm threshold below which a vector is treated as the zero vector.
/// Compared against the norm itself, not its square.
pub const EPS_ZERO: f64 = 1e-12;

/// Eigenvalue tolerance for positive-semidefinite checks. Eigenvalues in
/// `(-EPS_PSD, 0)` are attributed to round-off and clamped to zero when a
/// matrix square root is taken; anything more negative is a real violation.
pub const EPS_PSD: f64 = 1e-10;

/// Smallest admissible channel coefficient. The discrimination states carry
/// the reciprocals of the channel coefficients, so a coefficient at this
/// floor is still representable with ample headroom in f64.
pub const EPS_COEF: f64 = 1e-9;
