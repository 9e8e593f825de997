//! Error type shared by all simulator modules.

use thiserror::Error;

use crate::qstate::Label;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("duplicate qubit label '{0}'")]
    LabelCollision(Label),

    #[error("state has no qubit labeled '{0}'")]
    UnknownLabel(Label),

    #[error("states are defined on different label lists")]
    LabelMismatch,

    #[error("operator acts on {expected} qubit(s) but {got} target(s) were given")]
    ArityMismatch { expected: usize, got: usize },

    #[error("expected {expected} amplitudes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("register would hold {0} qubits, more than this simulator supports")]
    TooManyQubits(usize),

    #[error("state has vanishing norm")]
    ZeroNorm,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("unknown gate name '{0}'")]
    UnknownGate(String),

    #[error("channel coefficient {0} is below the admissible minimum; the protocol requires strictly positive coefficients")]
    DegenerateChannel(f64),

    #[error("channel coefficients must have unit sum of squares (got {0})")]
    ChannelNotNormalized(f64),

    #[error("POVM element {index} has negative eigenvalue {min_eigenvalue:.3e}; the scaling x lies below the admissible minimum")]
    PositivityViolation { index: usize, min_eigenvalue: f64 },

    #[error("POVM scaling x must be a finite positive number (got {0})")]
    InvalidScaling(f64),

    #[error("a zero-probability outcome was drawn")]
    ZeroProbabilityOutcome,

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("a run needs at least one trial (got {0})")]
    InvalidTrialCount(u64),

    #[error("no recovery operator exists for POVM outcome {0}; only conclusive outcomes 1-4 admit recovery")]
    UnrecoverableOutcome(usize),
}
