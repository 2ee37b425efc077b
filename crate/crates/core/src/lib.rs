//! Secret-key distillation bounds for small tripartite quantum and classical states.
//!
//! The crate computes upper and lower estimates on the distillable secret key
//! of a tripartite state `ρ_ABE` shared by Alice, Bob, and an eavesdropper:
//!
//! - exact entropic quantities (von Neumann entropy, mutual information,
//!   conditional mutual information, relative entropy),
//! - the Devetak–Winter achievable rate `I(A:B) − I(A:E)` as a lower bound,
//! - secrecy monotones realised by multi-restart derivative-free optimization:
//!   intrinsic information, reduced intrinsic information, squashed
//!   entanglement, relative entropy of entanglement, accessible information,
//!   and a measurement-induced entanglement-of-formation bound,
//! - classical LOPC protocols, their coherent quantum versions, and the
//!   commutation check between "measure then process" and "process coherently
//!   then measure",
//! - builders for the named example states used throughout: ideal and twisted
//!   key states, the gap distribution, the flower state, the Bell-locking
//!   state, and the embedding counterexample.
//!
//! Every optimization-based value is returned as a [`bounds::BoundEstimate`]
//! carrying an explicit direction tag: the library never claims to certify an
//! infimum it only approached from above.
//!
//! All entropies and rates are in bits (logarithms base 2).

pub mod bounds;
pub mod entropy;
pub mod linalg;
pub mod optimize;
pub mod protocols;
pub mod states;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned a non-finite value")]
    NonFiniteObjective,

    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
