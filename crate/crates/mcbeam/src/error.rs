//! Library error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("user index {index} out of range for {n_users} users")]
    UserIndexOutOfRange { index: usize, n_users: usize },

    #[error("coordinate index {index} out of range for {n_coords} coordinates")]
    CoordIndexOutOfRange { index: usize, n_coords: usize },

    #[error("degenerate instance: no feasible direction found after {retries} perturbation retries")]
    DegenerateInstance { retries: usize },

    #[error("degenerate anchor: reference beamformer is zero, every dual column would vanish")]
    DegenerateAnchor,

    #[error("cannot certify: recovered beamformer is not scalable to feasibility (some constraint has nonpositive alignment)")]
    NotScalable,

    #[error("active-set enumeration refused: {k} users exceeds the limit of {limit}")]
    EnumerationTooLarge { k: usize, limit: usize },

    #[error("active-set enumeration needs the precomputed Gram matrix")]
    GramRequired,

    #[error(
        "no KKT candidate accepted (numerical degeneracy); nearest candidate had \
         objective {best_objective} with residual {best_residual}"
    )]
    OracleDegenerate { best_objective: f64, best_residual: f64 },

    #[error("inner solver reported a degenerate surrogate: {0}")]
    DegenerateSurrogate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
