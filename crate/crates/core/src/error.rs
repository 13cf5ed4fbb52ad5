use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("gap condition violated at grid index {index} (point {point:?}): gap {gap:.3e}")]
    GapViolation { index: usize, point: Vec<f64>, gap: f64 },

    #[error("rank changes from {expected} to {found} at grid index {index}")]
    RankChange { index: usize, expected: usize, found: usize },

    #[error("contour passes within {distance:.3e} of the spectrum at grid index {index}")]
    ContourHitsSpectrum { index: usize, distance: f64 },

    #[error("resolvent is numerically singular at grid index {index} (node {node})")]
    SingularResolvent { index: usize, node: usize },

    #[error("Q = {q:.3e} is not positive at grid index {index}")]
    NonPositiveQ { index: usize, q: f64 },

    #[error("grid is not closed under the requested involution: {0}")]
    NotInvolutionClosed(String),

    #[error("regularity screen failed: |det J| = {det:.3e} at preimage {point:?}")]
    NotRegular { det: f64, point: Vec<f64> },

    #[error("Newton search exhausted its budget: {0}")]
    NewtonBudget(String),

    #[error("singular map value: {0}")]
    SingularValue(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
