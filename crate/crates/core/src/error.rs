use thiserror::Error;

use crate::lattice::LatticeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (||M - M^dagger|| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not idempotent (||M^2 - M|| = {deviation:e})")]
    NotIdempotent { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },
    #[error("matrix is not unitary (||U^dagger U - I|| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("projectors are not an orthogonal resolution of the identity: {reason} (deviation {deviation:e})")]
    NotResolution { reason: &'static str, deviation: f64 },
    #[error("outcome {first} of the first instrument does not commute with outcome {second} of the second (||[P, Q]|| = {norm:e})")]
    NonCommuting { first: usize, second: usize, norm: f64 },
    #[error("mixture weights are invalid: {0}")]
    InvalidMixture(String),
    #[error("basis is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("operator is not supported on tensor factor {factor} (deviation {deviation:e})")]
    NotOnFactor { factor: u8, deviation: f64 },
    #[error("no triple (i, p, j) with i = {i}, j = {j} has a non-zero block")]
    EmptyLambda { i: usize, j: usize },
    #[error("no tensor split places both instruments on the first factor")]
    NoTensorSplit,
    #[error("factor-2 dimension {dim} cannot host {outcomes} outcomes")]
    FactorTooSmall { dim: usize, outcomes: usize },
    #[error("velocity {speed} is not below the speed of light")]
    Superluminal { speed: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("regions are not space-like separated")]
    NotSpacelike,
    #[error("locality violated: space-like instruments do not commute at ({first}, {second}), ||[P, Q]|| = {norm:e}")]
    LocalityViolation { first: usize, second: usize, norm: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
