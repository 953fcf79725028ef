//! Error types shared across the crate.

use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Partially reduced state attached to iteration failures so callers can
/// inspect how far the reduction got.
#[derive(Debug, Clone)]
pub struct PartialReduction<S> {
    pub factors: Vec<Matrix<S>>,
    pub reduced: Vec<Matrix<S>>,
    pub sweeps: usize,
    pub window: (usize, usize),
}

#[derive(Debug, Error)]
pub enum LinalgError<S: Scalar> {
    #[error("iteration limit reached after {} sweeps (active window {}..{}) in {context}", partial.sweeps, partial.window.0, partial.window.1)]
    IterationLimit {
        context: String,
        partial: Box<PartialReduction<S>>,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cycle carries a rectangular matrix on an edge opposing the majority orientation; reduction of that structure is not supported")]
    UnsupportedCycleStructure,
    #[error("reduction produced an out-of-pattern entry of magnitude {magnitude:.3e} at ({row}, {col}) on edge {edge}")]
    StructureFailure {
        edge: usize,
        row: usize,
        col: usize,
        magnitude: f64,
    },
    #[error("contract violation: {0}")]
    Contract(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("invalid quiver: {0}")]
    Invalid(String),
    #[error("contract violation: {0}")]
    Contract(String),
}
