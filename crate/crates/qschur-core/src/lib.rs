//! Simultaneous Schur decomposition of matrix collections attached to
//! directed multigraphs (quivers).
//!
//! A collection of matrices indexed by the edges of a quiver can be brought
//! to (quasi-)upper-triangular form by per-vertex orthogonal or unitary
//! changes of basis exactly when the underlying undirected graph is a
//! pseudoforest: every connected component contains at most one cycle. This
//! crate classifies quivers, carries out the reduction constructively
//! (periodic QZ on the cycle, QR/RQ sweeps along the trees), and verifies
//! the result independently.
//!
//! Layout:
//! - [`quiver`] — graph model, pseudoforest classification, traversal plans
//! - [`linalg`] — dense kernels: QR/RQ, Schur, signed periodic QZ, cycle
//!   compression, and the block-cyclic embedding oracle
//! - [`engine`] — end-to-end triangularization of a quiver representation
//! - [`verify`] — independent residual/orthogonality/shape/spectrum checks

pub mod engine;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod quiver;
pub mod scalar;
pub mod verify;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use engine::{
    expected_shape, majority_direction, tree_step, triangularize, triangularize_pseudotree,
    ComponentSummary, CycleProvenance, EdgeRole, EngineError, EngineOpts, Orientation,
    ReducedEdge, Rejection, SchurDecomposition, ShapeClass, TriangularizeOutcome,
};
pub use error::{LinalgError, QuiverError};
pub use linalg::IterOpts;
pub use matrix::Matrix;
pub use quiver::{
    classify, find_cycle, plan_traversal, validate_dimensions, Component, ComponentKind,
    CycleInfo, DimViolation, DirectionClass, Edge, EdgeId, PseudoforestReport, Quiver,
    Representation, Sign, TraversalPlan, TreeStep, Vertex, VertexId,
};
pub use scalar::{Field, Scalar};
pub use verify::{
    check_orthogonality, check_reconstruction, check_shape, verify_all, SpectrumCheck,
    VerificationReport, VerifyConfig,
};

pub use num_complex::Complex64;
