//! Dense linear-algebra kernels, generic over the scalar field.

pub mod cycle;
pub mod householder;
pub mod lu;
pub mod oracle;
pub mod periodic;
mod pqz;
pub mod schur;

pub use cycle::{rectangular_cycle_compress, reduce_cycle, CycleCompression, CycleReduction};
pub use householder::{qr, rq, QrFactors, RqFactors};
pub use lu::{condition_estimate, lu_decompose, LuFactors};
pub use oracle::{cyclic_embedding_oracle, CycleSpectrum};
pub use periodic::{periodic_schur, periodic_residual, PeriodicSchurFactors, Signature};
pub use pqz::IterOpts;
pub use schur::{
    complex_schur, hessenberg, quasi_triangular_eigenvalues, real_schur, schur,
    HessenbergFactors, SchurResult,
};
