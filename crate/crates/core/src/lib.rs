//! Kronecker product decomposition (KPD) of dense hypermatrices.
//!
//! The crate provides four layers, from storage up to solvers:
//!
//! - [`tensor`]: hypermatrix storage, multi-index arithmetic, matricization,
//!   vectorization, and head-index analysis.
//! - [`matrix`] / [`stp`]: the dense matrix kernel with the Kronecker product,
//!   the semi-tensor product, swap matrices, and factored-position permutation
//!   maps.
//! - [`mda`]: the monic decomposition test for *exact* vector-form KPD.
//! - [`sva`] / [`sumkpd`]: the alternating stationary-value solver for the
//!   nearest Kronecker product, multi-start search over stationary values,
//!   and greedy finite-sum KPD by residual deflation.
//! - [`matform`]: the permutation bridge reducing matrix-form KPD to
//!   vector-form KPD, plus the 2x2 rank-split expansion.
//!
//! Scalars are `f64` throughout. Hypermatrix values are stored flat in
//! lexicographic order with the last axis varying fastest, and indices are
//! 1-based at every public boundary, matching the usual mathematical
//! conventions for these objects.

pub mod io;
pub mod matform;
pub mod matrix;
pub mod mda;
pub mod stp;
pub mod sumkpd;
pub mod sva;
pub mod tensor;

pub mod data;

#[cfg(test)]
pub(crate) mod testdata;

pub use matform::{MatFactorTerm, MatKpdProblem, MatKpdReport};
pub use matrix::Matrix;
pub use mda::{ExactnessReport, MonicFactors};
pub use stp::{Permutation, PermutationMap};
pub use sumkpd::{KpdSum, SumConfig, SumStatus};
pub use sva::{FactorTerm, InitKind, NkpSolution, StationaryHistogram, SvaConfig};
pub use tensor::{HeadInfo, Hypermatrix, MultiIndex, Shape};
