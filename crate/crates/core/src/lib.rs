//! Sentence embeddings as low-rank approximations of a binary sentence × task-label
//! matrix.
//!
//! - [`labelmatrix`]: generating, validating and embedding datasets into the matrix.
//! - [`factorization`]: exact and randomized truncated SVD, reconstruction and the
//!   Eckart–Young–Mirsky tail bound.
//! - [`analysis`]: row-wise L1 reconstruction loss grouped by row density.
//! - [`classify`]: softmax regression, the right-singular-vector classifier, binary cosine
//!   and pairwise features.
//! - [`experiments`]: the density/loss grid, the representation-transfer study and
//!   pairwise similarity scoring.

pub mod analysis;
pub mod classify;
pub mod dense;
pub mod error;
mod exec;
pub mod experiments;
pub mod factorization;
pub mod labelmatrix;
pub mod seed;

pub use dense::{DenseBudget, DenseMatrix};
pub use error::{Error, Result};
pub use factorization::{Factorization, SvdMethod, SvdOptions};
pub use labelmatrix::LabelMatrix;
pub use seed::RngSeed;
