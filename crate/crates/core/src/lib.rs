//! Exact computation of kernel dimensions for the Witten-deformed model
//! operator on symmetric tensors.
//!
//! All matrices live on graded blocks `H^q ⊗ S^p` (Hermite polynomials of
//! degree `q` times symmetric `p`-tensors on `R^n`) and are stored exactly
//! over the rationals.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod graded_space;
pub mod kernel;
pub mod ladder;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Field;

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;
pub type RationalSparseMatrix = linalg::SparseMatrix<Rational>;
pub type RationalKernelBasis = linalg::KernelBasis<Rational>;
