//! Numerical laboratory for singular traces.
//!
//! Operators are represented by their singular values (or eigenvalues), and
//! Dixmier-trace values are computed by several independent routes: Cesaro
//! means, zeta residues, heat kernels and Lidskii eigenvalue sums.

// Guards like `!(x > 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod models;
pub mod numeric;
pub mod props;
pub mod seqcore;

pub use error::{Error, Result};
