//! Singular-value sequences, their step-function partial sums, Marcinkiewicz
//! norms, submajorization and the shift, Cesaro and dilation transforms.

mod rearrange;
mod sequence;
mod transform;
mod weight;

pub use rearrange::decreasing_rearrangement;
pub use sequence::{RunTable, SeqKind, SingularSeq, Support};
pub use transform::{sequence_transform, Transform};
pub use weight::{marcinkiewicz_norm, sup_grid, submajorizes, WeightFunction};

use crate::error::Result;

/// `int_0^t mu_s ds` under the step extension.
pub fn step_partial_sum(seq: &SingularSeq, t: f64) -> Result<f64> {
    seq.partial_sum(t)
}
