//! Dense matrix algebra, reverse-mode autodiff, and the Adam optimizer.

mod adam;
mod autodiff;
mod gradcheck;
mod matrix;

pub use adam::{adam_step, AdamState, Param};
pub use autodiff::{Tape, Var};
pub use gradcheck::finite_diff_check;
pub use matrix::{
    activate, elu_scalar, prelu_scalar, sigmoid_scalar, Activation, Matrix, NumError, Result,
};
