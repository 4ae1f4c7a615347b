//! Adam optimizer with bias correction.

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use super::autodiff::{Tape, Var};
use super::matrix::{Matrix, NumError, Result};

/// Per-parameter Adam bookkeeping.
#[derive(Clone, Debug)]
pub struct AdamState {
    step: u64,
    first_moment: Matrix,
    second_moment: Matrix,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            step: 0,
            first_moment: Matrix::zeros(rows, cols),
            second_moment: Matrix::zeros(rows, cols),
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One Adam update; mutates `param` in place and returns it for
/// chaining-style use.
pub fn adam_step<'p>(
    param: &'p mut Matrix,
    grad: &Matrix,
    state: &mut AdamState,
) -> Result<&'p Matrix> {
    if param.shape() != grad.shape() || param.shape() != state.first_moment.shape() {
        return Err(NumError::Dim {
            op: "adam_step",
            lhs: param.shape(),
            rhs: grad.shape(),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    let m = state.first_moment.data_mut();
    let v = state.second_moment.data_mut();
    let p = param.data_mut();
    let g = grad.data();
    for i in 0..p.len() {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        if !p[i].is_finite() {
            return Err(NumError::NonFinite { op: "adam_step" });
        }
    }
    Ok(param)
}

/// A trainable matrix bundled with its optimizer state.
#[derive(Clone, Debug)]
pub struct Param {
    pub value: Matrix,
    state: AdamState,
}

impl Param {
    pub fn new(value: Matrix) -> Self {
        let state = AdamState::new(value.rows(), value.cols());
        Self { value, state }
    }

    pub fn with_learning_rate(value: Matrix, learning_rate: f64) -> Self {
        let state = AdamState::new(value.rows(), value.cols()).with_learning_rate(learning_rate);
        Self { value, state }
    }

    /// Register this parameter on a tape for the current step.
    pub fn push(&self, tape: &mut Tape) -> Var {
        tape.param(self.value.clone())
    }

    /// Apply the gradient accumulated for `var`; a parameter untouched
    /// by the loss is left as is.
    pub fn apply_grad(&mut self, tape: &Tape, var: Var) -> Result<()> {
        if let Some(grad) = tape.grad(var) {
            adam_step(&mut self.value, grad, &mut self.state)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_grad_leaves_param_unchanged() {
        let mut p = Matrix::new(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let before = p.clone();
        let mut st = AdamState::new(1, 3);
        adam_step(&mut p, &Matrix::zeros(1, 3), &mut st).unwrap();
        assert_eq!(p, before);
        assert_eq!(st.step(), 1);
    }

    #[test]
    fn first_step_moves_against_gradient_sign_by_lr() {
        // With bias correction, m_hat = g and v_hat = g^2, so the first
        // update is -lr * g / (|g| + eps) = -lr * sign(g) up to eps.
        let mut p = Matrix::new(1, 2, vec![0.0, 0.0]).unwrap();
        let g = Matrix::new(1, 2, vec![3.0, -0.25]).unwrap();
        let mut st = AdamState::new(1, 2);
        adam_step(&mut p, &g, &mut st).unwrap();
        assert!((p.get(0, 0) + 0.001).abs() < 1e-9);
        assert!((p.get(0, 1) - 0.001).abs() < 1e-9);
    }

    #[test]
    fn updates_are_deterministic() {
        let g = Matrix::new(2, 2, vec![0.3, -1.0, 2.0, 0.7]).unwrap();
        let run = || {
            let mut p = Matrix::filled(2, 2, 1.0).unwrap();
            let mut st = AdamState::new(2, 2);
            for _ in 0..5 {
                adam_step(&mut p, &g, &mut st).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = Matrix::zeros(2, 2);
        let g = Matrix::zeros(2, 3);
        let mut st = AdamState::new(2, 2);
        assert!(matches!(
            adam_step(&mut p, &g, &mut st),
            Err(NumError::Dim { op: "adam_step", .. })
        ));
    }
}
