//! Reverse-mode automatic differentiation over whole matrices.
//!
//! A [`Tape`] is a Wengert list: every operation appends one node whose
//! parents have strictly smaller indices, so iterating the list in
//! reverse is a reverse topological walk that visits each node exactly
//! once. Tapes are rebuilt for every training step and are not shared
//! across threads.

use alloc::string::ToString;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

use super::matrix::{elu_scalar, prelu_scalar, sigmoid_scalar, Matrix, NumError, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    AddBroadcast(usize, usize),
    MulBroadcast(usize, usize),
    Affine { x: usize, a: f64 },
    Transpose(usize),
    RowSums(usize),
    ColSums(usize),
    SumAll(usize),
    MeanAll(usize),
    Sigmoid(usize),
    Elu(usize),
    PRelu { x: usize, slope: usize },
    Exp(usize),
    LnClamped { x: usize, lo: f64, hi: f64 },
    Sqrt(usize),
    Recip(usize),
    MulConst { x: usize, c: Matrix },
    ConcatCols(usize, usize),
    ConcatRows(usize, usize),
    SliceRows { x: usize, start: usize },
}

struct Node {
    value: Matrix,
    requires_grad: bool,
    op: Op,
}

/// Recorded computation supporting one backward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Matrix>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Constant input; gradients do not flow into it.
    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, false, Op::Leaf)
    }

    /// Trainable input; [`Tape::grad`] is populated for it after
    /// [`Tape::backward`].
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, true, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Gradient of the last backward target with respect to `v`.
    pub fn grad(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    fn push(&mut self, value: Matrix, requires_grad: bool, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, ids: &[usize]) -> bool {
        ids.iter().any(|&i| self.nodes[i].requires_grad)
    }

    fn val(&self, id: usize) -> &Matrix {
        &self.nodes[id].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).matmul(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::MatMul(a.0, b.0)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).add(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::Add(a.0, b.0)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).sub(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::Sub(a.0, b.0)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).hadamard(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::Mul(a.0, b.0)))
    }

    /// Add a `1 x C` row or `R x 1` column vector to every row/column.
    pub fn add_broadcast(&mut self, x: Var, v: Var) -> Result<Var> {
        let value = self.val(x.0).add_broadcast(self.val(v.0))?;
        let rg = self.needs(&[x.0, v.0]);
        Ok(self.push(value, rg, Op::AddBroadcast(x.0, v.0)))
    }

    /// Multiply by a broadcast `1 x C` row or `R x 1` column vector.
    pub fn mul_broadcast(&mut self, x: Var, v: Var) -> Result<Var> {
        let value = self.val(x.0).mul_broadcast(self.val(v.0))?;
        let rg = self.needs(&[x.0, v.0]);
        Ok(self.push(value, rg, Op::MulBroadcast(x.0, v.0)))
    }

    /// Elementwise `a * x + b`.
    pub fn affine(&mut self, x: Var, a: f64, b: f64) -> Result<Var> {
        let value = self.val(x.0).affine(a, b)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Affine { x: x.0, a }))
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let value = self.val(x.0).transpose();
        let rg = self.nodes[x.0].requires_grad;
        self.push(value, rg, Op::Transpose(x.0))
    }

    pub fn row_sums(&mut self, x: Var) -> Var {
        let value = self.val(x.0).row_sums();
        let rg = self.nodes[x.0].requires_grad;
        self.push(value, rg, Op::RowSums(x.0))
    }

    pub fn col_sums(&mut self, x: Var) -> Var {
        let value = self.val(x.0).col_sums();
        let rg = self.nodes[x.0].requires_grad;
        self.push(value, rg, Op::ColSums(x.0))
    }

    pub fn sum_all(&mut self, x: Var) -> Result<Var> {
        let value = Matrix::scalar(self.val(x.0).sum())?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::SumAll(x.0)))
    }

    pub fn mean_all(&mut self, x: Var) -> Result<Var> {
        let value = Matrix::scalar(self.val(x.0).mean())?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::MeanAll(x.0)))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let value = self.val(x.0).map("sigmoid", sigmoid_scalar)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Sigmoid(x.0)))
    }

    pub fn elu(&mut self, x: Var) -> Result<Var> {
        let value = self.val(x.0).map("elu", elu_scalar)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Elu(x.0)))
    }

    /// Parametric ReLU with a learnable scalar slope (a `1 x 1` node).
    pub fn prelu(&mut self, x: Var, slope: Var) -> Result<Var> {
        let s = self.val(slope.0).as_scalar()?;
        let value = self.val(x.0).map("prelu", |v| prelu_scalar(v, s))?;
        let rg = self.needs(&[x.0, slope.0]);
        Ok(self.push(
            value,
            rg,
            Op::PRelu {
                x: x.0,
                slope: slope.0,
            },
        ))
    }

    pub fn exp(&mut self, x: Var) -> Result<Var> {
        let value = self.val(x.0).map("exp", |v| v.exp())?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Exp(x.0)))
    }

    /// `ln(clamp(x, lo, hi))`; the gradient is zero where the clamp is
    /// active.
    pub fn ln_clamped(&mut self, x: Var, lo: f64, hi: f64) -> Result<Var> {
        let value = self
            .val(x.0)
            .map("ln_clamped", |v| v.max(lo).min(hi).ln())?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::LnClamped { x: x.0, lo, hi }))
    }

    pub fn sqrt(&mut self, x: Var) -> Result<Var> {
        let value = self.val(x.0).map("sqrt", |v| v.sqrt())?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Sqrt(x.0)))
    }

    /// Elementwise reciprocal.
    pub fn recip(&mut self, x: Var) -> Result<Var> {
        let value = self.val(x.0).map("recip", |v| 1.0 / v)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::Recip(x.0)))
    }

    /// Elementwise product with a constant (masks, noise, weights).
    pub fn mul_const(&mut self, x: Var, c: Matrix) -> Result<Var> {
        let value = self.val(x.0).hadamard(&c)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::MulConst { x: x.0, c }))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).concat_cols(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::ConcatCols(a.0, b.0)))
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a.0).concat_rows(self.val(b.0))?;
        let rg = self.needs(&[a.0, b.0]);
        Ok(self.push(value, rg, Op::ConcatRows(a.0, b.0)))
    }

    pub fn slice_rows(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let value = self.val(x.0).slice_rows(start, len)?;
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(value, rg, Op::SliceRows { x: x.0, start }))
    }

    /// Convenience: mean of a row/column vector treated as a scalar
    /// reduction, `x` of any shape.
    pub fn scale(&mut self, x: Var, a: f64) -> Result<Var> {
        self.affine(x, a, 0.0)
    }

    /// Accumulate gradients of a scalar loss into every `param` leaf.
    ///
    /// Fails if `loss` is not `1 x 1` or does not depend on any
    /// parameter.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let shape = self.val(loss.0).shape();
        if shape != (1, 1) {
            return Err(NumError::NotScalar {
                rows: shape.0,
                cols: shape.1,
            });
        }
        if !self.nodes[loss.0].requires_grad {
            return Err(NumError::Contract(
                "backward: loss does not depend on any parameter".to_string(),
            ));
        }
        let mut grads: Vec<Option<Matrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::scalar(1.0)?);

        for id in (0..=loss.0).rev() {
            if !self.nodes[id].requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.propagate(id, &g, &mut grads)?;
            grads[id] = Some(g);
        }
        self.grads = grads;
        Ok(())
    }

    fn accumulate(grads: &mut [Option<Matrix>], id: usize, contribution: Matrix) -> Result<()> {
        match &mut grads[id] {
            Some(existing) => {
                *existing = existing.add(&contribution)?;
            }
            slot @ None => *slot = Some(contribution),
        }
        Ok(())
    }

    fn propagate(&self, id: usize, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let rg = |i: usize| self.nodes[i].requires_grad;
        match &self.nodes[id].op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if rg(*a) {
                    let c = g.matmul(&self.val(*b).transpose())?;
                    Self::accumulate(grads, *a, c)?;
                }
                if rg(*b) {
                    let c = self.val(*a).transpose().matmul(g)?;
                    Self::accumulate(grads, *b, c)?;
                }
            }
            Op::Add(a, b) => {
                if rg(*a) {
                    Self::accumulate(grads, *a, g.clone())?;
                }
                if rg(*b) {
                    Self::accumulate(grads, *b, g.clone())?;
                }
            }
            Op::Sub(a, b) => {
                if rg(*a) {
                    Self::accumulate(grads, *a, g.clone())?;
                }
                if rg(*b) {
                    Self::accumulate(grads, *b, g.scale(-1.0)?)?;
                }
            }
            Op::Mul(a, b) => {
                if rg(*a) {
                    Self::accumulate(grads, *a, g.hadamard(self.val(*b))?)?;
                }
                if rg(*b) {
                    Self::accumulate(grads, *b, g.hadamard(self.val(*a))?)?;
                }
            }
            Op::AddBroadcast(x, v) => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.clone())?;
                }
                if rg(*v) {
                    let vv = self.val(*v);
                    let reduced = if vv.rows() == 1 { g.col_sums() } else { g.row_sums() };
                    Self::accumulate(grads, *v, reduced)?;
                }
            }
            Op::MulBroadcast(x, v) => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.mul_broadcast(self.val(*v))?)?;
                }
                if rg(*v) {
                    let gx = g.hadamard(self.val(*x))?;
                    let vv = self.val(*v);
                    let reduced = if vv.rows() == 1 { gx.col_sums() } else { gx.row_sums() };
                    Self::accumulate(grads, *v, reduced)?;
                }
            }
            Op::Affine { x, a } => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.scale(*a)?)?;
                }
            }
            Op::Transpose(x) => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.transpose())?;
                }
            }
            Op::RowSums(x) => {
                if rg(*x) {
                    // g is R x 1; expand across columns.
                    let (r, c) = self.val(*x).shape();
                    let expanded = Matrix::from_fn(r, c, |i, _| g.get(i, 0))?;
                    Self::accumulate(grads, *x, expanded)?;
                }
            }
            Op::ColSums(x) => {
                if rg(*x) {
                    let (r, c) = self.val(*x).shape();
                    let expanded = Matrix::from_fn(r, c, |_, j| g.get(0, j))?;
                    Self::accumulate(grads, *x, expanded)?;
                }
            }
            Op::SumAll(x) => {
                if rg(*x) {
                    let (r, c) = self.val(*x).shape();
                    Self::accumulate(grads, *x, Matrix::filled(r, c, g.get(0, 0))?)?;
                }
            }
            Op::MeanAll(x) => {
                if rg(*x) {
                    let (r, c) = self.val(*x).shape();
                    let scale = g.get(0, 0) / (r * c) as f64;
                    Self::accumulate(grads, *x, Matrix::filled(r, c, scale)?)?;
                }
            }
            Op::Sigmoid(x) => {
                if rg(*x) {
                    let y = self.val(id);
                    let dy = y.map("sigmoid_vjp", |v| v * (1.0 - v))?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
            }
            Op::Elu(x) => {
                if rg(*x) {
                    let dy = self
                        .val(*x)
                        .map("elu_vjp", |v| if v >= 0.0 { 1.0 } else { v.exp() })?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
            }
            Op::PRelu { x, slope } => {
                let s = self.val(*slope).get(0, 0);
                if rg(*x) {
                    let dy = self
                        .val(*x)
                        .map("prelu_vjp", |v| if v >= 0.0 { 1.0 } else { s })?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
                if rg(*slope) {
                    let xv = self.val(*x);
                    let mut acc = 0.0;
                    for (gv, xvv) in g.data().iter().zip(xv.data()) {
                        if *xvv < 0.0 {
                            acc += gv * xvv;
                        }
                    }
                    Self::accumulate(grads, *slope, Matrix::scalar(acc)?)?;
                }
            }
            Op::Exp(x) => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.hadamard(self.val(id))?)?;
                }
            }
            Op::LnClamped { x, lo, hi } => {
                if rg(*x) {
                    let dy = self.val(*x).map("ln_clamped_vjp", |v| {
                        if v > *lo && v < *hi {
                            1.0 / v
                        } else {
                            0.0
                        }
                    })?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
            }
            Op::Sqrt(x) => {
                if rg(*x) {
                    let dy = self.val(id).map("sqrt_vjp", |y| 0.5 / y)?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
            }
            Op::Recip(x) => {
                if rg(*x) {
                    let dy = self.val(id).map("recip_vjp", |y| -(y * y))?;
                    Self::accumulate(grads, *x, g.hadamard(&dy)?)?;
                }
            }
            Op::MulConst { x, c } => {
                if rg(*x) {
                    Self::accumulate(grads, *x, g.hadamard(c)?)?;
                }
            }
            Op::ConcatCols(a, b) => {
                let ca = self.val(*a).cols();
                if rg(*a) {
                    Self::accumulate(grads, *a, g.slice_cols(0, ca)?)?;
                }
                if rg(*b) {
                    Self::accumulate(grads, *b, g.slice_cols(ca, g.cols() - ca)?)?;
                }
            }
            Op::ConcatRows(a, b) => {
                let ra = self.val(*a).rows();
                if rg(*a) {
                    Self::accumulate(grads, *a, g.slice_rows(0, ra)?)?;
                }
                if rg(*b) {
                    Self::accumulate(grads, *b, g.slice_rows(ra, g.rows() - ra)?)?;
                }
            }
            Op::SliceRows { x, start } => {
                if rg(*x) {
                    let (r, c) = self.val(*x).shape();
                    let mut scatter = Matrix::zeros(r, c);
                    let dst = scatter.data_mut();
                    let src = g.data();
                    dst[start * c..start * c + src.len()].copy_from_slice(src);
                    Self::accumulate(grads, *x, scatter)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;
    use alloc::vec;

    #[test]
    fn grad_of_sum_is_ones() {
        let mut tape = Tape::new();
        let w = tape.param(Matrix::new(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.0, -1.0]).unwrap());
        let loss = tape.sum_all(w).unwrap();
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(w).unwrap(), &Matrix::filled(2, 3, 1.0).unwrap());
    }

    #[test]
    fn grad_of_sum_of_squares_is_two_w() {
        let mut tape = Tape::new();
        let value = Matrix::new(2, 2, vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let w = tape.param(value.clone());
        let sq = tape.mul(w, w).unwrap();
        let loss = tape.sum_all(sq).unwrap();
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(w).unwrap(), &value.scale(2.0).unwrap());
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let mut tape = Tape::new();
        let w = tape.param(Matrix::zeros(2, 2));
        let y = tape.add(w, w).unwrap();
        assert!(matches!(
            tape.backward(y),
            Err(NumError::NotScalar { rows: 2, cols: 2 })
        ));
    }

    #[test]
    fn matmul_grads_match_manual_formula() {
        let mut rng = SplitRng::seed_from(3);
        let a_val = Matrix::from_fn(3, 4, |_, _| rng.standard_normal()).unwrap();
        let b_val = Matrix::from_fn(4, 2, |_, _| rng.standard_normal()).unwrap();
        let mut tape = Tape::new();
        let a = tape.param(a_val.clone());
        let b = tape.param(b_val.clone());
        let c = tape.matmul(a, b).unwrap();
        let loss = tape.sum_all(c).unwrap();
        tape.backward(loss).unwrap();
        // dL/dA = ones * B^T, dL/dB = A^T * ones
        let ones = Matrix::filled(3, 2, 1.0).unwrap();
        let da = ones.matmul(&b_val.transpose()).unwrap();
        let db = a_val.transpose().matmul(&ones).unwrap();
        assert!(tape.grad(a).unwrap().sub(&da).unwrap().max_abs() < 1e-12);
        assert!(tape.grad(b).unwrap().sub(&db).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn constants_do_not_accumulate_grads() {
        let mut tape = Tape::new();
        let x = tape.leaf(Matrix::filled(2, 2, 3.0).unwrap());
        let w = tape.param(Matrix::filled(2, 2, 1.0).unwrap());
        let y = tape.mul(x, w).unwrap();
        let loss = tape.sum_all(y).unwrap();
        tape.backward(loss).unwrap();
        assert!(tape.grad(x).is_none());
        assert!(tape.grad(w).is_some());
    }
}
