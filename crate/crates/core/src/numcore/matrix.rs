//! Dense row-major `f64` matrices.
//!
//! All fallible operations return [`NumError`]; any operation whose
//! result would contain a NaN or infinity fails immediately instead of
//! letting the value propagate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Errors raised by the numeric kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumError {
    /// Operand shapes are incompatible for the named operation.
    Dim {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// The named operation produced a NaN or infinite entry.
    NonFinite { op: &'static str },
    /// A scalar (1x1) was required.
    NotScalar { rows: usize, cols: usize },
    /// Any other violated precondition, with a short description.
    Contract(String),
}

impl fmt::Display for NumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumError::Dim { op, lhs, rhs } => write!(
                f,
                "{op}: incompatible shapes {}x{} and {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            NumError::NonFinite { op } => write!(f, "{op}: produced a non-finite value"),
            NumError::NotScalar { rows, cols } => {
                write!(f, "expected a 1x1 scalar, got {rows}x{cols}")
            }
            NumError::Contract(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for NumError {}

pub type Result<T> = core::result::Result<T, NumError>;

/// Dense matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from row-major data; rejects length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NumError::Contract(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Self::finish("new", rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::finish("filled", rows, cols, vec![value; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::finish("from_fn", rows, cols, data)
    }

    /// Single-entry 1x1 matrix.
    pub fn scalar(value: f64) -> Result<Self> {
        Self::finish("scalar", 1, 1, vec![value])
    }

    fn finish(op: &'static str, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumError::NonFinite { op });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// The value of a 1x1 matrix.
    pub fn as_scalar(&self) -> Result<f64> {
        if self.rows == 1 && self.cols == 1 {
            Ok(self.data[0])
        } else {
            Err(NumError::NotScalar {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(NumError::Dim {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(())
    }

    fn zip(&self, other: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other, op)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::finish(op, self.rows, self.cols, data)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, "sub", |a, b| a - b)
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip(other, "hadamard", |a, b| a * b)
    }

    /// Elementwise `a * x + b`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let data = self.data.iter().map(|&x| a * x + b).collect();
        Self::finish("affine", self.rows, self.cols, data)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        self.affine(a, 0.0)
    }

    pub fn map(&self, op: &'static str, f: impl Fn(f64) -> f64) -> Result<Self> {
        let data = self.data.iter().map(|&x| f(x)).collect();
        Self::finish(op, self.rows, self.cols, data)
    }

    /// Matrix product, `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(NumError::Dim {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        if m > 0 && k > 0 && n > 0 {
            // Row-major strides: row stride = cols, column stride = 1.
            unsafe {
                matrixmultiply::dgemm(
                    m,
                    k,
                    n,
                    1.0,
                    self.data.as_ptr(),
                    k as isize,
                    1,
                    other.data.as_ptr(),
                    n as isize,
                    1,
                    0.0,
                    out.as_mut_ptr(),
                    n as isize,
                    1,
                );
            }
        }
        Self::finish("matmul", m, n, out)
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Sum across each row, yielding an `R x 1` column.
    pub fn row_sums(&self) -> Self {
        let mut out = Self::zeros(self.rows, 1);
        for i in 0..self.rows {
            out.data[i] = self.row(i).iter().sum();
        }
        out
    }

    /// Sum down each column, yielding a `1 x C` row.
    pub fn col_sums(&self) -> Self {
        let mut out = Self::zeros(1, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j] += self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Add a broadcast `1 x C` row or `R x 1` column to every row/column.
    pub fn add_broadcast(&self, v: &Self) -> Result<Self> {
        if v.rows == 1 && v.cols == self.cols {
            let mut data = self.data.clone();
            for i in 0..self.rows {
                for j in 0..self.cols {
                    data[i * self.cols + j] += v.data[j];
                }
            }
            Self::finish("add_broadcast", self.rows, self.cols, data)
        } else if v.cols == 1 && v.rows == self.rows {
            let mut data = self.data.clone();
            for i in 0..self.rows {
                for j in 0..self.cols {
                    data[i * self.cols + j] += v.data[i];
                }
            }
            Self::finish("add_broadcast", self.rows, self.cols, data)
        } else {
            Err(NumError::Dim {
                op: "add_broadcast",
                lhs: self.shape(),
                rhs: v.shape(),
            })
        }
    }

    /// Multiply by a broadcast `1 x C` row or `R x 1` column.
    pub fn mul_broadcast(&self, v: &Self) -> Result<Self> {
        if v.rows == 1 && v.cols == self.cols {
            let mut data = self.data.clone();
            for i in 0..self.rows {
                for j in 0..self.cols {
                    data[i * self.cols + j] *= v.data[j];
                }
            }
            Self::finish("mul_broadcast", self.rows, self.cols, data)
        } else if v.cols == 1 && v.rows == self.rows {
            let mut data = self.data.clone();
            for i in 0..self.rows {
                for j in 0..self.cols {
                    data[i * self.cols + j] *= v.data[i];
                }
            }
            Self::finish("mul_broadcast", self.rows, self.cols, data)
        } else {
            Err(NumError::Dim {
                op: "mul_broadcast",
                lhs: self.shape(),
                rhs: v.shape(),
            })
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn concat_cols(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(NumError::Dim {
                op: "concat_cols",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Self::finish("concat_cols", self.rows, cols, data)
    }

    /// Vertical stacking `[self; other]`.
    pub fn concat_rows(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(NumError::Dim {
                op: "concat_rows",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::finish("concat_rows", self.rows + other.rows, self.cols, data)
    }

    /// Mutable access to the raw entries. Callers are responsible for
    /// keeping entries finite; every operation re-checks its output.
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Copy of columns `start..start + len`.
    pub fn slice_cols(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.cols {
            return Err(NumError::Contract(format!(
                "slice_cols {start}..{} out of bounds for {} cols",
                start + len,
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * len);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend_from_slice(&row[start..start + len]);
        }
        Self::finish("slice_cols", self.rows, len, data)
    }

    /// Copy of rows `start..start + len`.
    pub fn slice_rows(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.rows {
            return Err(NumError::Contract(format!(
                "slice_rows {start}..{} out of bounds for {} rows",
                start + len,
                self.rows
            )));
        }
        let data = self.data[start * self.cols..(start + len) * self.cols].to_vec();
        Self::finish("slice_rows", len, self.cols, data)
    }

    /// New matrix whose row `i` is `self`'s row `perm[i]`.
    pub fn gather_rows(&self, perm: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(perm.len() * self.cols);
        for &p in perm {
            if p >= self.rows {
                return Err(NumError::Contract(format!(
                    "gather_rows: index {p} out of bounds for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(p));
        }
        Self::finish("gather_rows", perm.len(), self.cols, data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Activation function kinds used across the models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Sigmoid,
    Elu,
    /// Parametric ReLU; the slope is a learnable scalar elsewhere, this
    /// variant carries the value to apply.
    PRelu(f64),
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn elu_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

pub fn prelu_scalar(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Elementwise activation on a matrix.
pub fn activate(x: &Matrix, kind: Activation) -> Result<Matrix> {
    match kind {
        Activation::Sigmoid => x.map("sigmoid", sigmoid_scalar),
        Activation::Elu => x.map("elu", elu_scalar),
        Activation::PRelu(slope) => x.map("prelu", |v| prelu_scalar(v, slope)),
    }
}
