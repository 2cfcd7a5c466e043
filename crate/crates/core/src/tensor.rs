//! Hypermatrix storage and index algebra.
//!
//! A hypermatrix of order `d` and dimension `n_1 x ... x n_d` is stored as a
//! flat value vector in lexicographic order with the *last* axis varying
//! fastest; that flat vector is exactly the vector form `V(A)`. All indices
//! (multi-index entries, linear positions, axis ids) are 1-based at the public
//! boundary and converted to 0-based arithmetic inside this module only.

use thiserror::Error;

use crate::matrix::Matrix;

/// Errors from index and shape operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("shape must have at least one axis")]
    EmptyShape,
    #[error("axis {axis} has dimension 0; every dimension must be >= 1")]
    ZeroDimension { axis: usize },
    #[error("index {index} out of range [1, {dim}] on axis {axis}")]
    IndexOutOfRange {
        axis: usize,
        index: usize,
        dim: usize,
    },
    #[error("multi-index has {got} entries, shape has {expected} axes")]
    OrderMismatch { expected: usize, got: usize },
    #[error("linear index {index} out of range [1, {total}]")]
    LinearIndexOutOfRange { index: usize, total: usize },
    #[error("value count {got} does not match shape total {expected}")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("row/column axes do not partition the axis set [1, {order}]")]
    NotAPartition { order: usize },
    #[error("zero vector has no head")]
    ZeroVector,
    #[error("axis {axis} out of range [1, {order}]")]
    AxisOutOfRange { axis: usize, order: usize },
}

/// A multi-index `(i_1, ..., i_d)` with 1-based entries.
pub type MultiIndex = Vec<usize>;

/// Axis dimensions `n_1 x ... x n_d` of a hypermatrix.
///
/// Dummy axes (dimension 1) are permitted and behave as neutral elements of
/// the index product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    dims: Vec<usize>,
    total: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self, TensorError> {
        if dims.is_empty() {
            return Err(TensorError::EmptyShape);
        }
        for (i, &d) in dims.iter().enumerate() {
            if d == 0 {
                return Err(TensorError::ZeroDimension { axis: i + 1 });
            }
        }
        let total = dims.iter().product();
        Ok(Self { dims, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Order `d`: the number of axes.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total element count `n = n_1 * ... * n_d`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Stride of each axis in the flat layout (elements, last axis stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dims.len();
        let mut strides = vec![1usize; d];
        for s in (0..d.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.dims[s + 1];
        }
        strides
    }

    /// Converts a multi-index to its 1-based linear position:
    /// `k = (i_1 - 1) n_2 ... n_d + ... + (i_{d-1} - 1) n_d + i_d`.
    pub fn linear_index(&self, mi: &[usize]) -> Result<usize, TensorError> {
        if mi.len() != self.dims.len() {
            return Err(TensorError::OrderMismatch {
                expected: self.dims.len(),
                got: mi.len(),
            });
        }
        let mut k = 0usize;
        for (axis0, (&i, &n)) in mi.iter().zip(&self.dims).enumerate() {
            if i < 1 || i > n {
                return Err(TensorError::IndexOutOfRange {
                    axis: axis0 + 1,
                    index: i,
                    dim: n,
                });
            }
            k = k * n + (i - 1);
        }
        Ok(k + 1)
    }

    /// Converts a 1-based linear position back to its multi-index by the
    /// trailing-remainder recursion: peel `i_d` first, then `i_{d-1}`, ...
    pub fn multi_index(&self, k: usize) -> Result<MultiIndex, TensorError> {
        if k < 1 || k > self.total {
            return Err(TensorError::LinearIndexOutOfRange {
                index: k,
                total: self.total,
            });
        }
        let mut rem = k - 1;
        let mut mi = vec![1usize; self.dims.len()];
        for s in (0..self.dims.len()).rev() {
            mi[s] = rem % self.dims[s] + 1;
            rem /= self.dims[s];
        }
        Ok(mi)
    }

    /// Merges axis `axis` with axis `axis + 1` into a single axis of
    /// dimension `n_axis * n_{axis+1}`. The flat layout is unchanged.
    pub fn merge_axes(&self, axis: usize) -> Result<Shape, TensorError> {
        if axis < 1 || axis >= self.dims.len() {
            return Err(TensorError::AxisOutOfRange {
                axis,
                order: self.dims.len(),
            });
        }
        let mut dims = self.dims.clone();
        let merged = dims[axis - 1] * dims[axis];
        dims[axis - 1] = merged;
        dims.remove(axis);
        Shape::new(dims)
    }

    /// Inserts a dummy axis (dimension 1) so that it becomes axis `axis`.
    /// `axis` may be `order() + 1` to append. The flat layout is unchanged.
    pub fn insert_dummy(&self, axis: usize) -> Result<Shape, TensorError> {
        if axis < 1 || axis > self.dims.len() + 1 {
            return Err(TensorError::AxisOutOfRange {
                axis,
                order: self.dims.len(),
            });
        }
        let mut dims = self.dims.clone();
        dims.insert(axis - 1, 1);
        Shape::new(dims)
    }
}

/// First nonzero position (1-based) and value of a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadInfo {
    pub position: usize,
    pub value: f64,
}

/// Returns the head (first nonzero entry) of `v`.
pub fn head(v: &[f64]) -> Result<HeadInfo, TensorError> {
    v.iter()
        .position(|&x| x != 0.0)
        .map(|p| HeadInfo {
            position: p + 1,
            value: v[p],
        })
        .ok_or(TensorError::ZeroVector)
}

/// Per-axis head indices of a factored vector whose head sits at linear
/// position `e`: the head of factor `s` is entry `s` of the returned
/// multi-index.
pub fn head_factors(shape: &Shape, e: usize) -> Result<MultiIndex, TensorError> {
    shape.multi_index(e)
}

/// A dense order-`d` hypermatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypermatrix {
    shape: Shape,
    values: Vec<f64>,
}

impl Hypermatrix {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self, TensorError> {
        if values.len() != shape.total() {
            return Err(TensorError::ValueCountMismatch {
                expected: shape.total(),
                got: values.len(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: Shape) -> Self {
        let values = vec![0.0; shape.total()];
        Self { shape, values }
    }

    /// Builds a hypermatrix from its nonzero entries; all others are zero.
    pub fn from_nonzeros(
        shape: Shape,
        entries: &[(&[usize], f64)],
    ) -> Result<Self, TensorError> {
        let mut h = Self::zeros(shape);
        for (mi, val) in entries {
            let k = h.shape.linear_index(mi)?;
            h.values[k - 1] = *val;
        }
        Ok(h)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mi: &[usize]) -> Result<f64, TensorError> {
        Ok(self.values[self.shape.linear_index(mi)? - 1])
    }

    /// The vector form `V(A)`: the flat values, which are already stored in
    /// lexicographic order.
    pub fn vectorize(&self) -> &[f64] {
        &self.values
    }

    /// Frobenius norm of the entry set.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Matricizes under the axis partition `row_axes | col_axes`: the result
    /// has one row per lexicographic combination of the row-axis indices and
    /// one column per combination of the column-axis indices.
    ///
    /// `row_axes` followed by `col_axes` must list every axis exactly once.
    /// Either list may be empty (giving a single row or column).
    pub fn matricize(
        &self,
        row_axes: &[usize],
        col_axes: &[usize],
    ) -> Result<Matrix, TensorError> {
        let d = self.shape.order();
        let mut seen = vec![false; d];
        for &a in row_axes.iter().chain(col_axes) {
            if a < 1 || a > d || seen[a - 1] {
                return Err(TensorError::NotAPartition { order: d });
            }
            seen[a - 1] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(TensorError::NotAPartition { order: d });
        }

        let dims = self.shape.dims();
        let strides = self.shape.strides();
        let rows: usize = row_axes.iter().map(|&a| dims[a - 1]).product();
        let cols: usize = col_axes.iter().map(|&a| dims[a - 1]).product();

        let mut out = vec![0.0; rows * cols];
        // Odometer over (row_axes, col_axes) in lexicographic order; the
        // source offset is tracked incrementally through the axis strides.
        let axes: Vec<usize> = row_axes.iter().chain(col_axes).copied().collect();
        let mut counters = vec![0usize; d];
        let mut src = 0usize;
        for slot in out.iter_mut() {
            *slot = self.values[src];
            for pos in (0..d).rev() {
                let a = axes[pos] - 1;
                counters[pos] += 1;
                src += strides[a];
                if counters[pos] < dims[a] {
                    break;
                }
                counters[pos] = 0;
                src -= strides[a] * dims[a];
            }
        }
        Matrix::new(rows, cols, out).map_err(|_| TensorError::NotAPartition { order: d })
    }
}

/// Row stacking form `V_r(M)`: rows concatenated top to bottom into one
/// column vector.
pub fn row_stack(m: &Matrix) -> Vec<f64> {
    m.values().to_vec()
}
