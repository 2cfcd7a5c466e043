//! Monic decomposition: the exact vector-form KPD test.
//!
//! A nonzero hypermatrix is exactly decomposable into a single Kronecker
//! product of factor vectors if and only if dividing out its head value and
//! slicing along each axis through the head position recovers factors whose
//! product reproduces it. The factors obtained this way are monic (head value
//! exactly 1), which fixes the scalar gauge freedom of the decomposition.

use thiserror::Error;

use crate::stp::kron_factors;
use crate::tensor::{head, head_factors, Hypermatrix, Shape, TensorError};

/// Relative residual below which an input counts as exactly decomposable.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MdaError {
    #[error("zero hypermatrix has no monic decomposition")]
    ZeroInput,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// A monic rank-one factorization `V = scale * x_1 (x) ... (x) x_d` where
/// every factor has head value exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicFactors {
    pub scale: f64,
    pub factors: Vec<Vec<f64>>,
}

/// Outcome of the exactness test. The candidate factors and the residual are
/// reported even when the input is not decomposable, so callers can tell
/// near-decomposable inputs from far ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub decomposable: bool,
    pub residual: f64,
    pub factors: MonicFactors,
}

/// Applies the head projector for axis `s`: the length `n_s` slice of `v0`
/// along axis `s` with every other axis frozen at its head index `e_r`.
///
/// Implemented as a strided gather; equals the dense projector product
/// `(d_{e_1}^T (x) ... (x) I_{n_s} (x) ... (x) d_{e_d}^T) v0`.
pub fn projector_extract(
    v0: &[f64],
    shape: &Shape,
    e: &[usize],
    s: usize,
) -> Result<Vec<f64>, MdaError> {
    let d = shape.order();
    if s < 1 || s > d {
        return Err(TensorError::AxisOutOfRange { axis: s, order: d }.into());
    }
    if v0.len() != shape.total() {
        return Err(TensorError::ValueCountMismatch {
            expected: shape.total(),
            got: v0.len(),
        }
        .into());
    }
    // Base offset with axis s at index 1; validates e along the way.
    let mut frozen = e.to_vec();
    if frozen.len() != d {
        return Err(TensorError::OrderMismatch {
            expected: d,
            got: frozen.len(),
        }
        .into());
    }
    frozen[s - 1] = 1;
    let base = shape.linear_index(&frozen)? - 1;
    let stride = shape.strides()[s - 1];
    let n_s = shape.dims()[s - 1];
    Ok((0..n_s).map(|j| v0[base + j * stride]).collect())
}

/// Runs the monic exact-decomposition test at relative tolerance `tol`.
pub fn exact_decompose(h: &Hypermatrix, tol: f64) -> Result<ExactnessReport, MdaError> {
    let v = h.vectorize();
    let info = head(v).map_err(|_| MdaError::ZeroInput)?;
    let scale = info.value;
    let shape = h.shape();
    let e = head_factors(shape, info.position)?;

    let v0: Vec<f64> = v.iter().map(|x| x / scale).collect();
    let factors: Vec<Vec<f64>> = (1..=shape.order())
        .map(|s| projector_extract(&v0, shape, &e, s))
        .collect::<Result<_, _>>()?;

    let recon = kron_factors(&factors);
    let mut residual_sq = 0.0;
    for (a, r) in v.iter().zip(&recon) {
        let diff = a - scale * r;
        residual_sq += diff * diff;
    }
    let residual = residual_sq.sqrt();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();

    Ok(ExactnessReport {
        decomposable: residual <= tol * norm,
        residual,
        factors: MonicFactors { scale, factors },
    })
}

/// `scale * x_1 (x) ... (x) x_d`.
pub fn reconstruct(f: &MonicFactors) -> Vec<f64> {
    kron_factors(&f.factors)
        .into_iter()
        .map(|x| f.scale * x)
        .collect()
}
