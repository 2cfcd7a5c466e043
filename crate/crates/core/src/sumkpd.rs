//! Greedy finite-sum KPD by residual deflation: repeatedly subtract the
//! nearest Kronecker product of the current residual.
//!
//! Each accepted term strictly shrinks the residual norm, so the telescoping
//! identity `V = sum of terms + final residual` holds by construction. The
//! greedy sum is not guaranteed minimal in term count.

use thiserror::Error;

use crate::sva::{nkp_multistart, FactorTerm, SvaConfig, SvaError};
use crate::tensor::Shape;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumError {
    #[error("input vector is zero")]
    ZeroInput,
    #[error("vector length {got} does not match shape total {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Solver(SvaError),
}

/// Termination status of a greedy run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumStatus {
    /// Residual norm fell below `eps_sum`.
    Converged,
    /// Term cap reached with residual still above `eps_sum`.
    MaxTerms,
    /// The solver stopped making progress (zero stationary point or a term
    /// that did not shrink the residual); the partial sum is returned.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumConfig {
    /// Stop once the residual Frobenius norm drops below this.
    pub eps_sum: f64,
    pub max_terms: usize,
    /// Config for each inner nearest-Kronecker-product solve. The inner seed
    /// is re-derived per term so that every deflation step draws fresh,
    /// reproducible restarts.
    pub inner: SvaConfig,
}

impl Default for SumConfig {
    fn default() -> Self {
        Self {
            eps_sum: 1e-8,
            max_terms: 32,
            inner: SvaConfig::default(),
        }
    }
}

/// A greedy finite-sum decomposition with its per-step residual trail.
#[derive(Debug, Clone, PartialEq)]
pub struct KpdSum {
    pub shape: Shape,
    pub terms: Vec<FactorTerm>,
    /// `||V_k||_F` after subtracting term `k`; same length as `terms`.
    pub residual_norms: Vec<f64>,
    pub final_residual: Vec<f64>,
    pub status: SumStatus,
}

fn step_seed(root: u64, term: u64) -> u64 {
    let mut z = root ^ (term.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

/// Deflates `v` greedily: term `k` is the multi-start NKP of residual
/// `V_{k-1}`, and `V_k = V_{k-1} - term_k`.
pub fn greedy_sum(v: &[f64], shape: &Shape, cfg: &SumConfig) -> Result<KpdSum, SumError> {
    if v.len() != shape.total() {
        return Err(SumError::LengthMismatch {
            expected: shape.total(),
            got: v.len(),
        });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(SumError::ZeroInput);
    }
    if cfg.max_terms == 0 {
        return Err(SumError::Solver(SvaError::InvalidConfig(
            "max_terms must be >= 1",
        )));
    }

    let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut residual = v.to_vec();
    let mut residual_norm = norm(&residual);
    let mut terms = Vec::new();
    let mut residual_norms = Vec::new();
    let mut status = SumStatus::MaxTerms;

    for k in 0..cfg.max_terms {
        let mut inner = cfg.inner.clone();
        inner.seed = step_seed(cfg.inner.seed, k as u64);
        let solved = match nkp_multistart(&residual, shape, &inner) {
            Ok((sol, _)) => sol,
            Err(
                SvaError::ZeroStationaryPoint { .. } | SvaError::AllRestartsFailed { .. },
            ) => {
                status = SumStatus::Stalled;
                break;
            }
            Err(e) => return Err(SumError::Solver(e)),
        };
        // NaN-safe: anything but a strict improvement over the zero term
        // counts as a stall.
        let improved = solved.error < residual_norm;
        if !improved {
            status = SumStatus::Stalled;
            break;
        }
        let recon = solved.factors.reconstruct();
        for (r, t) in residual.iter_mut().zip(&recon) {
            *r -= t;
        }
        residual_norm = norm(&residual);
        terms.push(solved.factors);
        residual_norms.push(residual_norm);
        if residual_norm < cfg.eps_sum {
            status = SumStatus::Converged;
            break;
        }
    }

    Ok(KpdSum {
        shape: shape.clone(),
        terms,
        residual_norms,
        final_residual: residual,
        status,
    })
}
