//! Nearest Kronecker product by cyclic alternating updates.
//!
//! Minimizing `||V - x_1 (x) ... (x) x_d||_F` over one factor with the others
//! fixed is an unconstrained linear least-squares problem whose solution is a
//! scaled contraction of `V` against the fixed factors. Sweeping the factors
//! cyclically (Gauss-Seidel: each update sees the factors already refreshed in
//! the current sweep) drives the residual monotonically down to a stationary
//! value. Stationary values other than the global one exist, so the solver
//! runs many independently seeded restarts and keeps the best, optionally
//! reporting the whole histogram of stationary values encountered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::stp::kron_factors;
use crate::tensor::Shape;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SvaError {
    #[error("input vector is zero")]
    ZeroInput,
    #[error("vector length {got} does not match shape total {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("axis {axis} out of range [1, {order}]")]
    AxisOutOfRange { axis: usize, order: usize },
    #[error("factor {axis} is zero; the update for the remaining axes is degenerate")]
    DegenerateFactor { axis: usize },
    #[error("only zero stationary points found after {resamples} resamples")]
    ZeroStationaryPoint { resamples: usize },
    #[error("all {restarts} restarts failed")]
    AllRestartsFailed { restarts: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
}

/// Initialization menu for the random starting factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Entries uniform on `[0, 1)`.
    UnitInterval,
    /// Entries uniform on `[-0.5, 0.5)`.
    Centered,
}

/// Solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SvaConfig {
    /// Stop when successive reconstructions differ by less than this in
    /// Frobenius norm.
    pub eps: f64,
    /// Hard cap on sweeps; hitting it yields `converged = false`.
    pub max_sweeps: usize,
    /// Independent random restarts for the multi-start search.
    pub restarts: usize,
    /// Root seed; each restart derives its own stream, so changing the
    /// restart count never perturbs earlier restarts.
    pub seed: u64,
    pub init: InitKind,
    /// Stationary errors within this distance of each other land in the same
    /// histogram cluster.
    pub cluster_tol: f64,
}

impl Default for SvaConfig {
    fn default() -> Self {
        Self {
            eps: 1e-8,
            max_sweeps: 10_000,
            restarts: 64,
            seed: 0,
            init: InitKind::UnitInterval,
            cluster_tol: 1e-2,
        }
    }
}

impl SvaConfig {
    pub fn validate(&self) -> Result<(), SvaError> {
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(SvaError::InvalidConfig("eps must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(SvaError::InvalidConfig("max_sweeps must be >= 1"));
        }
        if self.restarts == 0 {
            return Err(SvaError::InvalidConfig("restarts must be >= 1"));
        }
        if self.cluster_tol.is_nan() || self.cluster_tol < 0.0 {
            return Err(SvaError::InvalidConfig("cluster_tol must be >= 0"));
        }
        Ok(())
    }
}

/// One rank-one term: an ordered factor list with a scalar coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTerm {
    pub factors: Vec<Vec<f64>>,
    pub coefficient: f64,
}

impl FactorTerm {
    pub fn new(factors: Vec<Vec<f64>>) -> Self {
        Self {
            factors,
            coefficient: 1.0,
        }
    }

    /// `coefficient * x_1 (x) ... (x) x_d`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut v = kron_factors(&self.factors);
        if self.coefficient != 1.0 {
            for x in &mut v {
                *x *= self.coefficient;
            }
        }
        v
    }
}

/// A single solver run: the factor tuple reached, its residual, and how it
/// got there.
#[derive(Debug, Clone, PartialEq)]
pub struct NkpSolution {
    pub factors: FactorTerm,
    /// `||V - (x) x_s||_F` at the returned factors.
    pub error: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// One stationary value with its basin count across restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCluster {
    /// Smallest error in the cluster.
    pub error: f64,
    pub hits: usize,
    /// Factors of the best restart that landed in this cluster.
    pub representative: FactorTerm,
}

/// Stationary values seen across all restarts, ascending by error.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryHistogram {
    pub clusters: Vec<StationaryCluster>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_input(v: &[f64], shape: &Shape) -> Result<(), SvaError> {
    if v.len() != shape.total() {
        return Err(SvaError::LengthMismatch {
            expected: shape.total(),
            got: v.len(),
        });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(SvaError::ZeroInput);
    }
    Ok(())
}

/// The exact single-factor least-squares update: with every factor except
/// axis `s` held fixed, returns the minimizer
/// `x_s = (1/prod_{i != s} ||x_i||^2) * [contraction of V against the fixed
/// factors along every axis but s]`.
///
/// The contraction is a direct pass over `V`; no dense update matrix is
/// formed.
pub fn als_update(
    v: &[f64],
    shape: &Shape,
    factors: &[Vec<f64>],
    s: usize,
) -> Result<Vec<f64>, SvaError> {
    let d = shape.order();
    if s < 1 || s > d {
        return Err(SvaError::AxisOutOfRange { axis: s, order: d });
    }
    if v.len() != shape.total() || factors.len() != d {
        return Err(SvaError::LengthMismatch {
            expected: shape.total(),
            got: v.len(),
        });
    }
    let dims = shape.dims();
    for (i, (f, &n)) in factors.iter().zip(dims).enumerate() {
        if f.len() != n {
            return Err(SvaError::LengthMismatch {
                expected: n,
                got: f.len(),
            });
        }
        let _ = i;
    }

    let mut denom = 1.0;
    for (i, f) in factors.iter().enumerate() {
        if i + 1 == s {
            continue;
        }
        let nsq: f64 = f.iter().map(|x| x * x).sum();
        if nsq == 0.0 {
            return Err(SvaError::DegenerateFactor { axis: i + 1 });
        }
        denom *= nsq;
    }

    let s0 = s - 1;
    let mut acc = vec![0.0; dims[s0]];
    let mut mi = vec![0usize; d];
    for &val in v {
        if val != 0.0 {
            let mut w = val;
            for (i, f) in factors.iter().enumerate() {
                if i != s0 {
                    w *= f[mi[i]];
                }
            }
            acc[mi[s0]] += w;
        }
        for i in (0..d).rev() {
            mi[i] += 1;
            if mi[i] < dims[i] {
                break;
            }
            mi[i] = 0;
        }
    }
    for x in &mut acc {
        *x /= denom;
    }
    Ok(acc)
}

/// Moves the scale freedom into the last factor: every earlier factor is
/// scaled to unit norm with a positive leading nonzero entry. The
/// reconstruction is unchanged; the unconstrained scale gauge would otherwise
/// let factor magnitudes drift arbitrarily across sweeps.
fn gauge_normalize(factors: &mut [Vec<f64>]) -> Result<(), SvaError> {
    let d = factors.len();
    for s in 0..d - 1 {
        let norm = l2(&factors[s]);
        if norm == 0.0 {
            return Err(SvaError::DegenerateFactor { axis: s + 1 });
        }
        let lead = factors[s]
            .iter()
            .find(|&&x| x != 0.0)
            .copied()
            .unwrap_or(1.0);
        let c = if lead < 0.0 { -norm } else { norm };
        for x in &mut factors[s] {
            *x /= c;
        }
        for x in &mut factors[d - 1] {
            *x *= c;
        }
    }
    Ok(())
}

fn random_factors<R: Rng + ?Sized>(shape: &Shape, init: InitKind, rng: &mut R) -> Vec<Vec<f64>> {
    shape
        .dims()
        .iter()
        .map(|&n| {
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    match init {
                        InitKind::UnitInterval => u,
                        InitKind::Centered => u - 0.5,
                    }
                })
                .collect()
        })
        .collect()
}

const MAX_RESAMPLES: usize = 10;

/// Runs one alternating solve from a random start drawn from `rng`.
///
/// Sweeps stop when successive reconstructions differ by less than `cfg.eps`
/// or `cfg.max_sweeps` is reached. A degenerate sweep (some factor collapses
/// to zero, so the next update would divide by zero) resamples the start from
/// the same stream; persistent degeneracy reports a zero stationary point.
pub fn nkp<R: Rng + ?Sized>(
    v: &[f64],
    shape: &Shape,
    cfg: &SvaConfig,
    rng: &mut R,
) -> Result<NkpSolution, SvaError> {
    cfg.validate()?;
    check_input(v, shape)?;
    let d = shape.order();

    for _ in 0..=MAX_RESAMPLES {
        let mut factors = random_factors(shape, cfg.init, rng);
        let mut prev = kron_factors(&factors);
        let mut outcome: Option<(usize, bool)> = None;
        'sweeps: for sweep in 1..=cfg.max_sweeps {
            for s in 1..=d {
                match als_update(v, shape, &factors, s) {
                    Ok(x) => factors[s - 1] = x,
                    Err(SvaError::DegenerateFactor { .. }) => break 'sweeps,
                    Err(e) => return Err(e),
                }
            }
            if gauge_normalize(&mut factors).is_err() {
                break 'sweeps;
            }
            let recon = kron_factors(&factors);
            let delta = l2_diff(&recon, &prev);
            prev = recon;
            if delta < cfg.eps {
                outcome = Some((sweep, true));
                break;
            }
            if sweep == cfg.max_sweeps {
                outcome = Some((sweep, false));
            }
        }
        if let Some((sweeps, converged)) = outcome {
            let error = l2_diff(v, &prev);
            return Ok(NkpSolution {
                factors: FactorTerm::new(factors),
                error,
                sweeps,
                converged,
            });
        }
        // Degenerate run: resample and try again.
    }
    Err(SvaError::ZeroStationaryPoint {
        resamples: MAX_RESAMPLES,
    })
}

/// SplitMix64 over the root seed, one step per restart index. Streams are
/// a pure function of `(root, restart)`.
fn restart_seed(root: u64, restart: u64) -> u64 {
    let mut z = root.wrapping_add((restart + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `cfg.restarts` independent solves and returns the best solution plus
/// the clustered histogram of stationary errors.
///
/// Restarts execute in parallel; the merge is order-independent (minimum
/// error, ties to the lower restart index), so results are identical for any
/// thread count.
pub fn nkp_multistart(
    v: &[f64],
    shape: &Shape,
    cfg: &SvaConfig,
) -> Result<(NkpSolution, StationaryHistogram), SvaError> {
    cfg.validate()?;
    check_input(v, shape)?;

    let runs: Vec<Result<NkpSolution, SvaError>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, i as u64));
            nkp(v, shape, cfg, &mut rng)
        })
        .collect();

    let mut solutions: Vec<(usize, NkpSolution)> = Vec::with_capacity(cfg.restarts);
    for (i, run) in runs.into_iter().enumerate() {
        if let Ok(sol) = run {
            solutions.push((i, sol));
        }
    }
    if solutions.is_empty() {
        return Err(SvaError::AllRestartsFailed {
            restarts: cfg.restarts,
        });
    }

    let best = solutions
        .iter()
        .min_by(|(ia, a), (ib, b)| {
            a.error
                .partial_cmp(&b.error)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ia.cmp(ib))
        })
        .expect("solutions is nonempty")
        .1
        .clone();

    // Single-linkage clustering of the sorted errors: a gap wider than
    // cluster_tol starts a new cluster.
    solutions.sort_by(|(ia, a), (ib, b)| {
        a.error
            .partial_cmp(&b.error)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });
    let mut clusters: Vec<StationaryCluster> = Vec::new();
    let mut prev_error = f64::NEG_INFINITY;
    for (_, sol) in solutions {
        match clusters.last_mut() {
            Some(cluster) if sol.error - prev_error <= cfg.cluster_tol => {
                cluster.hits += 1;
            }
            _ => clusters.push(StationaryCluster {
                error: sol.error,
                hits: 1,
                representative: sol.factors.clone(),
            }),
        }
        prev_error = sol.error;
    }

    Ok((best, StationaryHistogram { clusters }))
}

/// The best rank-one approximation reached by the oracle, with the singular
/// value absorbed into `left` so that `M ~ left * right^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneApprox {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `||M - left * right^T||_F`.
    pub residual: f64,
    pub converged: bool,
}

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.values()
        .chunks(m.cols())
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_t_vec(m: &Matrix, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for (row, &ui) in m.values().chunks(m.cols()).zip(u) {
        for (o, &x) in out.iter_mut().zip(row) {
            *o += x * ui;
        }
    }
    out
}

/// Independent ground truth for the two-factor case: power iteration on
/// `M^T M` for the dominant singular pair. Each of a handful of fixed start
/// vectors is iterated to `tol` (relative change of the singular-value
/// estimate); a stalled start (iterate annihilated by `M`) simply falls
/// through to the next one, and the largest estimate wins.
pub fn rank_one_oracle(m: &Matrix, iters: usize, tol: f64) -> Result<RankOneApprox, SvaError> {
    if m.frobenius_norm() == 0.0 {
        return Err(SvaError::ZeroInput);
    }
    let n = m.cols();

    let starts: [fn(usize) -> f64; 3] = [
        |_| 1.0,
        |j| if j % 2 == 0 { 1.0 } else { -1.0 },
        |j| ((j * 2654435761 + 104729) % 1000) as f64 / 1000.0 - 0.5,
    ];

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut any_converged = false;
    for start in starts {
        let mut v: Vec<f64> = (0..n).map(start).collect();
        let norm0 = l2(&v);
        if norm0 == 0.0 {
            continue;
        }
        for x in &mut v {
            *x /= norm0;
        }

        let mut sigma_prev = 0.0;
        let mut converged = false;
        for _ in 0..iters {
            let u = mat_vec(m, &v);
            let su = l2(&u);
            if su == 0.0 {
                break; // stalled: v is in the null space
            }
            let uhat: Vec<f64> = u.iter().map(|x| x / su).collect();
            let w = mat_t_vec(m, &uhat);
            let sigma = l2(&w);
            if sigma == 0.0 {
                break;
            }
            v = w.iter().map(|x| x / sigma).collect();
            if (sigma - sigma_prev).abs() <= tol * sigma.max(1.0) {
                converged = true;
                break;
            }
            sigma_prev = sigma;
        }

        let left = mat_vec(m, &v);
        let sigma = l2(&left);
        if sigma == 0.0 {
            continue;
        }
        any_converged |= converged;
        if best.as_ref().is_none_or(|(s, _, _)| sigma > *s) {
            best = Some((sigma, left, v));
        }
    }

    let (_, left, right) = best.ok_or(SvaError::ZeroInput)?;
    let mut residual_sq = 0.0;
    for (row, &li) in m.values().chunks(m.cols()).zip(&left) {
        for (&entry, &rj) in row.iter().zip(&right) {
            let diff = entry - li * rj;
            residual_sq += diff * diff;
        }
    }
    Ok(RankOneApprox {
        left,
        right,
        residual: residual_sq.sqrt(),
        converged: any_converged,
    })
}
