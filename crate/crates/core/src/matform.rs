//! Matrix-form KPD via the vector-form solvers.
//!
//! A matrix `A` whose rows factor as `m_1 x ... x m_r` and columns as
//! `n_1 x ... x n_r` decomposes as `A_1 (x) ... (x) A_r` exactly when its
//! row-stacked vector, re-ordered so that row axis `s` sits next to column
//! axis `s`, decomposes as a vector with respect to the merged shape
//! `(m_1 n_1, ..., m_r n_r)`. That re-ordering is a pure permutation of
//! positions, so norms and residuals transfer unchanged between the two
//! pictures.

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::stp::{kron, perm_map, Permutation, StpError};
use crate::sumkpd::{greedy_sum, SumConfig, SumError, SumStatus};
use crate::sva::FactorTerm;
use crate::tensor::{row_stack, Shape, TensorError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatFormError {
    #[error("row_dims product {got} does not match matrix rows {expected}")]
    RowProductMismatch { expected: usize, got: usize },
    #[error("col_dims product {got} does not match matrix cols {expected}")]
    ColProductMismatch { expected: usize, got: usize },
    #[error("row_dims has {rows} factors but col_dims has {cols}")]
    FactorCountMismatch { rows: usize, cols: usize },
    #[error("factor dimension lists must be nonempty")]
    EmptyDims,
    #[error("factor {index} has length {got}, expected {expected}")]
    FactorLengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("factor {index} is {rows}x{cols}, expected 2x2")]
    NotTwoByTwo {
        index: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Stp(#[from] StpError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sum(#[from] SumError),
}

/// A matrix together with the row/column factorizations that define the
/// sought Kronecker structure. A dummy factor of 1 may pad either list.
#[derive(Debug, Clone, PartialEq)]
pub struct MatKpdProblem {
    pub matrix: Matrix,
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
}

impl MatKpdProblem {
    pub fn new(
        matrix: Matrix,
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
    ) -> Result<Self, MatFormError> {
        if row_dims.is_empty() || col_dims.is_empty() {
            return Err(MatFormError::EmptyDims);
        }
        if row_dims.len() != col_dims.len() {
            return Err(MatFormError::FactorCountMismatch {
                rows: row_dims.len(),
                cols: col_dims.len(),
            });
        }
        let rp: usize = row_dims.iter().product();
        if rp != matrix.rows() {
            return Err(MatFormError::RowProductMismatch {
                expected: matrix.rows(),
                got: rp,
            });
        }
        let cp: usize = col_dims.iter().product();
        if cp != matrix.cols() {
            return Err(MatFormError::ColProductMismatch {
                expected: matrix.cols(),
                got: cp,
            });
        }
        Ok(Self {
            matrix,
            row_dims,
            col_dims,
        })
    }

    pub fn factor_count(&self) -> usize {
        self.row_dims.len()
    }
}

/// One term of a matrix-form sum: `coefficient * M_1 (x) ... (x) M_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatFactorTerm {
    pub matrices: Vec<Matrix>,
    pub coefficient: f64,
}

impl MatFactorTerm {
    pub fn reconstruct(&self) -> Matrix {
        let mut out = Matrix::identity(1);
        for m in &self.matrices {
            out = kron(&out, m);
        }
        out.scale(self.coefficient)
    }
}

/// The interleaving `(1, 2, ..., 2r) -> (1, r+1, 2, r+2, ..., r, 2r)` that
/// moves column axis `r+s` next to row axis `s`, so the permuted row-stacked
/// vector of `A_1 (x) ... (x) A_r` is exactly
/// `V_r(A_1) (x) ... (x) V_r(A_r)`.
pub fn pairing_permutation(
    row_dims: &[usize],
    col_dims: &[usize],
) -> Result<Permutation, MatFormError> {
    if row_dims.len() != col_dims.len() {
        return Err(MatFormError::FactorCountMismatch {
            rows: row_dims.len(),
            cols: col_dims.len(),
        });
    }
    let r = row_dims.len();
    let mut images = Vec::with_capacity(2 * r);
    for s in 1..=r {
        images.push(s);
        images.push(r + s);
    }
    Ok(Permutation::new(images).expect("the interleave is a bijection"))
}

/// Permutes the row-stacked matrix into vector form: returns the re-ordered
/// vector and the merged component shape `(m_1 n_1, ..., m_r n_r)`. `A` is
/// matrix-form decomposable exactly when this output is vector-form
/// decomposable with respect to the merged shape.
pub fn mat_to_vec(problem: &MatKpdProblem) -> Result<(Vec<f64>, Shape), MatFormError> {
    let full_dims: Vec<usize> = problem
        .row_dims
        .iter()
        .chain(&problem.col_dims)
        .copied()
        .collect();
    let full_shape = Shape::new(full_dims)?;
    let sigma = pairing_permutation(&problem.row_dims, &problem.col_dims)?;
    let map = perm_map(&full_shape, &sigma)?;
    let permuted = map.apply(&row_stack(&problem.matrix))?;

    let merged_dims: Vec<usize> = problem
        .row_dims
        .iter()
        .zip(&problem.col_dims)
        .map(|(m, n)| m * n)
        .collect();
    Ok((permuted, Shape::new(merged_dims)?))
}

/// Reshapes the vector-form factors back to matrices: factor `s` (length
/// `m_s * n_s`, column index fastest) becomes the `m_s x n_s` matrix `A_s`.
pub fn vec_factors_to_matrices(
    term: &FactorTerm,
    row_dims: &[usize],
    col_dims: &[usize],
) -> Result<MatFactorTerm, MatFormError> {
    if row_dims.len() != col_dims.len() {
        return Err(MatFormError::FactorCountMismatch {
            rows: row_dims.len(),
            cols: col_dims.len(),
        });
    }
    if term.factors.len() != row_dims.len() {
        return Err(MatFormError::FactorCountMismatch {
            rows: row_dims.len(),
            cols: term.factors.len(),
        });
    }
    let mut matrices = Vec::with_capacity(term.factors.len());
    for (idx, ((f, &m), &n)) in term
        .factors
        .iter()
        .zip(row_dims)
        .zip(col_dims)
        .enumerate()
    {
        if f.len() != m * n {
            return Err(MatFormError::FactorLengthMismatch {
                index: idx + 1,
                expected: m * n,
                got: f.len(),
            });
        }
        matrices.push(Matrix::new(m, n, f.clone())?);
    }
    Ok(MatFactorTerm {
        matrices,
        coefficient: term.coefficient,
    })
}

/// A matrix-form greedy sum with residuals reported in both conventions:
/// plain Frobenius norms and their squares.
#[derive(Debug, Clone, PartialEq)]
pub struct MatKpdReport {
    pub terms: Vec<MatFactorTerm>,
    pub residual_norms: Vec<f64>,
    pub residual_squares: Vec<f64>,
    pub status: SumStatus,
}

/// Greedy finite-sum KPD of the matrix: permute to vector form, deflate
/// there, and map each term's factors back to matrices.
pub fn mat_sum_kpd(
    problem: &MatKpdProblem,
    cfg: &SumConfig,
) -> Result<MatKpdReport, MatFormError> {
    let (v, merged) = mat_to_vec(problem)?;
    let sum = greedy_sum(&v, &merged, cfg)?;
    let terms = sum
        .terms
        .iter()
        .map(|t| vec_factors_to_matrices(t, &problem.row_dims, &problem.col_dims))
        .collect::<Result<Vec<_>, _>>()?;
    let residual_squares = sum.residual_norms.iter().map(|n| n * n).collect();
    Ok(MatKpdReport {
        terms,
        residual_norms: sum.residual_norms,
        residual_squares,
        status: sum.status,
    })
}

/// Relative threshold under which the leading entry counts as zero and a
/// residual split pair counts as absent.
const SPLIT_TOL: f64 = 1e-12;

/// A rank-one pair `(column, row)` whose outer product is one summand of a
/// 2x2 split.
pub type SplitPair = (Vec<f64>, Vec<f64>);

/// Splits a 2x2 matrix into one or two outer products
/// `column * row`, exactly reproducing it. The second pair is omitted when
/// its contribution is negligible against `||M||_F`, so rank-one inputs
/// yield a single pair.
pub fn split_2x2(m: &Matrix) -> Result<Vec<SplitPair>, MatFormError> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(MatFormError::NotTwoByTwo {
            index: 1,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let scale = m.frobenius_norm();
    let mut pairs = Vec::with_capacity(2);
    if a.abs() > SPLIT_TOL * scale {
        pairs.push((vec![1.0, c / a], vec![a, b]));
        let leftover = d - c * b / a;
        if leftover.abs() > SPLIT_TOL * scale {
            pairs.push((vec![0.0, 1.0], vec![0.0, leftover]));
        }
    } else if b != 0.0 {
        pairs.push((vec![1.0, d / b], vec![0.0, b]));
        if c.abs() > SPLIT_TOL * scale {
            pairs.push((vec![0.0, 1.0], vec![c, 0.0]));
        }
    } else {
        pairs.push((vec![0.0, 1.0], vec![c, d]));
    }
    Ok(pairs)
}

/// Replaces every 2x2 factor by its rank split and distributes the Kronecker
/// products: each input term becomes the cross product of its factors'
/// splits, yielding terms whose factors alternate 2x1 columns and 1x2 rows.
/// The summed reconstruction is preserved.
pub fn expand_by_splits(terms: &[MatFactorTerm]) -> Result<Vec<MatFactorTerm>, MatFormError> {
    let mut out = Vec::new();
    for term in terms {
        let mut splits = Vec::with_capacity(term.matrices.len());
        for (idx, m) in term.matrices.iter().enumerate() {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(MatFormError::NotTwoByTwo {
                    index: idx + 1,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            splits.push(split_2x2(m)?);
        }
        // Odometer over the split choices of every factor.
        let mut choice = vec![0usize; splits.len()];
        loop {
            let mut matrices = Vec::with_capacity(2 * splits.len());
            for (s, pick) in splits.iter().zip(&choice) {
                let (u, v) = &s[*pick];
                matrices.push(Matrix::column(u));
                matrices.push(Matrix::row(v));
            }
            out.push(MatFactorTerm {
                matrices,
                coefficient: term.coefficient,
            });
            let mut carry = true;
            for (c, s) in choice.iter_mut().zip(&splits).rev() {
                *c += 1;
                if *c < s.len() {
                    carry = false;
                    break;
                }
                *c = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mda::{exact_decompose, DEFAULT_TOL};
    use crate::stp::kron_factors;
    use crate::sva::SvaConfig;
    use crate::tensor::Hypermatrix;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
        let values = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::new(rows, cols, values).unwrap()
    }

    #[test]
    fn pairing_permutation_interleaves() {
        let p = pairing_permutation(&[4], &[4]).unwrap();
        assert_eq!(p.images(), &[1, 2]);
        let p = pairing_permutation(&[4, 4], &[4, 4]).unwrap();
        assert_eq!(p.images(), &[1, 3, 2, 4]);
        let p = pairing_permutation(&[2, 2, 2, 2], &[2, 2, 2, 2]).unwrap();
        assert_eq!(p.images(), &[1, 5, 2, 6, 3, 7, 4, 8]);
        // Axes 1 and 8 are fixed; the inner six axes, relabelled to 1..6,
        // form the (4,1,5,2,6,3) block.
        let inner: Vec<usize> = p.images()[1..7].iter().map(|&i| i - 1).collect();
        assert_eq!(inner, vec![4, 1, 5, 2, 6, 3]);
        assert!(pairing_permutation(&[2, 2], &[2]).is_err());
    }

    #[test]
    fn mat_to_vec_turns_kron_factors_into_a_hypervector() {
        let mut rng = StdRng::seed_from_u64(40);
        let a1 = random_matrix(&mut rng, 2, 3);
        let a2 = random_matrix(&mut rng, 4, 2);
        let a = kron(&a1, &a2);
        let problem = MatKpdProblem::new(a, vec![2, 4], vec![3, 2]).unwrap();
        let (v, merged) = mat_to_vec(&problem).unwrap();
        assert_eq!(merged.dims(), &[6, 8]);
        let expected = kron_factors(&[row_stack(&a1), row_stack(&a2)]);
        let err = v
            .iter()
            .zip(&expected)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-15, "max deviation {err}");
    }

    #[test]
    fn mat_to_vec_is_identity_for_one_factor() {
        let mut rng = StdRng::seed_from_u64(41);
        let a = random_matrix(&mut rng, 3, 4);
        let problem = MatKpdProblem::new(a.clone(), vec![3], vec![4]).unwrap();
        let (v, merged) = mat_to_vec(&problem).unwrap();
        assert_eq!(v, row_stack(&a));
        assert_eq!(merged.dims(), &[12]);
    }

    #[test]
    fn mat_to_vec_preserves_the_norm_exactly() {
        let mut rng = StdRng::seed_from_u64(42);
        let a = random_matrix(&mut rng, 4, 4);
        let problem = MatKpdProblem::new(a.clone(), vec![2, 2], vec![2, 2]).unwrap();
        let (v, _) = mat_to_vec(&problem).unwrap();
        // Pure reorder of entries: exact norm preservation via multiset
        // equality of the raw bits.
        let bits = |u: &[f64]| {
            let mut b: Vec<u64> = u.iter().map(|x| x.to_bits()).collect();
            b.sort_unstable();
            b
        };
        assert_eq!(bits(&v), bits(a.values()));
    }

    #[test]
    fn exactness_transfers_through_the_bridge() {
        let mut rng = StdRng::seed_from_u64(43);
        let a1 = random_matrix(&mut rng, 2, 2);
        let a2 = random_matrix(&mut rng, 3, 2);
        let a = kron(&a1, &a2);
        let problem = MatKpdProblem::new(a, vec![2, 3], vec![2, 2]).unwrap();
        let (v, merged) = mat_to_vec(&problem).unwrap();
        let h = Hypermatrix::new(merged, v).unwrap();
        let report = exact_decompose(&h, DEFAULT_TOL).unwrap();
        assert!(report.decomposable);

        // Recovered matrices match the originals up to scalars with product 1.
        let term = FactorTerm {
            factors: report.factors.factors.clone(),
            coefficient: report.factors.scale,
        };
        let back = vec_factors_to_matrices(&term, &[2, 3], &[2, 2]).unwrap();
        let recon = back.reconstruct();
        let kron_orig = kron(&a1, &a2);
        for (x, y) in recon.values().iter().zip(kron_orig.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn factor_reshape_is_row_major() {
        let term = FactorTerm::new(vec![vec![1.0, 2.0, 3.0, 4.0]]);
        let back = vec_factors_to_matrices(&term, &[2], &[2]).unwrap();
        assert_eq!(back.matrices[0].values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(back.matrices[0].get(1, 0), 3.0);
        assert!(vec_factors_to_matrices(&term, &[3], &[2]).is_err());
    }

    #[test]
    fn problem_validation() {
        let m = Matrix::zeros(4, 4);
        assert!(matches!(
            MatKpdProblem::new(m.clone(), vec![3], vec![4]),
            Err(MatFormError::RowProductMismatch { .. })
        ));
        assert!(matches!(
            MatKpdProblem::new(m.clone(), vec![4], vec![5]),
            Err(MatFormError::ColProductMismatch { .. })
        ));
        assert!(MatKpdProblem::new(m, vec![2, 2, 1], vec![2, 2, 1]).is_ok());
    }

    #[test]
    fn single_kron_product_needs_one_term() {
        let mut rng = StdRng::seed_from_u64(44);
        let a1 = random_matrix(&mut rng, 2, 2);
        let a2 = random_matrix(&mut rng, 2, 2);
        let a = kron(&a1, &a2);
        let problem = MatKpdProblem::new(a.clone(), vec![2, 2], vec![2, 2]).unwrap();
        let cfg = SumConfig {
            inner: SvaConfig {
                restarts: 8,
                eps: 1e-12,
                seed: 9,
                ..SvaConfig::default()
            },
            ..SumConfig::default()
        };
        let report = mat_sum_kpd(&problem, &cfg).unwrap();
        assert_eq!(report.terms.len(), 1);
        assert!(report.residual_norms[0] < 1e-8);
        let recon = report.terms[0].reconstruct();
        let err = recon
            .sub(&a)
            .unwrap()
            .frobenius_norm();
        assert!(err < 1e-8, "reconstruction err {err}");
    }

    #[test]
    fn collar_bridge_rejects_exactness_but_matches_the_rank_one_oracle() {
        use crate::data::collar_matrix;
        use crate::sva::{nkp_multistart, rank_one_oracle};

        let problem = MatKpdProblem::new(collar_matrix(), vec![4, 4], vec![4, 4]).unwrap();
        let (v, merged) = mat_to_vec(&problem).unwrap();

        // Not a single Kronecker product.
        let h = Hypermatrix::new(merged.clone(), v.clone()).unwrap();
        assert!(!exact_decompose(&h, DEFAULT_TOL).unwrap().decomposable);

        // One-term error equals the best rank-one residual of the 16x16
        // rearrangement.
        let cfg = SvaConfig {
            restarts: 8,
            eps: 1e-12,
            seed: 21,
            ..SvaConfig::default()
        };
        let (sol, _) = nkp_multistart(&v, &merged, &cfg).unwrap();
        let rearranged = h.matricize(&[1], &[2]).unwrap();
        let oracle = rank_one_oracle(&rearranged, 10_000, 1e-15).unwrap();
        assert!(
            (sol.error - oracle.residual).abs() < 1e-6,
            "solver {} vs oracle {}",
            sol.error,
            oracle.residual
        );

        // Two greedy terms then reproduce the matrix through the factor map.
        let cfg = SumConfig {
            eps_sum: 1e-9,
            max_terms: 2,
            inner: cfg,
        };
        let report = mat_sum_kpd(&problem, &cfg).unwrap();
        let mut recon = Matrix::zeros(16, 16);
        for term in &report.terms {
            recon = recon.add(&term.reconstruct()).unwrap();
        }
        let err = recon.sub(&problem.matrix).unwrap().frobenius_norm();
        assert!(err < 1e-8, "two-term reconstruction err {err}");
    }

    #[test]
    fn split_2x2_branches_reproduce_the_matrix() {
        // Leading entry nonzero.
        let m = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let pairs = split_2x2(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], (vec![1.0, 3.0], vec![1.0, 2.0]));
        assert_eq!(pairs[1], (vec![0.0, 1.0], vec![0.0, -2.0]));

        // First row zero.
        let m = Matrix::new(2, 2, vec![0.0, 0.0, 5.0, 6.0]).unwrap();
        let pairs = split_2x2(&m).unwrap();
        assert_eq!(pairs, vec![(vec![0.0, 1.0], vec![5.0, 6.0])]);

        // a = 0, b != 0.
        let m = Matrix::new(2, 2, vec![0.0, 2.0, 3.0, 4.0]).unwrap();
        let pairs = split_2x2(&m).unwrap();
        assert_eq!(pairs[0], (vec![1.0, 2.0], vec![0.0, 2.0]));
        assert_eq!(pairs[1], (vec![0.0, 1.0], vec![3.0, 0.0]));

        // Every branch sums back exactly.
        for values in [
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.0, 2.0, 3.0, 4.0],
            vec![0.0, 0.0, 3.0, 4.0],
            vec![2.5, -1.0, 0.0, 7.0],
        ] {
            let m = Matrix::new(2, 2, values).unwrap();
            let mut sum = Matrix::zeros(2, 2);
            for (u, v) in split_2x2(&m).unwrap() {
                for (i, &ui) in u.iter().enumerate() {
                    for (j, &vj) in v.iter().enumerate() {
                        sum.set(i, j, sum.get(i, j) + ui * vj);
                    }
                }
            }
            let err = sum.sub(&m).unwrap().frobenius_norm();
            assert!(err <= 1e-14 * m.frobenius_norm().max(1.0), "err {err}");
        }
        assert!(split_2x2(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rank_one_factors_expand_to_a_single_term() {
        let rank1 = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let term = MatFactorTerm {
            matrices: vec![rank1.clone(), rank1.scale(2.0)],
            coefficient: 1.5,
        };
        let expanded = expand_by_splits(std::slice::from_ref(&term)).unwrap();
        assert_eq!(expanded.len(), 1);
        let err = expanded[0]
            .reconstruct()
            .sub(&term.reconstruct())
            .unwrap()
            .frobenius_norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn two_rank_two_factors_expand_to_four_terms() {
        let mut rng = StdRng::seed_from_u64(45);
        let term = MatFactorTerm {
            matrices: vec![random_matrix(&mut rng, 2, 2), random_matrix(&mut rng, 2, 2)],
            coefficient: 1.0,
        };
        let expanded = expand_by_splits(std::slice::from_ref(&term)).unwrap();
        assert_eq!(expanded.len(), 4);
        for t in &expanded {
            let dims: Vec<(usize, usize)> =
                t.matrices.iter().map(|m| (m.rows(), m.cols())).collect();
            assert_eq!(dims, vec![(2, 1), (1, 2), (2, 1), (1, 2)]);
        }
        let mut sum = Matrix::zeros(4, 4);
        for t in &expanded {
            sum = sum.add(&t.reconstruct()).unwrap();
        }
        let target = term.reconstruct();
        let err = sum.sub(&target).unwrap().frobenius_norm();
        assert!(err <= 1e-12 * target.frobenius_norm(), "err {err}");
        assert!(expand_by_splits(&[MatFactorTerm {
            matrices: vec![Matrix::zeros(2, 3)],
            coefficient: 1.0
        }])
        .is_err());
    }
}
