//! Kronecker product, semi-tensor product, and permutations of factored
//! position spaces.
//!
//! Swap and axis-permutation matrices are never materialized: they are kept
//! as index bijections ([`PermutationMap`]), which apply in O(n) and
//! reconstruct the dense 0/1 matrix on demand for testing.

use thiserror::Error;

use crate::matrix::Matrix;
use crate::tensor::Shape;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StpError {
    #[error("permutation images are not a bijection on [1, {len}]")]
    NotABijection { len: usize },
    #[error("permutation has {got} images, shape has {expected} axes")]
    AxisCountMismatch { expected: usize, got: usize },
    #[error("map size {map} does not match vector length {vec}")]
    SizeMismatch { map: usize, vec: usize },
}

/// Kronecker product `A (x) B`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = Matrix::zeros(ra * rb, ca * cb);
    for ia in 0..ra {
        for ja in 0..ca {
            let v = a.get(ia, ja);
            if v == 0.0 {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out.set(ia * rb + ib, ja * cb + jb, v * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// `x_1 (x) x_2 (x) ... (x) x_d` over a factor list.
pub fn kron_factors(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        out = kron_vec(&out, f);
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Semi-tensor product `(A (x) I_{t/n})(B (x) I_{t/p})` with
/// `t = lcm(cols(A), rows(B))`. Coincides with the ordinary product when the
/// inner dimensions already match, and with the Kronecker product on column
/// vectors.
pub fn stp(a: &Matrix, b: &Matrix) -> Matrix {
    let t = lcm(a.cols(), b.rows());
    let left = if t == a.cols() {
        a.clone()
    } else {
        kron(a, &Matrix::identity(t / a.cols()))
    };
    let right = if t == b.rows() {
        b.clone()
    } else {
        kron(b, &Matrix::identity(t / b.rows()))
    };
    left.matmul(&right)
        .expect("lcm padding makes the product conformable")
}

/// A permutation of axis labels `1..=d`: `images[s-1] = sigma(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, StpError> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &i in &images {
            if i < 1 || i > d || seen[i - 1] {
                return Err(StpError::NotABijection { len: d });
            }
            seen[i - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            images: (1..=d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `sigma(s)` for 1-based `s`.
    pub fn image(&self, s: usize) -> usize {
        self.images[s - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

/// A bijection on positions `1..=n`, stored as the destination of each
/// source position. Applying it moves the value at source position `p` to
/// destination `dest(p)`, so the map equals the 0/1 matrix whose `p`-th
/// column is the `dest(p)`-th standard basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMap {
    dest: Vec<usize>, // 0-based internally
}

impl PermutationMap {
    pub fn identity(n: usize) -> Self {
        Self {
            dest: (0..n).collect(),
        }
    }

    /// Builds a map from its 1-based destination list.
    pub fn from_dest(dest: Vec<usize>) -> Result<Self, StpError> {
        let n = dest.len();
        let mut seen = vec![false; n];
        for &p in &dest {
            if p < 1 || p > n || seen[p - 1] {
                return Err(StpError::NotABijection { len: n });
            }
            seen[p - 1] = true;
        }
        Ok(Self {
            dest: dest.into_iter().map(|p| p - 1).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.dest.len()
    }

    /// The 1-based destination list (the delta-notation column indices).
    pub fn dest(&self) -> Vec<usize> {
        self.dest.iter().map(|&p| p + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.dest.len()];
        for (src, &dst) in self.dest.iter().enumerate() {
            inv[dst] = src;
        }
        Self { dest: inv }
    }

    /// Reorders `v`, moving entry `p` to position `dest(p)`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, StpError> {
        if v.len() != self.dest.len() {
            return Err(StpError::SizeMismatch {
                map: self.dest.len(),
                vec: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        for (src, &dst) in self.dest.iter().enumerate() {
            out[dst] = v[src];
        }
        Ok(out)
    }

    /// The dense n x n 0/1 matrix of the map, for conformance tests.
    pub fn to_dense(&self) -> Matrix {
        let n = self.dest.len();
        let mut m = Matrix::zeros(n, n);
        for (src, &dst) in self.dest.iter().enumerate() {
            m.set(dst, src, 1.0);
        }
        m
    }
}

/// Reorders `v` by `map` (free-function form of [`PermutationMap::apply`]).
pub fn apply_perm(map: &PermutationMap, v: &[f64]) -> Result<Vec<f64>, StpError> {
    map.apply(v)
}

/// The swap map `W_[m,n]` of size `mn`, satisfying
/// `apply_perm(swap_map(m, n), x (x) y) = y (x) x` for `x` of length `m` and
/// `y` of length `n`.
pub fn swap_map(m: usize, n: usize) -> PermutationMap {
    let shape = Shape::new(vec![m, n]).expect("swap dimensions are positive");
    let sigma = Permutation::new(vec![2, 1]).expect("(2,1) is a bijection");
    perm_map(&shape, &sigma).expect("axis counts match")
}

/// The axis-permutation map `W^sigma` on the factored position space of
/// `shape`: for factor vectors `x_s` of lengths `n_s`,
/// `apply_perm(W, x_1 (x) ... (x) x_d) = x_{sigma(1)} (x) ... (x) x_{sigma(d)}`.
///
/// Each source position, read as a multi-index `(i_1, ..., i_d)`, is
/// re-addressed as `(i_{sigma(1)}, ..., i_{sigma(d)})` under the permuted
/// shape; no dense matrix is formed.
pub fn perm_map(shape: &Shape, sigma: &Permutation) -> Result<PermutationMap, StpError> {
    let d = shape.order();
    if sigma.len() != d {
        return Err(StpError::AxisCountMismatch {
            expected: d,
            got: sigma.len(),
        });
    }
    let dims = shape.dims();
    let permuted_dims: Vec<usize> = (1..=d).map(|t| dims[sigma.image(t) - 1]).collect();

    let n = shape.total();
    let mut dest = vec![0usize; n];
    let mut mi = vec![0usize; d]; // 0-based odometer over the source shape
    for (src, slot) in dest.iter_mut().enumerate().take(n) {
        let mut k = 0usize;
        for t in 1..=d {
            k = k * permuted_dims[t - 1] + mi[sigma.image(t) - 1];
        }
        *slot = k;
        let _ = src;
        for s in (0..d).rev() {
            mi[s] += 1;
            if mi[s] < dims[s] {
                break;
            }
            mi[s] = 0;
        }
    }
    Ok(PermutationMap { dest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
        let values = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::new(rows, cols, values).unwrap()
    }

    fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&Matrix::identity(2), &Matrix::identity(3));
        assert_eq!(k, Matrix::identity(6));
    }

    #[test]
    fn kron_of_column_vectors() {
        let a = Matrix::column(&[1.0, 2.0]);
        let b = Matrix::column(&[0.0, 1.0]);
        assert_eq!(kron(&a, &b).values(), &[0.0, 1.0, 0.0, 2.0]);
        assert_eq!(kron_vec(&[1.0, 2.0], &[0.0, 1.0]), vec![0.0, 1.0, 0.0, 2.0]);
    }

    #[test]
    fn stp_of_conformable_matrices_is_the_ordinary_product() {
        let mut rng = StdRng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        assert_eq!(stp(&a, &b), a.matmul(&b).unwrap());
    }

    #[test]
    fn stp_of_column_vectors_is_kron() {
        let mut rng = StdRng::seed_from_u64(2);
        let x = random_vec(&mut rng, 3);
        let y = random_vec(&mut rng, 4);
        let s = stp(&Matrix::column(&x), &Matrix::column(&y));
        assert_eq!(s.values(), kron_vec(&x, &y).as_slice());
    }

    #[test]
    fn stp_is_associative() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 2, 3);
        let b = random_matrix(&mut rng, 4, 2);
        let c = random_matrix(&mut rng, 3, 5);
        let lhs = stp(&stp(&a, &b), &c);
        let rhs = stp(&a, &stp(&b, &c));
        assert_eq!((lhs.rows(), lhs.cols()), (rhs.rows(), rhs.cols()));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn stp_transpose_law() {
        let mut rng = StdRng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 2, 3);
        let b = random_matrix(&mut rng, 4, 5);
        let lhs = stp(&a, &b).transpose();
        let rhs = stp(&b.transpose(), &a.transpose());
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn swap_map_special_cases() {
        assert_eq!(swap_map(1, 4).dest(), vec![1, 2, 3, 4]);
        assert_eq!(swap_map(2, 2).dest(), vec![1, 3, 2, 4]);
    }

    #[test]
    fn swap_map_exchanges_kron_factors_exactly() {
        let mut rng = StdRng::seed_from_u64(5);
        let x = random_vec(&mut rng, 3);
        let y = random_vec(&mut rng, 4);
        let swapped = apply_perm(&swap_map(3, 4), &kron_vec(&x, &y)).unwrap();
        assert_eq!(swapped, kron_vec(&y, &x));
    }

    #[test]
    fn swap_maps_invert_each_other() {
        for (m, n) in [(2, 3), (3, 4), (1, 5), (4, 4)] {
            let w = swap_map(m, n);
            let back = swap_map(n, m);
            assert_eq!(w.inverse(), back);
            let v: Vec<f64> = (0..m * n).map(|i| i as f64).collect();
            let roundtrip = back.apply(&w.apply(&v).unwrap()).unwrap();
            assert_eq!(roundtrip, v);
        }
    }

    #[test]
    fn perm_map_identity_and_errors() {
        let shape = Shape::new(vec![2, 3]).unwrap();
        let id = perm_map(&shape, &Permutation::identity(2)).unwrap();
        assert_eq!(id, PermutationMap::identity(6));
        let v = [5.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        assert_eq!(id.apply(&v).unwrap(), v);
        assert!(matches!(
            Permutation::new(vec![1, 1]),
            Err(StpError::NotABijection { .. })
        ));
        assert!(matches!(
            perm_map(&shape, &Permutation::identity(3)),
            Err(StpError::AxisCountMismatch { .. })
        ));
    }

    #[test]
    fn perm_map_reorders_kron_factors() {
        let mut rng = StdRng::seed_from_u64(6);
        let shape = Shape::new(vec![2, 3, 4]).unwrap();
        let xs = [
            random_vec(&mut rng, 2),
            random_vec(&mut rng, 3),
            random_vec(&mut rng, 4),
        ];
        let sigma = Permutation::new(vec![3, 1, 2]).unwrap();
        let w = perm_map(&shape, &sigma).unwrap();
        let lhs = w.apply(&kron_factors(&xs)).unwrap();
        let rhs = kron_factors(&[xs[2].clone(), xs[0].clone(), xs[1].clone()]);
        let err = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-15, "max deviation {err}");
    }

    #[test]
    fn perm_map_composes() {
        let mut rng = StdRng::seed_from_u64(7);
        let dims = vec![2, 3, 2, 4];
        let shape = Shape::new(dims.clone()).unwrap();
        let sigma = Permutation::new(vec![2, 4, 1, 3]).unwrap();
        let tau = Permutation::new(vec![3, 1, 4, 2]).unwrap();
        // Composite relabelling: applying tau then sigma-on-the-permuted-shape
        // equals the single map of s -> tau(sigma(s)).
        let composed_images: Vec<usize> =
            (1..=4).map(|s| tau.image(sigma.image(s))).collect();
        let composed = Permutation::new(composed_images).unwrap();

        let v = random_vec(&mut rng, shape.total());
        let w_tau = perm_map(&shape, &tau).unwrap();
        let tau_dims: Vec<usize> = (1..=4).map(|t| dims[tau.image(t) - 1]).collect();
        let tau_shape = Shape::new(tau_dims).unwrap();
        let w_sigma = perm_map(&tau_shape, &sigma).unwrap();

        let two_step = w_sigma.apply(&w_tau.apply(&v).unwrap()).unwrap();
        let one_step = perm_map(&shape, &composed).unwrap().apply(&v).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn apply_perm_checks_sizes_and_preserves_norm() {
        let w = swap_map(3, 5);
        assert!(matches!(
            w.apply(&[1.0, 2.0]),
            Err(StpError::SizeMismatch { .. })
        ));
        let mut rng = StdRng::seed_from_u64(8);
        let v = random_vec(&mut rng, 15);
        let permuted = w.apply(&v).unwrap();
        // Pure reorder: the entry multiset is preserved bit for bit, which is
        // the strongest sense in which the norm is preserved exactly.
        let bits = |u: &[f64]| {
            let mut b: Vec<u64> = u.iter().map(|x| x.to_bits()).collect();
            b.sort_unstable();
            b
        };
        assert_eq!(bits(&permuted), bits(&v));
        // Bijection roundtrip.
        let back = w.inverse().apply(&permuted).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn dense_form_acts_like_the_map() {
        let shape = Shape::new(vec![2, 2, 3]).unwrap();
        let sigma = Permutation::new(vec![3, 1, 2]).unwrap();
        let w = perm_map(&shape, &sigma).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let v = random_vec(&mut rng, 12);
        let dense = w.to_dense().matmul(&Matrix::column(&v)).unwrap();
        assert_eq!(dense.values(), w.apply(&v).unwrap().as_slice());
    }
}
