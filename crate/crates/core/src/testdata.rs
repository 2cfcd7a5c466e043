//! Shared fixtures for unit tests: the three sparse 4x2x2x3 hypermatrices
//! used across the solver tests.

use crate::tensor::{Hypermatrix, Shape};

fn shape4223() -> Shape {
    Shape::new(vec![4, 2, 2, 3]).unwrap()
}

/// Exactly decomposable: equals 4 * (0,0,1,-1) (x) (1,2) (x) (0,1) (x) (0,1,0.5).
pub(crate) fn example_rank_one() -> Hypermatrix {
    Hypermatrix::from_nonzeros(
        shape4223(),
        &[
            (&[3, 1, 2, 2], 4.0),
            (&[3, 1, 2, 3], 2.0),
            (&[3, 2, 2, 2], 8.0),
            (&[3, 2, 2, 3], 4.0),
            (&[4, 1, 2, 2], -4.0),
            (&[4, 1, 2, 3], -2.0),
            (&[4, 2, 2, 2], -8.0),
            (&[4, 2, 2, 3], -4.0),
        ],
    )
    .unwrap()
}

/// Same sparsity pattern, but not decomposable; its best single-term error
/// is about 4.3218.
pub(crate) fn example_non_decomposable() -> Hypermatrix {
    Hypermatrix::from_nonzeros(
        shape4223(),
        &[
            (&[3, 1, 2, 2], -2.0),
            (&[3, 1, 2, 3], 3.5),
            (&[3, 2, 2, 2], -5.2),
            (&[3, 2, 2, 3], 7.3),
            (&[4, 1, 2, 2], 0.5),
            (&[4, 1, 2, 3], 2.0),
            (&[4, 2, 2, 2], 6.5),
            (&[4, 2, 2, 3], -5.0),
        ],
    )
    .unwrap()
}

/// Scattered support; its stationary landscape has a global value near
/// 7.7168 and a secondary one near 11.704.
pub(crate) fn example_multimodal() -> Hypermatrix {
    Hypermatrix::from_nonzeros(
        shape4223(),
        &[
            (&[3, 1, 2, 2], 2.0),
            (&[3, 2, 1, 1], 3.5),
            (&[4, 1, 1, 3], -5.2),
            (&[4, 1, 2, 1], 7.3),
            (&[4, 2, 1, 2], 0.5),
            (&[4, 2, 1, 3], 2.0),
            (&[4, 2, 2, 1], 6.5),
            (&[4, 2, 2, 2], -5.0),
        ],
    )
    .unwrap()
}
