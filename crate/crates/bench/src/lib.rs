//! Shared fixtures for the benchmarks.

use kpdkit_core::tensor::{Hypermatrix, Shape};

/// The non-decomposable 4x2x2x3 tensor used by the solver benchmarks.
pub fn bench_tensor() -> Hypermatrix {
    Hypermatrix::from_nonzeros(
        Shape::new(vec![4, 2, 2, 3]).unwrap(),
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
