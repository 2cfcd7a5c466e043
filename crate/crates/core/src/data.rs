//! Bundled test matrices.

use crate::io::parse_matrix;
use crate::matrix::Matrix;

/// Collar's 16x16 matrix in the hypermatrix text format, as shipped in
/// `data/collar.txt`. It has an exact two-term 4x4 (x) 4x4 Kronecker
/// decomposition, which makes it a sharp end-to-end fixture for the
/// matrix-form solvers.
pub const COLLAR_TEXT: &str = include_str!("../data/collar.txt");

/// The parsed Collar matrix.
pub fn collar_matrix() -> Matrix {
    parse_matrix(COLLAR_TEXT).expect("bundled collar.txt is well-formed")
}
