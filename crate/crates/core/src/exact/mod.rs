//! Exact arithmetic over the Gaussian rationals Q(i): scalars, dense
//! matrices, polynomials and joint eigenspace decomposition.

mod eigen;
mod field;
mod matrix;
mod poly;
mod scalar;

use thiserror::Error;

pub use eigen::{
    characteristic_polynomial, eigen_decompose, gaussian_rational_roots, reassemble,
    split_eigenvalues, EigenBlock,
};
pub use field::Field;
pub use matrix::{matrix_rank, DenseMatrix, Echelon, Matrix};
pub use poly::Poly;
pub use scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid scalar literal `{0}`")]
    InvalidScalar(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is singular")]
    Singular,
    #[error("operators {first} and {second} do not commute")]
    NonCommuting { first: usize, second: usize },
    #[error("operator {operator} has eigenvalues outside Q(i): factor {factor} does not split")]
    IrrationalEigenvalue { operator: usize, factor: String },
    #[error("empty operator family")]
    EmptyFamily,
}
