//! Dense complex linear algebra for the small Hermitian and unitary
//! matrices that appear in the chain model (3x3 blocks, 4x4 gates, the
//! 8x8 three-qubit Hamiltonian).

mod eigen;
mod matrix;
pub mod pauli;

pub use eigen::{
    expm_i_hermitian, hermitian_eig, nearest_unitary, normal_eigenvalues, symmetric_eig3,
    HermitianEigen,
};
pub use matrix::ComplexMatrix;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {defect:e}")]
    NotHermitian { defect: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unitary: max |W^dag W - I| = {defect:e}")]
    NotUnitary { defect: f64 },
    #[error("matrix has wrong shape: expected {expected}x{expected}, got {rows}x{cols}")]
    WrongShape { expected: usize, rows: usize, cols: usize },
    #[error("Jacobi iteration did not converge")]
    NoConvergence,
    #[error("non-finite evolution time")]
    NonFinite,
    #[error("matrix is singular")]
    Singular,
}

/// Largest modulus over the entries of `m`.
pub fn max_entry_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.max_entry_norm()
}
