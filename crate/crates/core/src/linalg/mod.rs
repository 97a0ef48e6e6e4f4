//! Dense complex linear algebra, pencil utilities and the classical reference solver.

mod decomp;
mod io;
mod matrix;
mod pencil;

pub use decomp::{
    complete_orthonormal_basis, eigenvalues, hessenberg, inverse, spectral_norm, svd, svd_reconstruct, Lu, Svd,
    QR_DEFLATION_TOL,
};
pub use io::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub use matrix::{adjoint, is_upper_triangular, matmul, ComplexMatrix, C64, I, ONE, ZERO};
pub use pencil::{
    classical_generalized_eigenvalues, embed_to_power_of_two, match_multisets, project_singular_pencil,
    GeneralizedEigenResult, MatrixPencil, DEFAULT_RANK_TOL, ORACLE_DIM_CAP,
};
