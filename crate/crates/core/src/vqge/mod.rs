//! The solver: loss definitions, the loss circuit, gradient descent and
//! eigenvalue read-out.
//!
//! The loss is `Σ_{i>j} |T_ij|² + |S_ij|²` with `T = Q†AZ`, `S = Q†BZ`; it vanishes
//! exactly when both are upper triangular, and then `t_ii / s_ii` are the
//! generalized eigenvalues of `(A, B)`.
//!
//! The sampled estimator counts, over all shots, those with the ancillas in
//! `|0…0⟩` and `aug > work`, weighting branch `k` by `c_k²` to undo the `1/c`
//! of the block encoding:
//! `L̂ = 2^{n+1}·(c_A²·N_L⁽⁰⁾ + c_B²·N_L⁽¹⁾) / N`. Its expectation is the dense loss.

mod diagonal;
mod loss_circuit;
mod optimize;
mod problem;

pub use diagonal::{
    default_tolerance, diagonal_exact, diagonal_hadamard, extract_eigenvalues, DiagonalEstimates, HadamardEstimate,
    S_RELATIVE_TOL,
};
pub use loss_circuit::{build_loss_circuit, loss_noisy, loss_sampled, LossCircuit, LossEstimate};
pub use optimize::{
    gradient_fd, optimize, param_hash, IterationRecord, LossMode, OptimizationTrace, OptimizerConfig, RestartTrace,
};
pub use problem::{loss_exact, lower_mass, transformed, VqgeProblem};
