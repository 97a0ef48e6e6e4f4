//! Built-in and generated pencils.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{complete_orthonormal_basis, ComplexMatrix, MatrixPencil, C64, ZERO};
use crate::rng::Rng;

const EXAMPLE1_A: [[f64; 4]; 4] = [
    [-0.846053, -3.121318, 1.130982, -0.135525],
    [-0.274860, 0.540084, 0.832479, 0.530499],
    [-0.135770, 0.613640, 0.947157, -0.638468],
    [1.730607, -1.242851, -2.299600, 0.060833],
];

const EXAMPLE1_B: [[f64; 4]; 4] = [
    [0.217329, 0.418199, 1.206862, 1.458747],
    [-0.208682, -1.124809, 0.288132, 2.032686],
    [1.272089, -0.145261, 1.799622, 1.183555],
    [0.000000, 0.000000, 0.000000, 0.000000],
];

fn real_matrix<const N: usize>(rows: &[[f64; N]; N]) -> ComplexMatrix {
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    ComplexMatrix::from_real_rows(&refs).expect("static matrix")
}

/// The 4×4 two-qubit pair used as the first worked example (B has a zero last row).
pub fn example1() -> MatrixPencil {
    MatrixPencil::new(real_matrix(&EXAMPLE1_A), real_matrix(&EXAMPLE1_B)).expect("4x4 pair")
}

fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_complex_matrix(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let data = (0..n * n).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    ComplexMatrix::from_vec(n, n, data).expect("finite")
}

pub fn random_real_matrix(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let data = (0..n * n).map(|_| C64::new(gaussian(rng), 0.0)).collect();
    ComplexMatrix::from_vec(n, n, data).expect("finite")
}

/// Haar-distributed unitary (Gram–Schmidt of a complex Gaussian matrix).
pub fn random_unitary(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = random_complex_matrix(n, rng);
    let cols: Vec<Vec<C64>> = (0..n).map(|j| g.column(j)).collect();
    complete_orthonormal_basis(&cols, n)
}

/// Random upper-triangular matrix with complex Gaussian entries.
pub fn random_upper_triangular(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let mut m = random_complex_matrix(n, rng);
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = ZERO;
        }
    }
    m
}

pub fn random_pencil(n: usize, rng: &mut Rng) -> MatrixPencil {
    MatrixPencil::new(random_complex_matrix(n, rng), random_complex_matrix(n, rng)).expect("square")
}

pub fn random_real_pencil(n: usize, rng: &mut Rng) -> MatrixPencil {
    MatrixPencil::new(random_real_matrix(n, rng), random_real_matrix(n, rng)).expect("square")
}

/// Banded non-Hermitian pencil shaped like a finite-difference discretization of a
/// layered wave-number problem: `A` is a complex tridiagonal operator with a
/// depth-varying diagonal, `B` is the identity except that the first and last
/// rows are replaced by boundary conditions and carry no `λ` term, so `B` is
/// singular with rank `dim − 2`.
pub fn structured_pencil(dim: usize, rng: &mut Rng) -> MatrixPencil {
    assert!(dim >= 3, "structured pencil needs at least three grid points");
    let h = 1.0 / (dim as f64 - 1.0);
    let mut a = ComplexMatrix::zeros(dim, dim);
    let mut b = ComplexMatrix::identity(dim);
    for i in 1..dim - 1 {
        let z = i as f64 * h;
        let speed = 1.0 + 0.3 * (std::f64::consts::PI * z).sin() + 0.05 * gaussian(rng);
        let loss = 0.02 * rng.random::<f64>();
        a[(i, i - 1)] = C64::new(1.0, 0.0) / (h * h);
        a[(i, i + 1)] = C64::new(1.0, 0.0) / (h * h);
        a[(i, i)] = C64::new(-2.0 / (h * h) + 1.0 / (speed * speed), loss);
    }
    // pressure-release surface and a damped impedance bottom
    a[(0, 0)] = C64::new(1.0, 0.0);
    a[(dim - 1, dim - 1)] = C64::new(1.0, 0.1 * gaussian(rng));
    a[(dim - 1, dim - 2)] = C64::new(-1.0, 0.0);
    b[(0, 0)] = ZERO;
    b[(dim - 1, dim - 1)] = ZERO;
    MatrixPencil::new(a, b).expect("square")
}
