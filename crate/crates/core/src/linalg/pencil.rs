use super::decomp::{eigenvalues, svd, Lu};
use super::matrix::{adjoint, matmul, ComplexMatrix, C64, ONE};
use crate::error::{Error, Result};

/// Largest pencil the classical reference will solve.
pub const ORACLE_DIM_CAP: usize = 64;

/// Default relative rank tolerance (`σ_i > tol · σ_max` counts as nonzero).
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// A matrix pair `(A, B)` defining `A x = λ B x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPencil {
    a: ComplexMatrix,
    b: ComplexMatrix,
}

impl MatrixPencil {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
            return Err(Error::Shape(format!(
                "pencil needs square matrices of equal size, got {}x{} and {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        Ok(MatrixPencil { a, b })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `(U† A V, U† B V)`.
    pub fn transform(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self> {
        let ua = adjoint(u);
        MatrixPencil::new(matmul(&matmul(&ua, &self.a)?, v)?, matmul(&matmul(&ua, &self.b)?, v)?)
    }
}

/// Generalized eigenvalues of a pencil, split into finite and infinite parts.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigenResult {
    pub eigenvalues: Vec<C64>,
    pub infinite_count: usize,
    /// Set when the pencil is singular (`det(A − λB) ≡ 0`); the eigenvalue list is then
    /// unreliable and must not be compared.
    pub degenerate: bool,
}

impl GeneralizedEigenResult {
    fn degenerate() -> Self {
        GeneralizedEigenResult {
            eigenvalues: Vec::new(),
            infinite_count: 0,
            degenerate: true,
        }
    }
}

/// Classical reference solver for the generalized eigenproblem.
///
/// `rank_tol` is relative to the largest singular value of `B`. With `B` of full
/// numerical rank the result is the spectrum of `B⁻¹A`. Otherwise the pencil is
/// compressed onto the range of `B` with [`project_singular_pencil`] and every
/// discarded direction is reported as an infinite eigenvalue. When the
/// compression is not possible (the coupling block is itself singular) a
/// shift-and-invert fallback counts the infinite eigenvalues instead.
pub fn classical_generalized_eigenvalues(p: &MatrixPencil, rank_tol: f64) -> Result<GeneralizedEigenResult> {
    let n = p.dim();
    if n > ORACLE_DIM_CAP {
        return Err(Error::Capacity {
            what: "pencil dimension",
            got: n,
            cap: ORACLE_DIM_CAP,
        });
    }
    let tol = rank_tol.max(f64::EPSILON);
    let b_svd = svd(&p.b)?;
    let rank = b_svd.rank(tol);
    if rank == n {
        let x = Lu::new(&p.b)?.solve(&p.a)?;
        return Ok(GeneralizedEigenResult {
            eigenvalues: eigenvalues(&x)?,
            infinite_count: 0,
            degenerate: false,
        });
    }
    if rank == 0 {
        // B = 0: every direction is infinite unless A is singular as well
        let a_rank = svd(&p.a)?.rank(tol);
        if a_rank < n {
            return Ok(GeneralizedEigenResult::degenerate());
        }
        return Ok(GeneralizedEigenResult {
            eigenvalues: Vec::new(),
            infinite_count: n,
            degenerate: false,
        });
    }
    match compress(p, tol)? {
        Compression::Reduced(reduced) => {
            let mut inner = classical_generalized_eigenvalues(&reduced, rank_tol)?;
            inner.infinite_count += n - reduced.dim();
            Ok(inner)
        }
        Compression::CouplingSingular => shift_invert(p, tol),
    }
}

enum Compression {
    Reduced(MatrixPencil),
    CouplingSingular,
}

/// Compresses a pencil with singular `B` onto the range of `B`.
///
/// With `B = U Σ V†` split into the leading `r` singular triplets, write
/// `U†AV = [[A11, A12], [A21, A22]]` and `U†BV = diag(Σ_r, 0)`. Eliminating the
/// null-space coordinates through the second block row gives the `r × r` pencil
/// `(A11 − A12 A22⁻¹ A21, Σ_r)`, whose eigenvalues are exactly the finite
/// eigenvalues of the input whenever `A22` is invertible.
pub fn project_singular_pencil(p: &MatrixPencil, rank_tol: f64) -> Result<MatrixPencil> {
    match compress(p, rank_tol.max(f64::EPSILON))? {
        Compression::Reduced(r) => Ok(r),
        Compression::CouplingSingular => Err(Error::Shape(
            "pencil has infinite eigenvalues of index > 1; A restricted to null(B) is singular".into(),
        )),
    }
}

fn compress(p: &MatrixPencil, tol: f64) -> Result<Compression> {
    let n = p.dim();
    let s = svd(&p.b)?;
    let r = s.rank(tol);
    if r == 0 {
        return Err(Error::EmptyPencil);
    }
    if r == n {
        return Ok(Compression::Reduced(p.transform(&s.u, &s.v)?));
    }
    let a_t = matmul(&matmul(&adjoint(&s.u), &p.a)?, &s.v)?;
    let a11 = a_t.block(0, r, 0, r);
    let a12 = a_t.block(0, r, r, n);
    let a21 = a_t.block(r, n, 0, r);
    let a22 = a_t.block(r, n, r, n);
    let lu = Lu::new(&a22)?;
    let a_scale = a_t.max_abs().max(f64::MIN_POSITIVE);
    let a22_small = svd(&a22)?.singular_values.last().copied().unwrap_or(0.0);
    if lu.pivot_ratio == 0.0 || a22_small <= 1e-10 * a_scale {
        return Ok(Compression::CouplingSingular);
    }
    let correction = matmul(&a12, &lu.solve(&a21)?)?;
    let reduced_a = a11.sub(&correction)?;
    let sigma: Vec<C64> = s.singular_values[..r].iter().map(|&x| C64::new(x, 0.0)).collect();
    Ok(Compression::Reduced(MatrixPencil::new(
        reduced_a,
        ComplexMatrix::diag(&sigma),
    )?))
}

/// Fallback for pencils whose infinite part is not index one: eigenvalues `ν` of
/// `(A − σB)⁻¹ B` relate to `λ = σ + 1/ν`, and `ν ≈ 0` marks an infinite eigenvalue.
fn shift_invert(p: &MatrixPencil, tol: f64) -> Result<GeneralizedEigenResult> {
    let n = p.dim();
    let scale = p.a.max_abs().max(p.b.max_abs());
    let mut best: Option<(f64, C64)> = None;
    for &(re, im) in &[(0.31, 0.17), (-0.73, 0.41), (1.29, -0.53), (-0.11, -1.07)] {
        let sigma = C64::new(re, im) * scale.max(1.0);
        let shifted = p.a.sub(&p.b.scale(sigma))?;
        let sv = svd(&shifted)?;
        let ratio = sv.singular_values[n - 1] / sv.singular_values[0].max(f64::MIN_POSITIVE);
        if best.is_none_or(|(r, _)| ratio > r) {
            best = Some((ratio, sigma));
        }
    }
    let (ratio, sigma) = best.expect("shift candidates");
    if ratio <= 1e-10 {
        return Ok(GeneralizedEigenResult::degenerate());
    }
    let shifted = p.a.sub(&p.b.scale(sigma))?;
    let k = Lu::new(&shifted)?.solve(&p.b)?;
    let nus = eigenvalues(&k)?;
    let nu_scale = nus.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // a nilpotent block of size k perturbs its zero eigenvalues to ~eps^(1/k)
    let cut = (tol.sqrt()).max(1e-6) * nu_scale.max(f64::MIN_POSITIVE);
    let mut finite = Vec::new();
    let mut infinite = 0;
    for nu in nus {
        if nu.norm() <= cut {
            infinite += 1;
        } else {
            finite.push(sigma + ONE / nu);
        }
    }
    Ok(GeneralizedEigenResult {
        eigenvalues: finite,
        infinite_count: infinite,
        degenerate: false,
    })
}

/// Embeds an `N × N` pencil into the next power of two as `diag(A, I)`, `diag(B, I)`.
pub fn embed_to_power_of_two(p: &MatrixPencil) -> MatrixPencil {
    let n = p.dim();
    let target = n.next_power_of_two();
    if target == n {
        return p.clone();
    }
    let embed = |m: &ComplexMatrix| {
        let mut out = ComplexMatrix::identity(target);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    };
    MatrixPencil {
        a: embed(&p.a),
        b: embed(&p.b),
    }
}

/// Greedy minimal-distance matching between two eigenvalue multisets.
///
/// Repeatedly pairs the globally closest remaining `(x, y)`. Returns the largest
/// matched distance, or `None` when the sizes differ.
pub fn match_multisets(xs: &[C64], ys: &[C64], relative: bool) -> Option<f64> {
    if xs.len() != ys.len() {
        return None;
    }
    let dist = |x: C64, y: C64| {
        let d = (x - y).norm();
        if relative && y.norm() > 0.0 {
            d / y.norm()
        } else {
            d
        }
    };
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(xs.len() * ys.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            pairs.push((dist(x, y), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_x = vec![false; xs.len()];
    let mut used_y = vec![false; ys.len()];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_x[i] || used_y[j] {
            continue;
        }
        used_x[i] = true;
        used_y[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == xs.len() {
            break;
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ZERO;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag_pencil(a: &[f64], b: &[f64]) -> MatrixPencil {
        let a: Vec<C64> = a.iter().map(|&x| c(x)).collect();
        let b: Vec<C64> = b.iter().map(|&x| c(x)).collect();
        MatrixPencil::new(ComplexMatrix::diag(&a), ComplexMatrix::diag(&b)).unwrap()
    }

    #[test]
    fn diagonal_ratios() {
        let r = classical_generalized_eigenvalues(&diag_pencil(&[2., 6.], &[1., 3.]), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.infinite_count, 0);
        assert!(!r.degenerate);
        assert!(match_multisets(&r.eigenvalues, &[c(2.), c(2.)], false).unwrap() < 1e-14);
    }

    #[test]
    fn identity_pencil() {
        let p = MatrixPencil::new(ComplexMatrix::identity(4), ComplexMatrix::identity(4)).unwrap();
        let r = classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL).unwrap();
        assert!(match_multisets(&r.eigenvalues, &[c(1.); 4], false).unwrap() < 1e-14);
    }

    #[test]
    fn rank_one_projection() {
        let p = diag_pencil(&[1., 2.], &[1., 0.]);
        let q = project_singular_pencil(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(q.dim(), 1);
        let r = classical_generalized_eigenvalues(&q, DEFAULT_RANK_TOL).unwrap();
        assert!((r.eigenvalues[0] - c(1.)).norm() < 1e-14);
        let full = classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(full.infinite_count, 1);
        assert_eq!(full.eigenvalues.len(), 1);
    }

    #[test]
    fn zero_b_is_empty_pencil_error() {
        let p = MatrixPencil::new(ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(project_singular_pencil(&p, DEFAULT_RANK_TOL), Err(Error::EmptyPencil));
        let r = classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.infinite_count, 2);
    }

    #[test]
    fn degenerate_pencil_flagged() {
        // common null vector e1: det(A − λB) ≡ 0
        let p = diag_pencil(&[0., 1.], &[0., 1.]);
        let r = classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn index_two_infinite_block_uses_fallback() {
        // A = I, B = nilpotent Jordan block ⊕ 1: two infinite eigenvalues, one at 1
        let mut b = ComplexMatrix::zeros(3, 3);
        b[(0, 1)] = c(1.);
        b[(2, 2)] = c(1.);
        let p = MatrixPencil::new(ComplexMatrix::identity(3), b).unwrap();
        let r = classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.infinite_count, 2);
        assert_eq!(r.eigenvalues.len(), 1);
        assert!((r.eigenvalues[0] - c(1.)).norm() < 1e-8);
    }

    #[test]
    fn capacity_error() {
        let p = MatrixPencil::new(ComplexMatrix::identity(65), ComplexMatrix::identity(65)).unwrap();
        assert!(matches!(
            classical_generalized_eigenvalues(&p, DEFAULT_RANK_TOL),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn embedding_adds_ones() {
        let p = diag_pencil(&[2., 3., 4.], &[1., 1., 1.]);
        let e = embed_to_power_of_two(&p);
        assert_eq!(e.dim(), 4);
        let r = classical_generalized_eigenvalues(&e, DEFAULT_RANK_TOL).unwrap();
        assert!(match_multisets(&r.eigenvalues, &[c(2.), c(3.), c(4.), c(1.)], false).unwrap() < 1e-12);
        let four = diag_pencil(&[1., 2., 3., 4.], &[1., 1., 1., 1.]);
        assert_eq!(embed_to_power_of_two(&four), four);
        assert_eq!(e.a()[(3, 0)], ZERO);
    }

    #[test]
    fn pencil_shape_checks() {
        assert!(MatrixPencil::new(ComplexMatrix::identity(2), ComplexMatrix::identity(3)).is_err());
        assert!(MatrixPencil::new(ComplexMatrix::zeros(2, 3), ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn matching_is_order_free() {
        let xs = [c(1.), c(2.), c(3.)];
        let ys = [c(3.), c(1.), c(2.0 + 1e-9)];
        assert!(match_multisets(&xs, &ys, false).unwrap() < 2e-9);
        assert_eq!(match_multisets(&xs, &ys[..2], false), None);
    }
}
