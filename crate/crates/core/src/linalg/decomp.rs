//! Dense factorizations: LU solves, Hessenberg QR eigenvalues, one-sided Jacobi SVD.

use super::matrix::{adjoint, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Subdiagonal deflation threshold, relative to the neighbouring diagonal entries.
pub const QR_DEFLATION_TOL: f64 = 1e-12;

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    /// Smallest |u_ii| relative to the largest one.
    pub pivot_ratio: f64,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[(x, k)].norm().total_cmp(&lu[(y, k)].norm()))
                .unwrap();
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        let pivots: Vec<f64> = (0..n).map(|i| lu[(i, i)].norm()).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        let pivot_ratio = if max > 0.0 { min / max } else { 0.0 };
        Ok(Lu { lu, perm, pivot_ratio })
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::Shape("right-hand side row count mismatch".into()));
        }
        if self.pivot_ratio == 0.0 {
            return Err(Error::Shape("singular matrix in LU solve".into()));
        }
        let mut x = ComplexMatrix::zeros(n, b.cols());
        for col in 0..b.cols() {
            let mut y: Vec<C64> = self.perm.iter().map(|&p| b[(p, col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let l = self.lu[(i, k)];
                    let yk = y[k];
                    y[i] -= l * yk;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let u = self.lu[(i, k)];
                    let yk = y[k];
                    y[i] -= u * yk;
                }
                y[i] /= self.lu[(i, i)];
            }
            x.set_column(col, &y);
        }
        Ok(x)
    }
}

/// Reduces a square matrix to upper Hessenberg form with Householder reflections.
/// Only the similarity-transformed matrix is returned.
pub fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- (I - 2vv†/v†v) H (I - 2vv†/v†v)
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|t| v[t].conj() * h[(k + 1 + t, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for t in 0..v.len() {
                h[(k + 1 + t, j)] -= v[t] * f;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|t| h[(i, k + 1 + t)] * v[t]).sum();
            let f = dot * (2.0 / vnorm2);
            for t in 0..v.len() {
                h[(i, k + 1 + t)] -= f * v[t].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Givens pair `(c, s)` with `[c s; -s̄ c] [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let an = a.norm();
    let r = an.hypot(b.norm());
    let phase = a / an;
    (an / r, phase * b.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of a general complex square matrix.
///
/// Hessenberg reduction followed by single-shift QR sweeps on the active window.
/// The first sweep on a fresh window is unshifted; later ones use the Wilkinson
/// shift, with an exceptional shift every tenth stalled sweep. Gives up after
/// `1000·N` sweeps in total.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::Shape("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows();
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let mut h = hessenberg(a);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut eig = vec![ZERO; n];
    let cap = 1000 * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut stall = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // find the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut near = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if near == 0.0 {
                near = scale;
            }
            if sub <= QR_DEFLATION_TOL * near || sub <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            stall = 0;
            continue;
        }
        total += 1;
        if total > cap {
            return Err(Error::NoConvergence {
                routine: "hessenberg QR",
                iterations: cap,
            });
        }
        stall += 1;
        let shift = if stall == 1 {
            ZERO
        } else if stall.is_multiple_of(10) {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

/// One shifted QR step `H - μI = QR, H <- RQ + μI` restricted to rows/cols `lo..=hi`.
fn qr_sweep(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in lo..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Singular value decomposition `A = U Σ V†` with singular values sorted descending.
/// `u` and `v` are square and unitary.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
    }
}

/// One-sided (Hestenes) Jacobi SVD of a square complex matrix.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_square() {
        return Err(Error::Shape("svd is implemented for square matrices".into()));
    }
    let n = a.rows();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let max_sweeps = 100;
    // absolute floor so that pairs involving a numerically null column stop rotating
    let floor = 1e-30 * a.frobenius_norm().powi(2);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..n {
                    alpha += w[(i, p)].norm_sqr();
                    beta += w[(i, q)].norm_sqr();
                    gamma += w[(i, p)].conj() * w[(i, q)];
                }
                let g = gamma.norm();
                if g <= floor || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // strip the phase of the off-diagonal Gram entry, then rotate as in the real case
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..n {
                        let xp = m[(i, p)];
                        let xq = m[(i, q)] * phase.conj();
                        m[(i, p)] = xp * c - xq * s;
                        m[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "jacobi svd",
            iterations: max_sweeps,
        });
    }
    let mut sv: Vec<(f64, usize)> = (0..n)
        .map(|j| ((0..n).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0));
    let smax = sv[0].0;
    let mut u_cols = Vec::new();
    for &(s, j) in &sv {
        if s > 1e-13 * smax && s > 0.0 {
            u_cols.push(w.column(j).into_iter().map(|z| z / s).collect::<Vec<_>>());
        }
    }
    let u = complete_orthonormal_basis(&u_cols, n);
    let order: Vec<usize> = sv.iter().map(|&(_, j)| j).collect();
    Ok(Svd {
        u,
        singular_values: sv.iter().map(|&(s, _)| s).collect(),
        v: v.select_columns(&order),
    })
}

/// Extends orthonormal columns to a full `n × n` unitary by Gram–Schmidt against
/// the standard basis. The given columns keep their positions.
pub fn complete_orthonormal_basis(columns: &[Vec<C64>], n: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    for col in columns {
        let mut v = col.clone();
        orthogonalize(&mut v, &basis);
        orthogonalize(&mut v, &basis);
        let norm = norm2(&v);
        if norm > 1e-8 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    let mut e = 0;
    while basis.len() < n && e < n {
        let mut v = vec![ZERO; n];
        v[e] = ONE;
        e += 1;
        orthogonalize(&mut v, &basis);
        orthogonalize(&mut v, &basis);
        let norm = norm2(&v);
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, col) in basis.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

fn orthogonalize(v: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let dot: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= dot * bi;
        }
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm via the SVD.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(svd(a)?.singular_values[0])
}

/// `A⁻¹`, failing on an exactly singular pivot.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::new(a)?.solve(&ComplexMatrix::identity(a.rows()))
}

/// Reconstructs `U Σ V†`; used by tests and the projection checks.
pub fn svd_reconstruct(s: &Svd) -> ComplexMatrix {
    let n = s.u.rows();
    let mut us = s.u.clone();
    for j in 0..n {
        for i in 0..n {
            us[(i, j)] *= s.singular_values[j];
        }
    }
    super::matrix::matmul(&us, &adjoint(&s.v)).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::matmul;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c(1., 2.), c(3., -1.), c(0.5, 0.)],
            vec![c(0., 1.), c(-2., 0.), c(1., 1.)],
            vec![c(4., 0.), c(0.2, -0.3), c(-1., 2.)],
        ])
        .unwrap()
    }

    #[test]
    fn lu_solve_recovers_rhs() {
        let a = sample();
        let b = ComplexMatrix::identity(3);
        let x = Lu::new(&a).unwrap().solve(&b).unwrap();
        assert!(matmul(&a, &x).unwrap().max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn hessenberg_keeps_trace_and_shape() {
        let a = sample();
        let h = hessenberg(&a);
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!(h[(2, 0)].norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_2x2_match_quadratic_roots() {
        // characteristic polynomial λ² − tr λ + det
        let a = ComplexMatrix::from_rows(&[vec![c(1., 1.), c(2., 0.)], vec![c(0., -1.), c(3., 0.)]]).unwrap();
        let tr = a.trace();
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let d = (tr * tr - det * 4.0).sqrt();
        let mut want = vec![(tr + d) / 2.0, (tr - d) / 2.0];
        let mut got = eigenvalues(&a).unwrap();
        let key = |z: &C64| (z.re * 1e6).round() as i64;
        want.sort_by_key(key);
        got.sort_by_key(key);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn eigenvalues_of_rotation() {
        // [[0,-1],[1,0]] has ±i
        let a = ComplexMatrix::from_real_rows(&[&[0., -1.], &[1., 0.]]).unwrap();
        let got = eigenvalues(&a).unwrap();
        assert!(got.iter().any(|z| (z - c(0., 1.)).norm() < 1e-12));
        assert!(got.iter().any(|z| (z - c(0., -1.)).norm() < 1e-12));
    }

    #[test]
    fn eigenvalues_of_permutation_cycle() {
        // cyclic shift on 4 elements: the fourth roots of unity
        let mut p = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            p[((i + 1) % 4, i)] = ONE;
        }
        let got = eigenvalues(&p).unwrap();
        for w in [c(1., 0.), c(-1., 0.), c(0., 1.), c(0., -1.)] {
            assert!(got.iter().any(|z| (z - w).norm() < 1e-10), "missing {w}: {got:?}");
        }
    }

    #[test]
    fn svd_reconstructs() {
        let a = sample();
        let s = svd(&a).unwrap();
        assert!(s.u.is_unitary(1e-12));
        assert!(s.v.is_unitary(1e-12));
        assert!(svd_reconstruct(&s).max_abs_diff(&a) < 1e-12);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_deficient() {
        let a = ComplexMatrix::from_real_rows(&[&[1., 2., 3.], &[2., 4., 6.], &[0., 0., 1.]]).unwrap();
        let s = svd(&a).unwrap();
        assert_eq!(s.rank(1e-10), 2);
        assert!(s.u.is_unitary(1e-12));
        assert!(svd_reconstruct(&s).max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn basis_completion_is_unitary() {
        let col = vec![c(0.6, 0.), c(0., 0.8), ZERO];
        let u = complete_orthonormal_basis(std::slice::from_ref(&col), 3);
        assert!(u.is_unitary(1e-14));
        assert_eq!(u.column(0), col);
    }
}
