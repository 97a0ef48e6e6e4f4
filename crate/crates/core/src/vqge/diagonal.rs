use crate::ansatz::AnsatzSpec;
use crate::encoding::{block_encoding_gates, LcuDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, GeneralizedEigenResult, C64};
use crate::rng::{stream, DIAG};
use crate::simulator::{run_statevector, sample_with, Circuit, Gate, RegisterName};

use super::problem::VqgeProblem;

/// Relative threshold on `|s_ii|` used by [`default_tolerance`].
pub const S_RELATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEstimates {
    pub t: Vec<C64>,
    pub s: Vec<C64>,
    /// Standard errors of the real and imaginary parts, when estimated from shots.
    pub t_err: Option<Vec<(f64, f64)>>,
    pub s_err: Option<Vec<(f64, f64)>>,
}

/// `M_ii`.
pub fn diagonal_exact(m: &ComplexMatrix, i: usize) -> Result<C64> {
    if i >= m.rows() || i >= m.cols() {
        return Err(Error::Index {
            index: i,
            dim: m.rows().min(m.cols()),
        });
    }
    Ok(m[(i, i)])
}

impl VqgeProblem {
    pub fn diagonals_exact(&self, params: &[f64]) -> Result<DiagonalEstimates> {
        let (t, s) = self.transformed(params)?;
        let dim = t.rows();
        Ok(DiagonalEstimates {
            t: (0..dim).map(|i| diagonal_exact(&t, i)).collect::<Result<_>>()?,
            s: (0..dim).map(|i| diagonal_exact(&s, i)).collect::<Result<_>>()?,
            t_err: None,
            s_err: None,
        })
    }

    /// Every diagonal entry by Hadamard tests. `A` uses streams `[DIAG, i, 0|1]`,
    /// `B` streams `[DIAG, dim + i, 0|1]`.
    pub fn diagonals_hadamard(&self, params: &[f64], shots: u64, seed: u64) -> Result<DiagonalEstimates> {
        let (theta, phi) = self.split(params)?;
        let dim = self.pencil().dim();
        let mut out = DiagonalEstimates {
            t: Vec::new(),
            s: Vec::new(),
            t_err: Some(Vec::new()),
            s_err: Some(Vec::new()),
        };
        for (which, lcu) in [self.lcu_a(), self.lcu_b()].into_iter().enumerate() {
            for i in 0..dim {
                let slot = (which * dim + i) as u64;
                let h = hadamard_estimate(lcu, self.spec_q(), theta, self.spec_z(), phi, i, shots, seed, slot)?;
                let (vals, errs) = if which == 0 {
                    (&mut out.t, out.t_err.as_mut().unwrap())
                } else {
                    (&mut out.s, out.s_err.as_mut().unwrap())
                };
                vals.push(h.value);
                errs.push(h.std_error);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardEstimate {
    pub value: C64,
    /// Standard errors of the real and imaginary parts.
    pub std_error: (f64, f64),
    /// Shots with the ancillas in `|0…0⟩`, per part.
    pub kept: (u64, u64),
}

/// Estimates `⟨i|Q†(θ)·M·Z(φ)|i⟩` where `M` is the matrix block-encoded by `lcu`.
///
/// Control qubit: H, controlled `W = Q†·U_M·Z`, optionally S†, H, measure. The
/// estimate is `c·(N(ctrl=0, a=0) − N(ctrl=1, a=0)) / N`, with `N` all shots.
#[allow(clippy::too_many_arguments)]
pub fn diagonal_hadamard(
    lcu: &LcuDecomposition,
    spec_q: &AnsatzSpec,
    theta: &[f64],
    spec_z: &AnsatzSpec,
    phi: &[f64],
    i: usize,
    shots: u64,
    seed: u64,
) -> Result<HadamardEstimate> {
    hadamard_estimate(lcu, spec_q, theta, spec_z, phi, i, shots, seed, i as u64)
}

#[allow(clippy::too_many_arguments)]
fn hadamard_estimate(
    lcu: &LcuDecomposition,
    spec_q: &AnsatzSpec,
    theta: &[f64],
    spec_z: &AnsatzSpec,
    phi: &[f64],
    i: usize,
    shots: u64,
    seed: u64,
    slot: u64,
) -> Result<HadamardEstimate> {
    let n = lcu.n_qubits();
    if spec_q.n_qubits != n || spec_z.n_qubits != n {
        return Err(Error::Shape("ansatz and encoding sizes differ".into()));
    }
    if i >= 1 << n {
        return Err(Error::Index { index: i, dim: 1 << n });
    }
    if shots == 0 {
        return Err(Error::InsufficientStatistics("zero shots requested".into()));
    }
    let m = lcu.m();
    let mut parts = [(0.0, 0.0, 0u64); 2];
    for (part, slot_out) in parts.iter_mut().enumerate() {
        let mut c = Circuit::new(&[
            (RegisterName::Work, n),
            (RegisterName::Idx, 1),
            (RegisterName::Ancilla, m),
        ])?;
        let sys = c.register(RegisterName::Work).unwrap().qubits();
        let ctrl = c.register(RegisterName::Idx).unwrap().qubit(0);
        let anc_reg = c.register(RegisterName::Ancilla).unwrap();
        let anc = anc_reg.qubits();
        for (b, &q) in sys.iter().enumerate() {
            if i >> b & 1 == 1 {
                c.push(Gate::X(q))?;
            }
        }
        c.push(Gate::H(ctrl))?;
        let on = (ctrl, true);
        c.extend(spec_z.gates_on(phi, &sys)?.iter().map(|g| g.with_control(on)))?;
        c.extend(block_encoding_gates(lcu, &anc, &sys, &[on])?)?;
        c.extend(spec_q.adjoint_gates_on(theta, &sys)?.iter().map(|g| g.with_control(on)))?;
        if part == 1 {
            c.push(Gate::Sdg(ctrl))?;
        }
        c.push(Gate::H(ctrl))?;
        let state = run_statevector(&c)?;
        let mut rng = stream(seed, &[DIAG, slot, part as u64]);
        let counts = sample_with(&state, shots, &mut rng);
        let (mut n0, mut n1) = (0u64, 0u64);
        for (o, k) in counts.iter() {
            if anc_reg.extract(o) != 0 {
                continue;
            }
            if o >> ctrl & 1 == 0 {
                n0 += k;
            } else {
                n1 += k;
            }
        }
        if n0 + n1 == 0 {
            return Err(Error::InsufficientStatistics(format!(
                "no postselected shots for diagonal entry {i}"
            )));
        }
        let total = shots as f64;
        let cval = lcu.c();
        let mean = cval * (n0 as f64 - n1 as f64) / total;
        let second = cval * cval * (n0 + n1) as f64 / total;
        let se = ((second - mean * mean).max(0.0) / total).sqrt();
        *slot_out = (mean, se, n0 + n1);
    }
    Ok(HadamardEstimate {
        value: C64::new(parts[0].0, parts[1].0),
        std_error: (parts[0].1, parts[1].1),
        kept: (parts[0].2, parts[1].2),
    })
}

/// `S_RELATIVE_TOL · max_i |s_ii|`.
pub fn default_tolerance(d: &DiagonalEstimates) -> f64 {
    S_RELATIVE_TOL * d.s.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ratios `t_ii / s_ii`. Entries with `|s_ii| ≤ tol` count as infinite, or mark the
/// pencil degenerate when `|t_ii| ≤ tol` as well.
pub fn extract_eigenvalues(d: &DiagonalEstimates, tol: f64) -> GeneralizedEigenResult {
    let mut out = GeneralizedEigenResult {
        eigenvalues: Vec::new(),
        infinite_count: 0,
        degenerate: false,
    };
    for (t, s) in d.t.iter().zip(&d.s) {
        if s.norm() > tol {
            out.eigenvalues.push(t / s);
        } else if t.norm() > tol {
            out.infinite_count += 1;
        } else {
            out.degenerate = true;
        }
    }
    out
}
