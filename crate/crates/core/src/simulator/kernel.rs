//! In-place application of small matrices to amplitude vectors.
//!
//! A vector of length `2^q` is indexed by basis states; `targets[k]` is the global
//! qubit of local bit `k` of the matrix. Only amplitudes whose control qubits match
//! are touched.

use crate::linalg::{ComplexMatrix, C64, ZERO};

use super::circuit::Gate;

fn control_mask(controls: &[(usize, bool)]) -> (usize, usize) {
    controls
        .iter()
        .fold((0, 0), |(m, v), &(q, on)| (m | 1 << q, if on { v | 1 << q } else { v }))
}

pub fn apply_matrix(amps: &mut [C64], targets: &[usize], controls: &[(usize, bool)], m: &ComplexMatrix) {
    let (cmask, cval) = control_mask(controls);
    match targets.len() {
        0 => {}
        1 => apply_1q(amps, targets[0], cmask, cval, m),
        _ => apply_kq(amps, targets, cmask, cval, m),
    }
}

fn apply_1q(amps: &mut [C64], t: usize, cmask: usize, cval: usize, m: &ComplexMatrix) {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let bit = 1usize << t;
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + bit {
            if i & cmask != cval {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m00 * a0 + m01 * a1;
            amps[j] = m10 * a0 + m11 * a1;
        }
        base += 2 * bit;
    }
}

fn apply_kq(amps: &mut [C64], targets: &[usize], cmask: usize, cval: usize, m: &ComplexMatrix) {
    let k = targets.len();
    let dim = 1usize << k;
    let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|l| (0..k).filter(|&b| l >> b & 1 == 1).map(|b| 1usize << targets[b]).sum())
        .collect();
    let mut gathered = vec![ZERO; dim];
    for i in 0..amps.len() {
        if i & tmask != 0 || i & cmask != cval {
            continue;
        }
        for (g, &o) in gathered.iter_mut().zip(&offsets) {
            *g = amps[i | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let row = m.row(r);
            amps[i | o] = row.iter().zip(&gathered).map(|(&a, &b)| a * b).sum();
        }
    }
}

/// Applies one gate to a state vector of any width.
pub fn apply_gate(amps: &mut [C64], gate: &Gate) {
    apply_gate_shifted(amps, gate, 0, false);
}

/// Applies `gate` with every qubit index shifted by `shift`, optionally with the
/// complex-conjugated matrix. Density matrices use this for the column half.
pub fn apply_gate_shifted(amps: &mut [C64], gate: &Gate, shift: usize, conjugate: bool) {
    let fix = |m: ComplexMatrix| if conjugate { m.conj() } else { m };
    if let Some(m) = gate.single_qubit_matrix() {
        let q = gate.qubits()[0] + shift;
        apply_matrix(amps, &[q], &[], &fix(m));
        return;
    }
    match gate {
        Gate::Cnot { control, target } => apply_x(amps, control + shift, target + shift),
        Gate::Controlled {
            controls,
            targets,
            matrix,
            ..
        } => {
            let cs: Vec<(usize, bool)> = controls.iter().map(|&(q, v)| (q + shift, v)).collect();
            let ts: Vec<usize> = targets.iter().map(|t| t + shift).collect();
            apply_matrix(amps, &ts, &cs, &fix(matrix.clone()));
        }
        Gate::Dense { targets, matrix, .. } => {
            let ts: Vec<usize> = targets.iter().map(|t| t + shift).collect();
            apply_matrix(amps, &ts, &[], &fix(matrix.clone()));
        }
        _ => unreachable!("single-qubit gates handled above"),
    }
}

fn apply_x(amps: &mut [C64], control: usize, target: usize) {
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}
