use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::noise::KrausChannel;

use super::circuit::Circuit;
use super::kernel::{apply_gate_shifted, apply_matrix};
use super::state::StateVector;

/// Largest circuit the density-matrix path accepts (`4^11` complex entries).
pub const DENSITY_QUBIT_CAP: usize = 11;

/// Density matrix stored as a `2q`-qubit vector: entry `(r, c)` lives at `r + (c << q)`,
/// so a gate `U` acts as `U` on the low half and `conj(U)` on the high half.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> DensityMatrix {
        let mut data = vec![ZERO; 1 << (2 * n_qubits)];
        data[0] = ONE;
        DensityMatrix { n_qubits, data }
    }

    pub fn from_pure(s: &StateVector) -> DensityMatrix {
        let n = s.n_qubits();
        let amps = s.amplitudes();
        let dim = amps.len();
        let mut data = vec![ZERO; dim * dim];
        for c in 0..dim {
            for r in 0..dim {
                data[r + (c << n)] = amps[r] * amps[c].conj();
            }
        }
        DensityMatrix { n_qubits: n, data }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<DensityMatrix> {
        if !m.is_square() || !m.rows().is_power_of_two() {
            return Err(Error::Shape("density matrix must be 2^q square".into()));
        }
        let n = m.rows().trailing_zeros() as usize;
        let dim = m.rows();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r + (c << n)] = m[(r, c)];
            }
        }
        Ok(DensityMatrix { n_qubits: n, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.data[r + (c << self.n_qubits)]
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = self.entry(r, c);
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_rc|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Born probabilities, the real part of the diagonal clamped at zero.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re.max(0.0)).collect()
    }

    pub fn apply_gate(&mut self, gate: &super::circuit::Gate) {
        apply_gate_shifted(&mut self.data, gate, 0, false);
        apply_gate_shifted(&mut self.data, gate, self.n_qubits, true);
    }

    /// `ρ → Σ_k E_k ρ E_k†`.
    pub fn apply_channel(&mut self, ch: &KrausChannel) {
        let rows = &ch.qubits;
        let cols: Vec<usize> = rows.iter().map(|q| q + self.n_qubits).collect();
        let mut acc = vec![ZERO; self.data.len()];
        for e in &ch.operators {
            let mut term = self.data.clone();
            apply_matrix(&mut term, rows, &[], e);
            apply_matrix(&mut term, &cols, &[], &e.conj());
            for (a, t) in acc.iter_mut().zip(term) {
                *a += t;
            }
        }
        self.data = acc;
    }
}

/// Runs a circuit from `|0…0⟩⟨0…0|`, applying each gate and then its noise hooks.
pub fn run_density(c: &Circuit) -> Result<DensityMatrix> {
    if c.n_qubits() > DENSITY_QUBIT_CAP {
        return Err(Error::Capacity {
            what: "density-matrix qubits",
            got: c.n_qubits(),
            cap: DENSITY_QUBIT_CAP,
        });
    }
    let mut rho = DensityMatrix::zero_state(c.n_qubits());
    for (g, hooks) in c.gates().iter().zip(c.hooks()) {
        rho.apply_gate(g);
        for ch in hooks {
            rho.apply_channel(ch);
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise;
    use crate::simulator::circuit::Gate;
    use crate::simulator::state::run_statevector;

    #[test]
    fn noiseless_density_is_pure_outer_product() {
        let mut c = Circuit::plain(3);
        c.extend([
            Gate::H(0),
            Gate::Ry(1, 0.7),
            Gate::Cnot { control: 0, target: 2 },
            Gate::Rz(2, -1.3),
            Gate::S(1),
            Gate::Cnot { control: 2, target: 1 },
        ])
        .unwrap();
        let rho = run_density(&c).unwrap();
        let pure = DensityMatrix::from_pure(&run_statevector(&c).unwrap());
        assert!(rho.to_matrix().max_abs_diff(&pure.to_matrix()) < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_damping_relaxes_to_ground() {
        let mut c = Circuit::plain(1);
        c.push(Gate::X(0)).unwrap();
        c.attach(0, noise::amplitude_damping(0, 1.0).unwrap()).unwrap();
        let rho = run_density(&c).unwrap();
        assert!((rho.entry(0, 0) - ONE).norm() < 1e-15);
        assert!(rho.entry(1, 1).norm() < 1e-15);
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let mut c = Circuit::plain(2);
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        c.attach(0, noise::depolarizing2(0, 1, 1.0).unwrap()).unwrap();
        let rho = run_density(&c).unwrap();
        let want = ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0));
        assert!(rho.to_matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn density_capacity() {
        assert!(matches!(run_density(&Circuit::plain(12)), Err(Error::Capacity { .. })));
    }
}
