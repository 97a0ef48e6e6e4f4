//! Gate-level simulation: statevectors for noiseless runs, density matrices for
//! noisy ones, plus terminal sampling and postselection.

mod circuit;
mod density;
mod kernel;
mod sampling;
mod state;

pub use circuit::{
    pauli_matrix, ry_matrix, rz_matrix, Circuit, Gate, GateCountReport, Register, RegisterName, UNITARY_TOL,
};
pub use density::{run_density, DensityMatrix, DENSITY_QUBIT_CAP};
pub use kernel::{apply_gate, apply_matrix};
pub use sampling::{bitstring, sample, sample_with, Counts, Measurable};
pub use state::{
    parse_bitstring, postselect_probability, postselect_value, run_statevector, Postselection, StateVector,
    STATEVECTOR_QUBIT_CAP,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{attach_noise, NoiseModel};
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
        let mut rng = stream(seed, &[0]);
        let mut c = Circuit::plain(n);
        for _ in 0..len {
            let q = rng.random_range(0..n);
            let g = match rng.random_range(0..8) {
                0 => Gate::H(q),
                1 => Gate::X(q),
                2 => Gate::S(q),
                3 => Gate::Ry(q, rng.random_range(-3.0..3.0)),
                4 => Gate::Rz(q, rng.random_range(-3.0..3.0)),
                5 => Gate::Y(q),
                _ if n > 1 => {
                    let t = (q + rng.random_range(1..n)) % n;
                    Gate::Cnot { control: q, target: t }
                }
                _ => Gate::Sdg(q),
            };
            c.push(g).unwrap();
        }
        c
    }

    proptest! {
        #[test]
        fn statevector_norm_is_preserved(seed in 0u64..10_000, n in 1usize..6, len in 0usize..40) {
            let s = run_statevector(&random_circuit(n, len, seed)).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn noisy_density_stays_physical(seed in 0u64..10_000, n in 1usize..4, len in 1usize..25) {
            let model = NoiseModel { gamma: 0.05, p1: 0.1, p2: 0.2, enabled: true };
            let c = attach_noise(&random_circuit(n, len, seed), &model).unwrap();
            let rho = run_density(&c).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(rho.trace().im.abs() < 1e-12);
            prop_assert!(rho.hermiticity_defect() < 1e-12);
            prop_assert!(rho.purity() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sampled_histogram_converges_in_total_variation() {
        let s = run_statevector(&random_circuit(3, 20, 77)).unwrap();
        let p = s.probabilities();
        let tv = |shots: u64| {
            let c = sample(&s, shots, 5);
            0.5 * (0..8u64)
                .map(|k| (c.get(k) as f64 / shots as f64 - p[k as usize]).abs())
                .sum::<f64>()
        };
        assert!(tv(1_000_000) < 0.01);
        assert!(tv(1_000_000) < tv(1_000) + 1e-3);
    }

    #[test]
    fn density_and_statevector_agree_on_noiseless_circuits() {
        let c = random_circuit(3, 30, 5);
        let pure = run_statevector(&c).unwrap();
        let rho = run_density(&c).unwrap();
        for (a, b) in pure.probabilities().iter().zip(rho.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
