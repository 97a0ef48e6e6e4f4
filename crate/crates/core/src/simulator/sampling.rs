use std::collections::BTreeMap;

use rand_distr::{Binomial, Distribution};

use crate::rng::{stream, Rng};

use super::circuit::Register;
use super::density::DensityMatrix;
use super::state::StateVector;

/// Anything with a computational-basis Born distribution.
pub trait Measurable {
    fn n_qubits(&self) -> usize;
    fn probabilities(&self) -> Vec<f64>;
}

impl Measurable for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn probabilities(&self) -> Vec<f64> {
        StateVector::probabilities(self)
    }
}

impl Measurable for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn probabilities(&self) -> Vec<f64> {
        DensityMatrix::probabilities(self)
    }
}

/// Measurement record: basis index → number of shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Counts keyed by bitstring, most significant qubit first.
    pub fn by_bitstring(&self) -> BTreeMap<String, u64> {
        self.iter().map(|(k, v)| (bitstring(k, self.n_qubits), v)).collect()
    }

    /// Number of shots whose `register` reads `value`.
    pub fn register_count(&self, register: &Register, value: u64) -> u64 {
        self.iter()
            .filter(|&(k, _)| register.extract(k) == value)
            .map(|(_, v)| v)
            .sum()
    }
}

pub fn bitstring(index: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if index >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Draws `shots` i.i.d. outcomes from the Born distribution of `state`.
pub fn sample<S: Measurable + ?Sized>(state: &S, shots: u64, seed: u64) -> Counts {
    sample_with(state, shots, &mut stream(seed, &[]))
}

/// As [`sample`] but from a caller-supplied stream. The multinomial draw is done as
/// a chain of conditional binomials over basis states in index order.
pub fn sample_with<S: Measurable + ?Sized>(state: &S, shots: u64, rng: &mut Rng) -> Counts {
    assert!(shots >= 1, "at least one shot");
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut remaining_mass = total;
    let mut remaining = shots;
    let mut counts = BTreeMap::new();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            remaining_mass -= p.max(0.0);
            continue;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let k = if q >= 1.0 || i + 1 == probs.len() {
            remaining
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        if k > 0 {
            counts.insert(i as u64, k);
        }
        remaining -= k;
        remaining_mass -= p;
    }
    if remaining > 0 {
        // round-off left mass unassigned: give it to the most likely outcome
        let best = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i as u64)
            .unwrap_or(0);
        *counts.entry(best).or_insert(0) += remaining;
    }
    Counts {
        n_qubits: state.n_qubits(),
        shots,
        counts,
    }
}
