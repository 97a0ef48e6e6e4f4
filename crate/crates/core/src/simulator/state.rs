use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

use super::circuit::{Circuit, Register};
use super::kernel::apply_gate;

/// Largest circuit the statevector path accepts.
pub const STATEVECTOR_QUBIT_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        StateVector { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<StateVector> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Shape(format!("{} amplitudes is not a power of two", amps.len())));
        }
        Ok(StateVector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies the gates of `c` in order, ignoring any attached noise.
    pub fn evolve(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "circuit has {} qubits, state has {}",
                c.n_qubits(),
                self.n_qubits
            )));
        }
        for g in c.gates() {
            apply_gate(&mut self.amps, g);
        }
        Ok(())
    }
}

/// Runs a noiseless circuit from `|0…0⟩`.
pub fn run_statevector(c: &Circuit) -> Result<StateVector> {
    if c.has_noise() {
        return Err(Error::Mode(
            "circuit carries noise hooks; use the density-matrix path".into(),
        ));
    }
    if c.n_qubits() > STATEVECTOR_QUBIT_CAP {
        return Err(Error::Capacity {
            what: "statevector qubits",
            got: c.n_qubits(),
            cap: STATEVECTOR_QUBIT_CAP,
        });
    }
    let mut s = StateVector::basis(c.n_qubits(), 0);
    s.evolve(c)?;
    Ok(s)
}

/// Outcome of conditioning a state on one register value.
#[derive(Debug, Clone)]
pub struct Postselection {
    pub probability: f64,
    /// Renormalized conditional state on the full qubit set; `None` when the outcome
    /// has zero probability.
    pub state: Option<StateVector>,
}

/// Parses a bitstring written most-significant qubit first.
pub fn parse_bitstring(bits: &str, width: usize) -> Result<u64> {
    if bits.len() != width {
        return Err(Error::Shape(format!(
            "bitstring '{bits}' has length {}, register has {width} qubits",
            bits.len()
        )));
    }
    bits.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::Shape(format!("bad bit '{ch}' in '{bits}'"))),
    })
}

/// Probability of reading `value` (MSB-first bitstring) on `register`, with the
/// conditional state.
pub fn postselect_probability(state: &StateVector, register: &Register, value: &str) -> Result<Postselection> {
    let v = parse_bitstring(value, register.size)?;
    Ok(postselect_value(state, register, v))
}

pub fn postselect_value(state: &StateVector, register: &Register, value: u64) -> Postselection {
    let mut amps = state.amps.clone();
    let mut p = 0.0;
    for (i, a) in amps.iter_mut().enumerate() {
        if register.extract(i as u64) == value {
            p += a.norm_sqr();
        } else {
            *a = ZERO;
        }
    }
    if p <= 0.0 {
        return Postselection {
            probability: 0.0,
            state: None,
        };
    }
    let scale = 1.0 / p.sqrt();
    amps.iter_mut().for_each(|a| *a *= scale);
    Postselection {
        probability: p,
        state: Some(StateVector {
            n_qubits: state.n_qubits,
            amps,
        }),
    }
}
