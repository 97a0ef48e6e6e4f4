//! The loss circuit: work/augmented Bell pairs, `Z(φ)`, the two block encodings
//! selected by the index qubit, then `Q†(θ)`.
//!
//! Outcome `(work = i, idx = k, ancilla = 0, aug = j)` has amplitude
//! `M_k[j, i] / (c_k·√2^{n+1})` with `M_0 = T`, `M_1 = S`. The strictly-lower part
//! of `M_k` is therefore the set of outcomes with `aug > work`.

use crate::encoding::block_encoding_gates;
use crate::error::{Error, Result};
use crate::noise::{attach_noise, NoiseModel};
use crate::rng::Rng;
use crate::simulator::{run_density, run_statevector, sample_with, Circuit, Counts, Gate, Register, RegisterName};

use super::problem::VqgeProblem;

#[derive(Debug, Clone)]
pub struct LossCircuit {
    pub circuit: Circuit,
    pub n: usize,
    pub m: usize,
    pub c_a: f64,
    pub c_b: f64,
}

impl LossCircuit {
    pub fn register(&self, name: RegisterName) -> Register {
        self.circuit
            .register(name)
            .expect("loss-circuit registers are always declared")
    }

    /// Per-shot payoff for one outcome: `2^{n+1}·c_k²` inside the lower-triangle
    /// set of branch `k`, zero elsewhere.
    fn payoff(&self, outcome: u64, regs: &[Register; 4]) -> f64 {
        let [work, idx, anc, aug] = regs;
        if anc.extract(outcome) != 0 {
            return 0.0;
        }
        let (i, j) = (work.extract(outcome), aug.extract(outcome));
        if j <= i {
            return 0.0;
        }
        let c = if idx.extract(outcome) == 0 { self.c_a } else { self.c_b };
        (1u64 << (self.n + 1)) as f64 * c * c
    }

    fn registers(&self) -> [Register; 4] {
        [
            self.register(RegisterName::Work),
            self.register(RegisterName::Idx),
            self.register(RegisterName::Ancilla),
            self.register(RegisterName::Augmented),
        ]
    }

    /// Loss estimate from a measurement record.
    pub fn loss_from_counts(&self, counts: &Counts) -> Result<LossEstimate> {
        let regs = self.registers();
        let anc = regs[2];
        let n = counts.shots() as f64;
        let (mut sum, mut sum_sq, mut kept) = (0.0, 0.0, 0u64);
        for (outcome, k) in counts.iter() {
            if anc.extract(outcome) == 0 {
                kept += k;
            }
            let x = self.payoff(outcome, &regs);
            sum += x * k as f64;
            sum_sq += x * x * k as f64;
        }
        if kept == 0 {
            return Err(Error::InsufficientStatistics(format!(
                "no shot out of {} left the ancillas in |0⟩",
                counts.shots()
            )));
        }
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        Ok(LossEstimate {
            loss: mean,
            std_error: (var / n).sqrt(),
            kept,
            shots: counts.shots(),
            ancilla_success: kept as f64 / n,
        })
    }

    /// Expected value of the estimator under a full outcome distribution.
    pub fn loss_from_probabilities(&self, probs: &[f64]) -> LossEstimate {
        let regs = self.registers();
        let (mut loss, mut success) = (0.0, 0.0);
        for (o, &p) in probs.iter().enumerate() {
            loss += p * self.payoff(o as u64, &regs);
            if regs[2].extract(o as u64) == 0 {
                success += p;
            }
        }
        LossEstimate {
            loss,
            std_error: 0.0,
            kept: 0,
            shots: 0,
            ancilla_success: success,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    pub loss: f64,
    /// Standard error of the estimate; zero for exact evaluations.
    pub std_error: f64,
    /// Shots with the ancillas in `|0…0⟩`.
    pub kept: u64,
    pub shots: u64,
    /// Fraction (or probability) of the ancillas reading `|0…0⟩`.
    pub ancilla_success: f64,
}

/// Assembles the loss circuit for the given `θ ++ φ`.
pub fn build_loss_circuit(problem: &VqgeProblem, params: &[f64]) -> Result<LossCircuit> {
    let (theta, phi) = problem.split(params)?;
    let n = problem.n_qubits();
    let m = problem.m();
    let mut c = Circuit::new(&[
        (RegisterName::Work, n),
        (RegisterName::Idx, 1),
        (RegisterName::Ancilla, m),
        (RegisterName::Augmented, n),
    ])?;
    let work = c.register(RegisterName::Work).unwrap().qubits();
    let idx = c.register(RegisterName::Idx).unwrap().qubit(0);
    let anc = c.register(RegisterName::Ancilla).unwrap().qubits();
    let aug = c.register(RegisterName::Augmented).unwrap().qubits();

    for &q in &work {
        c.push(Gate::H(q))?;
    }
    c.push(Gate::H(idx))?;
    for (&w, &a) in work.iter().zip(&aug) {
        c.push(Gate::Cnot { control: w, target: a })?;
    }
    c.extend(problem.spec_z().gates_on(phi, &aug)?)?;
    c.extend(block_encoding_gates(problem.lcu_a(), &anc, &aug, &[(idx, false)])?)?;
    c.extend(block_encoding_gates(problem.lcu_b(), &anc, &aug, &[(idx, true)])?)?;
    c.extend(problem.spec_q().adjoint_gates_on(theta, &aug)?)?;
    Ok(LossCircuit {
        circuit: c,
        n,
        m,
        c_a: problem.lcu_a().c(),
        c_b: problem.lcu_b().c(),
    })
}

/// Samples the noiseless circuit and applies the lower-triangle estimator.
pub fn loss_sampled(lc: &LossCircuit, shots: u64, rng: &mut Rng) -> Result<LossEstimate> {
    if shots == 0 {
        return Err(Error::InsufficientStatistics("zero shots requested".into()));
    }
    let state = run_statevector(&lc.circuit)?;
    lc.loss_from_counts(&sample_with(&state, shots, rng))
}

/// Loss under the noise model; exact expectation when `shots` is `None`.
pub fn loss_noisy(lc: &LossCircuit, model: &NoiseModel, shots: Option<u64>, rng: &mut Rng) -> Result<LossEstimate> {
    let rho = run_density(&attach_noise(&lc.circuit, model)?)?;
    match shots {
        None => Ok(lc.loss_from_probabilities(&rho.probabilities())),
        Some(0) => Err(Error::InsufficientStatistics("zero shots requested".into())),
        Some(s) => lc.loss_from_counts(&sample_with(&rho, s, rng)),
    }
}
