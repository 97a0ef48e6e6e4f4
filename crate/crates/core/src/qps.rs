//! Process snapshots: circuits whose joint work/augmented outcome distribution
//! exposes every `|⟨j|U|i⟩|²`.
//!
//! After `H^⊗n` on work and CNOTs onto the augmented copy, `U` on the copy leaves
//! outcome `(work = i, aug = j)` with probability `|U_ji|²/2^n`. With an index
//! register selecting among `l` unitaries, outcome `(i, k, j)` has probability
//! `|(U_k)_ji|² / 2^{n+⌈log₂ l⌉}`.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pencils::random_unitary;
use crate::rng::{stream, Rng, BENCH};
use crate::simulator::{run_statevector, sample_with, Circuit, Gate, RegisterName};

fn check_unitaries(us: &[ComplexMatrix]) -> Result<usize> {
    let first = us.first().ok_or_else(|| Error::Shape("no unitaries given".into()))?;
    let dim = first.rows();
    if !dim.is_power_of_two() || us.iter().any(|u| u.rows() != dim || u.cols() != dim) {
        return Err(Error::Shape("unitaries must share one 2^n square shape".into()));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn bell_prefix(c: &mut Circuit, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let work = c.register(RegisterName::Work).unwrap().qubits();
    let aug = c.register(RegisterName::Augmented).unwrap().qubits();
    for &q in &work {
        c.push(Gate::H(q))?;
    }
    for k in 0..n {
        c.push(Gate::Cnot {
            control: work[k],
            target: aug[k],
        })?;
    }
    Ok((work, aug))
}

/// Work and augmented registers, `U` on the augmented copy.
pub fn single_qps_circuit(u: &ComplexMatrix) -> Result<Circuit> {
    let n = check_unitaries(std::slice::from_ref(u))?;
    let mut c = Circuit::new(&[(RegisterName::Work, n), (RegisterName::Augmented, n)])?;
    let (_, aug) = bell_prefix(&mut c, n)?;
    c.push(Gate::dense(aug, u.clone(), "U")?)?;
    Ok(c)
}

/// Work, index and augmented registers; the index register is put in uniform
/// superposition and selects which unitary acts on the copy.
pub fn multi_qps_circuit(us: &[ComplexMatrix]) -> Result<Circuit> {
    let n = check_unitaries(us)?;
    let bits = us.len().next_power_of_two().trailing_zeros() as usize;
    let mut c = Circuit::new(&[
        (RegisterName::Work, n),
        (RegisterName::Idx, bits),
        (RegisterName::Augmented, n),
    ])?;
    let (_, aug) = bell_prefix(&mut c, n)?;
    let idx = c.register(RegisterName::Idx).unwrap().qubits();
    for &q in &idx {
        c.push(Gate::H(q))?;
    }
    for (k, u) in us.iter().enumerate() {
        let controls = idx.iter().enumerate().map(|(b, &q)| (q, k >> b & 1 == 1)).collect();
        c.push(Gate::controlled(controls, aug.clone(), u.clone(), format!("U{k}"))?)?;
    }
    Ok(c)
}

/// Estimates of `|U_ji|²` laid out like `U` (row `j`, column `i`).
pub type SquaredModuli = Vec<Vec<f64>>;

fn outcome_probabilities(c: &Circuit, shots: Option<u64>, rng: &mut Rng) -> Result<Vec<f64>> {
    let state = run_statevector(c)?;
    Ok(match shots {
        None => state.probabilities(),
        Some(s) => {
            let counts = sample_with(&state, s, rng);
            let mut p = vec![0.0; 1 << c.n_qubits()];
            for (o, k) in counts.iter() {
                p[o as usize] = k as f64 / s as f64;
            }
            p
        }
    })
}

/// One snapshot circuit per unitary, `shots` each (`None` for exact probabilities).
pub fn estimate_single(us: &[ComplexMatrix], shots: Option<u64>, rng: &mut Rng) -> Result<Vec<SquaredModuli>> {
    let n = check_unitaries(us)?;
    let dim = 1usize << n;
    us.iter()
        .map(|u| {
            let p = outcome_probabilities(&single_qps_circuit(u)?, shots, rng)?;
            Ok((0..dim)
                .map(|j| (0..dim).map(|i| dim as f64 * p[i | j << n]).collect())
                .collect())
        })
        .collect()
}

/// A single index-register circuit with `shots` in total.
pub fn estimate_multi(us: &[ComplexMatrix], shots: Option<u64>, rng: &mut Rng) -> Result<Vec<SquaredModuli>> {
    let n = check_unitaries(us)?;
    let dim = 1usize << n;
    let bits = us.len().next_power_of_two().trailing_zeros() as usize;
    let p = outcome_probabilities(&multi_qps_circuit(us)?, shots, rng)?;
    let scale = (1usize << (n + bits)) as f64;
    Ok((0..us.len())
        .map(|k| {
            (0..dim)
                .map(|j| (0..dim).map(|i| scale * p[i | k << n | j << (n + bits)]).collect())
                .collect()
        })
        .collect())
}

/// Root-mean-square error over every entry of every unitary.
pub fn rmse(estimates: &[SquaredModuli], us: &[ComplexMatrix]) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (est, u) in estimates.iter().zip(us) {
        for (j, row) in est.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                acc += (e - u[(j, i)].norm_sqr()).powi(2);
                count += 1;
            }
        }
    }
    (acc / count as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpsVariant {
    /// One circuit per unitary, total shots split evenly.
    Single,
    /// One circuit with an index register.
    Indexed,
}

impl QpsVariant {
    pub fn name(self) -> &'static str {
        match self {
            QpsVariant::Single => "single",
            QpsVariant::Indexed => "indexed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpsBenchRow {
    pub variant: QpsVariant,
    pub unitaries: usize,
    pub dim: usize,
    /// Total shots across all circuits of the variant.
    pub shots: u64,
    pub rmse: f64,
}

/// RMSE against total shots for both variants. `sets` lists `(count, n_qubits)`;
/// each set draws its unitaries from stream `[BENCH, set]`. The squared error is
/// pooled over `repeats` independent runs, repeat `r` sampling from
/// `[BENCH, set, variant, shots, r]`.
pub fn qps_bench(sets: &[(usize, usize)], shots: &[u64], repeats: usize, seed: u64) -> Result<Vec<QpsBenchRow>> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for (s, &(count, n)) in sets.iter().enumerate() {
        let mut urng = stream(seed, &[BENCH, s as u64]);
        let us: Vec<ComplexMatrix> = (0..count).map(|_| random_unitary(1 << n, &mut urng)).collect();
        for &total in shots {
            for (v, variant) in [QpsVariant::Single, QpsVariant::Indexed].into_iter().enumerate() {
                let mut mse = 0.0;
                for r in 0..repeats {
                    let mut rng = stream(seed, &[BENCH, s as u64, v as u64, total, r as u64]);
                    let est = match variant {
                        QpsVariant::Single => estimate_single(&us, Some((total / count as u64).max(1)), &mut rng)?,
                        QpsVariant::Indexed => estimate_multi(&us, Some(total), &mut rng)?,
                    };
                    mse += rmse(&est, &us).powi(2);
                }
                rows.push(QpsBenchRow {
                    variant,
                    unitaries: count,
                    dim: 1 << n,
                    shots: total,
                    rmse: (mse / repeats as f64).sqrt(),
                });
            }
        }
    }
    Ok(rows)
}
