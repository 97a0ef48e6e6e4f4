//! Kraus channels and the policy for attaching them to circuits.
//!
//! Every elementary single-qubit gate is followed by amplitude damping and then a
//! bit flip on its qubit; every CNOT by two-qubit depolarizing noise on its pair.
//! Opaque oracle payloads stay noiseless.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::simulator::{pauli_matrix, Circuit};

/// Tolerance for `Σ E†E = I`.
pub const COMPLETENESS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub name: &'static str,
    /// Global qubits, local bit `k` of each operator acting on `qubits[k]`.
    pub qubits: Vec<usize>,
    pub operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(name: &'static str, qubits: Vec<usize>, operators: Vec<ComplexMatrix>) -> Result<KrausChannel> {
        let dim = 1usize << qubits.len();
        if operators.iter().any(|e| e.rows() != dim || e.cols() != dim) {
            return Err(Error::Shape(format!("{name}: operators must be {dim}x{dim}")));
        }
        let ch = KrausChannel {
            name,
            qubits,
            operators,
        };
        let defect = ch.completeness_defect();
        if defect > 1e3 * COMPLETENESS_TOL {
            return Err(Error::Shape(format!("{name}: Σ E†E differs from I by {defect:e}")));
        }
        Ok(ch)
    }

    /// `max |Σ E†E − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = 1usize << self.qubits.len();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &self.operators {
            sum = &sum + &(&e.dagger() * e);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn amplitude_damping_kraus(gamma: f64) -> Result<Vec<ComplexMatrix>> {
    check_prob("gamma", gamma)?;
    let e0 = ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, re((1.0 - gamma).sqrt())]])?;
    let e1 = ComplexMatrix::from_rows(&[vec![ZERO, re(gamma.sqrt())], vec![ZERO, ZERO]])?;
    Ok(vec![e0, e1])
}

pub fn bit_flip_kraus(p1: f64) -> Result<Vec<ComplexMatrix>> {
    check_prob("p1", p1)?;
    Ok(vec![
        ComplexMatrix::identity(2).scale(re((1.0 - p1).sqrt())),
        pauli_matrix('X').scale(re(p1.sqrt())),
    ])
}

/// Two-qubit depolarizing noise `ρ → (1 − p₂)ρ + p₂·I/4`: the identity with weight
/// `1 − 15p₂/16` and each of the 15 non-identity Pauli pairs with weight `p₂/16`.
pub fn depolarizing2_kraus(p2: f64) -> Result<Vec<ComplexMatrix>> {
    check_prob("p2", p2)?;
    let mut ops = Vec::with_capacity(16);
    for (k, (a, b)) in pauli_pairs().enumerate() {
        let w = if k == 0 { 1.0 - 15.0 * p2 / 16.0 } else { p2 / 16.0 };
        // local bit 0 is the first qubit of the pair, so it is the right kron factor
        ops.push(pauli_matrix(b).kron(&pauli_matrix(a)).scale(re(w.sqrt())));
    }
    Ok(ops)
}

/// `(P_first, P_second)` over `{I,X,Y,Z}²`, identity pair first.
fn pauli_pairs() -> impl Iterator<Item = (char, char)> {
    let ps = ['I', 'X', 'Y', 'Z'];
    ps.into_iter().flat_map(move |a| ps.into_iter().map(move |b| (a, b)))
}

pub fn amplitude_damping(qubit: usize, gamma: f64) -> Result<KrausChannel> {
    KrausChannel::new("amplitude_damping", vec![qubit], amplitude_damping_kraus(gamma)?)
}

pub fn bit_flip(qubit: usize, p1: f64) -> Result<KrausChannel> {
    KrausChannel::new("bit_flip", vec![qubit], bit_flip_kraus(p1)?)
}

pub fn depolarizing2(q0: usize, q1: usize, p2: f64) -> Result<KrausChannel> {
    if q0 == q1 {
        return Err(Error::Shape("depolarizing needs two distinct qubits".into()));
    }
    KrausChannel::new("depolarizing2", vec![q0, q1], depolarizing2_kraus(p2)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub enabled: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            gamma: 0.0,
            p1: 0.0,
            p2: 0.0,
            enabled: false,
        }
    }
}

impl NoiseModel {
    /// Rates used for the noisy demonstration runs.
    pub fn demo() -> NoiseModel {
        NoiseModel {
            gamma: 0.01,
            p1: 0.1,
            p2: 0.3,
            enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("gamma", self.gamma)?;
        check_prob("p1", self.p1)?;
        check_prob("p2", self.p2)
    }
}

/// Returns `c` with noise hooks after every elementary gate. A disabled model
/// returns the circuit unchanged.
pub fn attach_noise(c: &Circuit, model: &NoiseModel) -> Result<Circuit> {
    model.validate()?;
    let mut out = c.clone();
    if !model.enabled {
        return Ok(out);
    }
    for (i, g) in c.gates().iter().enumerate() {
        let qs = g.qubits();
        if g.is_single_qubit() {
            out.attach(i, amplitude_damping(qs[0], model.gamma)?)?;
            out.attach(i, bit_flip(qs[0], model.p1)?)?;
        } else if g.is_two_qubit() {
            out.attach(i, depolarizing2(qs[0], qs[1], model.p2)?)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{run_density, DensityMatrix, Gate};

    fn apply(ops: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for e in ops {
            out = &out + &(&(e * rho) * &e.dagger());
        }
        out
    }

    fn diag(xs: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diag(&xs.iter().map(|&x| re(x)).collect::<Vec<_>>())
    }

    #[test]
    fn completeness_everywhere() {
        for p in [0.0, 0.01, 0.1, 0.3, 0.5, 0.99, 1.0] {
            for ops in [amplitude_damping_kraus(p), bit_flip_kraus(p), depolarizing2_kraus(p)] {
                let ops = ops.unwrap();
                let d = ops[0].rows();
                let mut sum = ComplexMatrix::zeros(d, d);
                for e in &ops {
                    sum = &sum + &(&e.dagger() * e);
                }
                assert!(sum.max_abs_diff(&ComplexMatrix::identity(d)) < COMPLETENESS_TOL);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(amplitude_damping_kraus(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(bit_flip_kraus(1.5), Err(Error::Domain { .. })));
        assert!(matches!(depolarizing2_kraus(f64::NAN), Err(Error::Domain { .. })));
    }

    #[test]
    fn damping_closed_forms() {
        let one = diag(&[0.0, 1.0]);
        let out = apply(&amplitude_damping_kraus(0.01).unwrap(), &one);
        assert!(out.max_abs_diff(&diag(&[0.01, 0.99])) < 1e-15);
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let out = apply(&amplitude_damping_kraus(1.0).unwrap(), &plus);
        assert!(out.max_abs_diff(&diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn flip_closed_forms() {
        let zero = diag(&[1.0, 0.0]);
        assert!(apply(&bit_flip_kraus(0.1).unwrap(), &zero).max_abs_diff(&diag(&[0.9, 0.1])) < 1e-15);
        assert!(apply(&bit_flip_kraus(1.0).unwrap(), &zero).max_abs_diff(&diag(&[0.0, 1.0])) < 1e-15);
        assert!(apply(&bit_flip_kraus(0.0).unwrap(), &zero).max_abs_diff(&zero) < 1e-15);
    }

    #[test]
    fn depolarizing_matches_pauli_sum() {
        // (1 − p)ρ + p·I/4 written out through the twirl identity Σ_P PρP = 4·Tr(ρ)·I
        let mut rho = ComplexMatrix::zeros(4, 4);
        rho[(0, 0)] = ONE;
        let p = 0.3;
        let mut twirl = ComplexMatrix::zeros(4, 4);
        for a in ['I', 'X', 'Y', 'Z'] {
            for b in ['I', 'X', 'Y', 'Z'] {
                let pp = pauli_matrix(a).kron(&pauli_matrix(b));
                twirl = &twirl + &(&(&pp * &rho) * &pp);
            }
        }
        let want = &rho.scale(re(1.0 - p)) + &twirl.scale(re(p / 16.0));
        let got = apply(&depolarizing2_kraus(p).unwrap(), &rho);
        assert!(got.max_abs_diff(&want) < 1e-15);
        let closed = &rho.scale(re(1.0 - p)) + &ComplexMatrix::identity(4).scale(re(p / 4.0));
        assert!(got.max_abs_diff(&closed) < 1e-15);
    }

    #[test]
    fn full_depolarizing_on_entangled_state() {
        let h = 0.5;
        let bell =
            ComplexMatrix::from_real_rows(&[&[h, 0.0, 0.0, h], &[0.0; 4], &[0.0; 4], &[h, 0.0, 0.0, h]]).unwrap();
        let out = apply(&depolarizing2_kraus(1.0).unwrap(), &bell);
        assert!(out.max_abs_diff(&ComplexMatrix::identity(4).scale(re(0.25))) < 1e-12);
        assert!(apply(&depolarizing2_kraus(0.0).unwrap(), &bell).max_abs_diff(&bell) < 1e-15);
    }

    #[test]
    fn damping_runs_before_flip() {
        let mut c = Circuit::plain(1);
        c.push(Gate::X(0)).unwrap();
        let model = NoiseModel {
            gamma: 1.0,
            p1: 1.0,
            p2: 0.0,
            enabled: true,
        };
        let rho = run_density(&attach_noise(&c, &model).unwrap()).unwrap();
        // damp to |0⟩, then flip back to |1⟩
        assert!(rho.to_matrix().max_abs_diff(&diag(&[0.0, 1.0])) < 1e-15);
        let names: Vec<_> = attach_noise(&c, &model).unwrap().hooks()[0]
            .iter()
            .map(|h| h.name)
            .collect();
        assert_eq!(names, ["amplitude_damping", "bit_flip"]);
    }

    #[test]
    fn hook_counts() {
        let mut c = Circuit::plain(2);
        c.extend([Gate::Ry(1, 0.3), Gate::Ry(0, 0.2), Gate::Cnot { control: 1, target: 0 }])
            .unwrap();
        let dense = Gate::dense(vec![0, 1], ComplexMatrix::identity(4), "SELECT").unwrap();
        c.push(dense).unwrap();
        let noisy = attach_noise(&c, &NoiseModel::demo()).unwrap();
        let r = c.gate_count_report();
        assert_eq!(noisy.hook_count(), 2 * r.single_qubit + r.two_qubit);
        assert_eq!(r.opaque, 1);
        assert!(noisy.hooks()[3].is_empty());
        let off = attach_noise(&c, &NoiseModel::default()).unwrap();
        assert_eq!(off, c);
    }

    #[test]
    fn one_h_gets_two_hooks() {
        let mut c = Circuit::plain(1);
        c.push(Gate::H(0)).unwrap();
        let noisy = attach_noise(&c, &NoiseModel::demo()).unwrap();
        assert_eq!(noisy.gates().len(), 1);
        assert_eq!(noisy.hook_count(), 2);
        let rho: DensityMatrix = run_density(&noisy).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }
}
