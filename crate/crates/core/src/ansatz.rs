//! Layered parameterized circuits used for `Q(θ)` and `Z(φ)`.
//!
//! Qubit `k` of the fragment is wire `j_k` of the drawings; rotation columns run
//! from the top wire (`n−1`) down to `j_0`. A layer is one full pattern, and layers
//! repeat back to back.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::rng::Rng;
use crate::simulator::{apply_gate, Circuit, Gate};

/// Largest fragment `ansatz_unitary` will expand densely.
pub const UNITARY_QUBIT_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Rotation column, then a CNOT ladder `n−1 → n−2 → … → 0`.
    HardwareEfficient,
    /// Along the ladder, two rotations on the pair before and after each CNOT.
    DressedCnot,
    /// The hardware-efficient ladder closed by a CNOT from qubit 0 onto qubit `n−1`.
    Cyclic,
    /// Ladder, a second rotation column, then CNOTs from qubit 0 onto every other qubit.
    CnotSpecific,
    /// No gates and no parameters.
    Identity,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::HardwareEfficient => "hwe",
            Architecture::DressedCnot => "dressed",
            Architecture::Cyclic => "cyclic",
            Architecture::CnotSpecific => "fanin",
            Architecture::Identity => "identity",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "hwe" | "a" => Architecture::HardwareEfficient,
            "dressed" | "b" => Architecture::DressedCnot,
            "cyclic" | "c" => Architecture::Cyclic,
            "fanin" | "d" => Architecture::CnotSpecific,
            "identity" | "none" => Architecture::Identity,
            other => return Err(Error::Config(format!("unknown ansatz architecture '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    /// `R_y(θ)`, one angle per box; enough for real pencils.
    Ry,
    /// `R_z(a)·R_y(b)·R_z(c)`, three angles per box.
    RzRyRz,
}

impl Rotation {
    pub fn angles(self) -> usize {
        match self {
            Rotation::Ry => 1,
            Rotation::RzRyRz => 3,
        }
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rotation::Ry => "ry",
            Rotation::RzRyRz => "rzryrz",
        })
    }
}

impl FromStr for Rotation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ry" => Ok(Rotation::Ry),
            "rzryrz" | "zyz" => Ok(Rotation::RzRyRz),
            other => Err(Error::Config(format!("unknown rotation kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnsatzSpec {
    pub architecture: Architecture,
    pub n_qubits: usize,
    pub layers: usize,
    pub rotation: Rotation,
}

/// One step of a layer pattern before angles are bound.
#[derive(Debug, Clone, Copy)]
enum Slot {
    U(usize),
    Cnot(usize, usize),
}

impl AnsatzSpec {
    pub fn new(architecture: Architecture, n_qubits: usize, layers: usize, rotation: Rotation) -> Result<AnsatzSpec> {
        let spec = AnsatzSpec {
            architecture,
            n_qubits,
            layers,
            rotation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity(n_qubits: usize) -> AnsatzSpec {
        AnsatzSpec {
            architecture: Architecture::Identity,
            n_qubits,
            layers: 1,
            rotation: Rotation::Ry,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::Config("ansatz needs at least one qubit".into()));
        }
        if self.layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        if self.architecture == Architecture::DressedCnot && self.n_qubits < 2 {
            return Err(Error::Config("the dressed-CNOT ansatz needs two or more qubits".into()));
        }
        Ok(())
    }

    fn layer_pattern(&self) -> Vec<Slot> {
        let n = self.n_qubits;
        let column = || (0..n).rev().map(Slot::U);
        let ladder = || (1..n).rev().map(|k| Slot::Cnot(k, k - 1));
        match self.architecture {
            Architecture::Identity => Vec::new(),
            Architecture::HardwareEfficient => column().chain(ladder()).collect(),
            Architecture::Cyclic => {
                let closing = (n >= 2).then_some(Slot::Cnot(0, n - 1));
                column().chain(ladder()).chain(closing).collect()
            }
            Architecture::CnotSpecific => column()
                .chain(ladder())
                .chain(column())
                .chain((1..n).rev().map(|k| Slot::Cnot(0, k)))
                .collect(),
            Architecture::DressedCnot => (1..n)
                .rev()
                .flat_map(|k| {
                    [
                        Slot::U(k),
                        Slot::U(k - 1),
                        Slot::Cnot(k, k - 1),
                        Slot::U(k),
                        Slot::U(k - 1),
                    ]
                })
                .collect(),
        }
    }

    /// Rotation boxes in one layer.
    pub fn boxes_per_layer(&self) -> usize {
        self.layer_pattern().iter().filter(|s| matches!(s, Slot::U(_))).count()
    }

    pub fn parameter_count(&self) -> usize {
        self.boxes_per_layer() * self.layers * self.rotation.angles()
    }

    /// Bound gates with fragment qubit `k` placed on `qubits[k]`.
    pub fn gates_on(&self, params: &[f64], qubits: &[usize]) -> Result<Vec<Gate>> {
        self.validate()?;
        if params.len() != self.parameter_count() {
            return Err(Error::Arity {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        if qubits.len() != self.n_qubits {
            return Err(Error::Shape(format!(
                "ansatz on {} qubits placed on {}",
                self.n_qubits,
                qubits.len()
            )));
        }
        let pattern = self.layer_pattern();
        let mut angles = params.iter().copied();
        let mut gates = Vec::new();
        for _ in 0..self.layers {
            for slot in &pattern {
                match *slot {
                    Slot::Cnot(c, t) => gates.push(Gate::Cnot {
                        control: qubits[c],
                        target: qubits[t],
                    }),
                    Slot::U(k) => {
                        let q = qubits[k];
                        match self.rotation {
                            Rotation::Ry => gates.push(Gate::Ry(q, angles.next().unwrap())),
                            Rotation::RzRyRz => {
                                let (a, b, c) =
                                    (angles.next().unwrap(), angles.next().unwrap(), angles.next().unwrap());
                                // rightmost factor acts first
                                gates.extend([Gate::Rz(q, c), Gate::Ry(q, b), Gate::Rz(q, a)]);
                            }
                        }
                    }
                }
            }
        }
        Ok(gates)
    }

    /// Gates of the adjoint fragment: reversed order, inverted gates.
    pub fn adjoint_gates_on(&self, params: &[f64], qubits: &[usize]) -> Result<Vec<Gate>> {
        Ok(self.gates_on(params, qubits)?.iter().rev().map(Gate::adjoint).collect())
    }

    /// Uniform angles on `[−π, π)`.
    pub fn random_params(&self, rng: &mut Rng) -> Vec<f64> {
        use std::f64::consts::PI;
        (0..self.parameter_count()).map(|_| rng.random_range(-PI..PI)).collect()
    }
}

impl fmt::Display for AnsatzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}q/{}L/{}",
            self.architecture, self.n_qubits, self.layers, self.rotation
        )
    }
}

/// The fragment as a standalone circuit on `n` qubits.
pub fn bind(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    let mut c = Circuit::plain(spec.n_qubits);
    let qubits: Vec<usize> = (0..spec.n_qubits).collect();
    c.extend(spec.gates_on(params, &qubits)?)?;
    Ok(c)
}

/// Dense matrix of a gate list on `n` qubits, one basis column at a time.
pub fn gates_unitary(gates: &[Gate], n: usize) -> Result<ComplexMatrix> {
    if n > UNITARY_QUBIT_CAP {
        return Err(Error::Capacity {
            what: "dense ansatz qubits",
            got: n,
            cap: UNITARY_QUBIT_CAP,
        });
    }
    let dim = 1usize << n;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut col = vec![ZERO; dim];
        col[j] = crate::linalg::ONE;
        for g in gates {
            apply_gate(&mut col, g);
        }
        u.set_column(j, &col);
    }
    Ok(u)
}

pub fn ansatz_unitary(spec: &AnsatzSpec, params: &[f64]) -> Result<ComplexMatrix> {
    if spec.n_qubits > UNITARY_QUBIT_CAP {
        return Err(Error::Capacity {
            what: "dense ansatz qubits",
            got: spec.n_qubits,
            cap: UNITARY_QUBIT_CAP,
        });
    }
    let qubits: Vec<usize> = (0..spec.n_qubits).collect();
    gates_unitary(&spec.gates_on(params, &qubits)?, spec.n_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul, C64, ONE};
    use crate::rng::stream;
    use crate::simulator::{run_statevector, ry_matrix, StateVector};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const ALL: [Architecture; 4] = [
        Architecture::HardwareEfficient,
        Architecture::DressedCnot,
        Architecture::Cyclic,
        Architecture::CnotSpecific,
    ];

    fn spec(a: Architecture, n: usize, layers: usize, r: Rotation) -> AnsatzSpec {
        AnsatzSpec::new(a, n, layers, r).unwrap()
    }

    #[test]
    fn parameter_counts() {
        use Architecture::*;
        assert_eq!(spec(HardwareEfficient, 5, 1, Rotation::Ry).parameter_count(), 5);
        assert_eq!(spec(HardwareEfficient, 5, 1, Rotation::RzRyRz).parameter_count(), 15);
        assert_eq!(spec(CnotSpecific, 5, 2, Rotation::Ry).parameter_count(), 20);
        assert_eq!(spec(Cyclic, 5, 1, Rotation::Ry).parameter_count(), 5);
        // two boxes before and two after each of the four CNOTs
        assert_eq!(spec(DressedCnot, 5, 1, Rotation::Ry).parameter_count(), 16);
        assert_eq!(AnsatzSpec::identity(3).parameter_count(), 0);
        for a in ALL {
            for n in 2..6 {
                assert!(spec(a, n, 1, Rotation::Ry).parameter_count() > 0);
            }
        }
        assert!(AnsatzSpec::new(DressedCnot, 1, 1, Rotation::Ry).is_err());
        assert!(AnsatzSpec::new(HardwareEfficient, 2, 0, Rotation::Ry).is_err());
    }

    #[test]
    fn gate_order_follows_the_drawings() {
        let s = spec(Architecture::CnotSpecific, 3, 1, Rotation::Ry);
        let g = s.gates_on(&[1., 2., 3., 4., 5., 6.], &[0, 1, 2]).unwrap();
        let want = vec![
            Gate::Ry(2, 1.),
            Gate::Ry(1, 2.),
            Gate::Ry(0, 3.),
            Gate::Cnot { control: 2, target: 1 },
            Gate::Cnot { control: 1, target: 0 },
            Gate::Ry(2, 4.),
            Gate::Ry(1, 5.),
            Gate::Ry(0, 6.),
            Gate::Cnot { control: 0, target: 2 },
            Gate::Cnot { control: 0, target: 1 },
        ];
        assert_eq!(g, want);
        let c = spec(Architecture::Cyclic, 3, 1, Rotation::Ry)
            .gates_on(&[0.; 3], &[0, 1, 2])
            .unwrap();
        assert_eq!(c.last(), Some(&Gate::Cnot { control: 0, target: 2 }));
        let d = spec(Architecture::DressedCnot, 2, 1, Rotation::Ry)
            .gates_on(&[1., 2., 3., 4.], &[0, 1])
            .unwrap();
        assert_eq!(
            d,
            vec![
                Gate::Ry(1, 1.),
                Gate::Ry(0, 2.),
                Gate::Cnot { control: 1, target: 0 },
                Gate::Ry(1, 3.),
                Gate::Ry(0, 4.),
            ]
        );
    }

    #[test]
    fn zyz_box_order() {
        let s = spec(Architecture::HardwareEfficient, 1, 1, Rotation::RzRyRz);
        assert_eq!(
            s.gates_on(&[0.1, 0.2, 0.3], &[0]).unwrap(),
            vec![Gate::Rz(0, 0.3), Gate::Ry(0, 0.2), Gate::Rz(0, 0.1)]
        );
    }

    #[test]
    fn zero_angles_leave_the_cnot_skeleton() {
        let s = spec(Architecture::HardwareEfficient, 2, 1, Rotation::Ry);
        let u = ansatz_unitary(&s, &[0.0, 0.0]).unwrap();
        // CNOT control 1 target 0: swaps |10⟩ and |11⟩
        let mut want = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            want[(r, c)] = ONE;
        }
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn single_ry_closed_form() {
        let s = spec(Architecture::HardwareEfficient, 1, 1, Rotation::Ry);
        let u = ansatz_unitary(&s, &[PI]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[0., -1.], &[1., 0.]]).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);
        assert!(u.max_abs_diff(&ry_matrix(PI)) < 1e-15);
    }

    #[test]
    fn empty_fragment_is_identity() {
        let u = ansatz_unitary(&AnsatzSpec::identity(2), &[]).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert!(gates_unitary(&[], 7).is_err());
    }

    #[test]
    fn dense_matches_simulator_columns() {
        let s = spec(Architecture::Cyclic, 2, 2, Rotation::RzRyRz);
        let p = s.random_params(&mut stream(4, &[0]));
        let u = ansatz_unitary(&s, &p).unwrap();
        let c = bind(&s, &p).unwrap();
        for j in 0..4 {
            let mut st = StateVector::basis(2, j);
            st.evolve(&c).unwrap();
            for (i, a) in st.amplitudes().iter().enumerate() {
                assert!((a - u[(i, j)]).norm() < 1e-12);
            }
        }
        // column 0 is what a run from |00⟩ produces
        let s0 = run_statevector(&c).unwrap();
        assert!((s0.amplitudes()[3] - u[(3, 0)]).norm() < 1e-12);
    }

    #[test]
    fn adjoint_inverts() {
        let s = spec(Architecture::DressedCnot, 3, 2, Rotation::RzRyRz);
        let p = s.random_params(&mut stream(8, &[0]));
        let u = ansatz_unitary(&s, &p).unwrap();
        let ud = gates_unitary(&s.adjoint_gates_on(&p, &[0, 1, 2]).unwrap(), 3).unwrap();
        assert!(matmul(&ud, &u).unwrap().max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn arity_is_checked() {
        let s = spec(Architecture::HardwareEfficient, 3, 1, Rotation::Ry);
        assert!(matches!(bind(&s, &[0.0; 2]), Err(Error::Arity { expected: 3, got: 2 })));
        assert!(bind(&s, &[0.0; 3]).is_ok());
        assert!(matches!(bind(&s, &[0.0; 4]), Err(Error::Arity { .. })));
    }

    #[test]
    fn config_strings() {
        assert_eq!("hwe".parse::<Architecture>().unwrap(), Architecture::HardwareEfficient);
        assert_eq!("fanin".parse::<Architecture>().unwrap(), Architecture::CnotSpecific);
        assert_eq!("rzryrz".parse::<Rotation>().unwrap(), Rotation::RzRyRz);
        assert!("ring".parse::<Architecture>().is_err());
    }

    #[test]
    fn single_qubit_zyz_covers_the_sphere() {
        let s = spec(Architecture::HardwareEfficient, 1, 1, Rotation::RzRyRz);
        let mut rng = stream(21, &[0]);
        let us: Vec<ComplexMatrix> = (0..1000)
            .map(|_| ansatz_unitary(&s, &s.random_params(&mut rng)).unwrap())
            .collect();
        // Bloch vector of U|0⟩ spreads over both hemispheres and around the axis
        let z: Vec<f64> = us.iter().map(|u| u[(0, 0)].norm_sqr() - u[(1, 0)].norm_sqr()).collect();
        assert!(z.iter().any(|&v| v > 0.9) && z.iter().any(|&v| v < -0.9));
        // no unitary sits within 1e-6 (up to phase) of more than 1% of the samples
        for u in us.iter().take(50) {
            let close = us
                .iter()
                .filter(|v| {
                    let ov: C64 = (0..2)
                        .flat_map(|i| (0..2).map(move |j| (i, j)))
                        .map(|(i, j)| u[(i, j)].conj() * v[(i, j)])
                        .sum();
                    1.0 - ov.norm() / 2.0 < 1e-12
                })
                .count();
            assert!(close <= 10);
        }
    }

    proptest! {
        #[test]
        fn bound_circuits_are_unitary(seed in 0u64..500, n in 1usize..4, layers in 1usize..3, arch in 0usize..4, zyz: bool) {
            let a = ALL[arch];
            prop_assume!(!(a == Architecture::DressedCnot && n < 2));
            let r = if zyz { Rotation::RzRyRz } else { Rotation::Ry };
            let s = spec(a, n, layers, r);
            let p = s.random_params(&mut stream(seed, &[1]));
            prop_assert!(ansatz_unitary(&s, &p).unwrap().unitarity_defect() < 1e-10);
            // same inputs, same gates
            prop_assert_eq!(bind(&s, &p).unwrap(), bind(&s, &p).unwrap());
        }
    }
}
