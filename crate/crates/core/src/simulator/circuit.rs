use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, ComplexMatrix, C64, I, ONE, ZERO};
use crate::noise::KrausChannel;

/// Unitary payloads must satisfy `‖U†U − I‖_max` below this.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegisterName {
    Work,
    Idx,
    Ancilla,
    Augmented,
}

impl fmt::Display for RegisterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegisterName::Work => "work",
            RegisterName::Idx => "idx",
            RegisterName::Ancilla => "ancilla",
            RegisterName::Augmented => "augmented",
        };
        f.write_str(s)
    }
}

/// A named block of consecutive qubits. Qubit `offset + k` is bit `offset + k` of the
/// global basis index, so each register reads little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Register {
    pub name: RegisterName,
    pub size: usize,
    pub offset: usize,
}

impl Register {
    pub fn qubit(&self, k: usize) -> usize {
        assert!(k < self.size, "qubit {k} outside register {}", self.name);
        self.offset + k
    }

    pub fn qubits(&self) -> Vec<usize> {
        (self.offset..self.offset + self.size).collect()
    }

    /// Value of this register inside a global basis index.
    pub fn extract(&self, basis_index: u64) -> u64 {
        if self.size == 0 {
            return 0;
        }
        (basis_index >> self.offset) & ((1u64 << self.size) - 1)
    }

    pub fn mask(&self) -> u64 {
        if self.size == 0 {
            0
        } else {
            ((1u64 << self.size) - 1) << self.offset
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    /// `matrix` on `targets` when every control qubit reads its required value.
    /// Local index bit `k` of the matrix corresponds to `targets[k]`.
    Controlled {
        controls: Vec<(usize, bool)>,
        targets: Vec<usize>,
        matrix: ComplexMatrix,
        label: String,
    },
    Dense {
        targets: Vec<usize>,
        matrix: ComplexMatrix,
        label: String,
    },
}

fn m2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![a, b, c, d]).expect("2x2")
}

pub fn ry_matrix(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    m2(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
}

pub fn rz_matrix(theta: f64) -> ComplexMatrix {
    let h = theta / 2.0;
    m2(C64::from_polar(1.0, -h), ZERO, ZERO, C64::from_polar(1.0, h))
}

pub fn pauli_matrix(p: char) -> ComplexMatrix {
    match p {
        'I' => ComplexMatrix::identity(2),
        'X' => m2(ZERO, ONE, ONE, ZERO),
        'Y' => m2(ZERO, -I, I, ZERO),
        'Z' => m2(ONE, ZERO, ZERO, -ONE),
        other => panic!("unknown Pauli '{other}'"),
    }
}

impl Gate {
    pub fn controlled(
        controls: Vec<(usize, bool)>,
        targets: Vec<usize>,
        matrix: ComplexMatrix,
        label: impl Into<String>,
    ) -> Result<Gate> {
        check_payload(&targets, &matrix)?;
        Ok(Gate::Controlled {
            controls,
            targets,
            matrix,
            label: label.into(),
        })
    }

    pub fn dense(targets: Vec<usize>, matrix: ComplexMatrix, label: impl Into<String>) -> Result<Gate> {
        check_payload(&targets, &matrix)?;
        Ok(Gate::Dense {
            targets,
            matrix,
            label: label.into(),
        })
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::S(q) | Gate::Sdg(q) => vec![*q],
            Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Controlled { controls, targets, .. } => {
                controls.iter().map(|c| c.0).chain(targets.iter().copied()).collect()
            }
            Gate::Dense { targets, .. } => targets.clone(),
        }
    }

    pub fn is_single_qubit(&self) -> bool {
        matches!(
            self,
            Gate::H(_) | Gate::X(_) | Gate::Y(_) | Gate::Z(_) | Gate::S(_) | Gate::Sdg(_) | Gate::Ry(..) | Gate::Rz(..)
        )
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// Oracle payloads simulated as opaque blocks.
    pub fn is_opaque(&self) -> bool {
        matches!(self, Gate::Controlled { .. } | Gate::Dense { .. })
    }

    /// 2×2 matrix of an elementary single-qubit gate.
    pub fn single_qubit_matrix(&self) -> Option<ComplexMatrix> {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Some(match self {
            Gate::H(_) => m2(h, h, h, -h),
            Gate::X(_) => pauli_matrix('X'),
            Gate::Y(_) => pauli_matrix('Y'),
            Gate::Z(_) => pauli_matrix('Z'),
            Gate::S(_) => m2(ONE, ZERO, ZERO, I),
            Gate::Sdg(_) => m2(ONE, ZERO, ZERO, -I),
            Gate::Ry(_, t) => ry_matrix(*t),
            Gate::Rz(_, t) => rz_matrix(*t),
            _ => return None,
        })
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(*q),
            Gate::Sdg(q) => Gate::S(*q),
            Gate::Ry(q, t) => Gate::Ry(*q, -t),
            Gate::Rz(q, t) => Gate::Rz(*q, -t),
            Gate::Controlled {
                controls,
                targets,
                matrix,
                label,
            } => Gate::Controlled {
                controls: controls.clone(),
                targets: targets.clone(),
                matrix: adjoint(matrix),
                label: format!("{label}†"),
            },
            Gate::Dense { targets, matrix, label } => Gate::Dense {
                targets: targets.clone(),
                matrix: adjoint(matrix),
                label: format!("{label}†"),
            },
            other => other.clone(),
        }
    }

    /// The same operation with one more control qubit.
    pub fn with_control(&self, control: (usize, bool)) -> Gate {
        match self {
            Gate::Cnot { control: c, target } => Gate::Controlled {
                controls: vec![control, (*c, true)],
                targets: vec![*target],
                matrix: pauli_matrix('X'),
                label: "CNOT".into(),
            },
            Gate::Controlled {
                controls,
                targets,
                matrix,
                label,
            } => Gate::Controlled {
                controls: std::iter::once(control).chain(controls.iter().copied()).collect(),
                targets: targets.clone(),
                matrix: matrix.clone(),
                label: label.clone(),
            },
            Gate::Dense { targets, matrix, label } => Gate::Controlled {
                controls: vec![control],
                targets: targets.clone(),
                matrix: matrix.clone(),
                label: label.clone(),
            },
            single => Gate::Controlled {
                controls: vec![control],
                targets: single.qubits(),
                matrix: single.single_qubit_matrix().expect("elementary gate"),
                label: format!("{single:?}"),
            },
        }
    }

    /// Renames qubits through `map` (local index → global qubit).
    pub fn remap(&self, map: &[usize]) -> Gate {
        let f = |q: &usize| map[*q];
        match self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Y(q) => Gate::Y(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::Ry(q, t) => Gate::Ry(f(q), *t),
            Gate::Rz(q, t) => Gate::Rz(f(q), *t),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(control),
                target: f(target),
            },
            Gate::Controlled {
                controls,
                targets,
                matrix,
                label,
            } => Gate::Controlled {
                controls: controls.iter().map(|&(q, v)| (map[q], v)).collect(),
                targets: targets.iter().map(f).collect(),
                matrix: matrix.clone(),
                label: label.clone(),
            },
            Gate::Dense { targets, matrix, label } => Gate::Dense {
                targets: targets.iter().map(f).collect(),
                matrix: matrix.clone(),
                label: label.clone(),
            },
        }
    }
}

fn check_payload(targets: &[usize], matrix: &ComplexMatrix) -> Result<()> {
    let dim = 1usize << targets.len();
    if matrix.rows() != dim || matrix.cols() != dim {
        return Err(Error::Shape(format!(
            "payload is {}x{} but {} targets need {dim}x{dim}",
            matrix.rows(),
            matrix.cols(),
            targets.len()
        )));
    }
    let defect = matrix.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::Shape(format!("payload is not unitary (defect {defect:.3e})")));
    }
    Ok(())
}

/// Gate sequence over declared registers with optional noise after each gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    registers: Vec<Register>,
    n_qubits: usize,
    gates: Vec<Gate>,
    hooks: Vec<Vec<KrausChannel>>,
}

impl Circuit {
    /// Registers are laid out in the order given, starting at qubit 0.
    pub fn new(layout: &[(RegisterName, usize)]) -> Result<Circuit> {
        let mut registers = Vec::with_capacity(layout.len());
        let mut offset = 0;
        for &(name, size) in layout {
            if registers.iter().any(|r: &Register| r.name == name) {
                return Err(Error::Shape(format!("register {name} declared twice")));
            }
            registers.push(Register { name, size, offset });
            offset += size;
        }
        Ok(Circuit {
            registers,
            n_qubits: offset,
            gates: Vec::new(),
            hooks: Vec::new(),
        })
    }

    /// A circuit with a single work register of `n` qubits.
    pub fn plain(n: usize) -> Circuit {
        Circuit::new(&[(RegisterName::Work, n)]).expect("single register")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: RegisterName) -> Option<Register> {
        self.registers.iter().copied().find(|r| r.name == name)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn hooks(&self) -> &[Vec<KrausChannel>] {
        &self.hooks
    }

    pub fn has_noise(&self) -> bool {
        self.hooks.iter().any(|h| !h.is_empty())
    }

    pub fn hook_count(&self) -> usize {
        self.hooks.iter().map(Vec::len).sum()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::Shape(format!(
                    "gate touches qubit {q} but circuit has {}",
                    self.n_qubits
                )));
            }
            if qs[..k].contains(&q) {
                return Err(Error::Shape(format!("gate repeats qubit {q}")));
            }
        }
        self.gates.push(gate);
        self.hooks.push(Vec::new());
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Attaches a channel to run right after gate `index`.
    pub fn attach(&mut self, index: usize, channel: KrausChannel) -> Result<()> {
        if index >= self.gates.len() {
            return Err(Error::Index {
                index,
                dim: self.gates.len(),
            });
        }
        if channel.qubits.iter().any(|&q| q >= self.n_qubits) {
            return Err(Error::Shape("channel qubit outside circuit".into()));
        }
        self.hooks[index].push(channel);
        Ok(())
    }

    pub fn without_noise(&self) -> Circuit {
        Circuit {
            hooks: vec![Vec::new(); self.gates.len()],
            ..self.clone()
        }
    }

    pub fn gate_count_report(&self) -> GateCountReport {
        let mut r = GateCountReport {
            qubits: self.n_qubits,
            ..Default::default()
        };
        for g in &self.gates {
            if g.is_single_qubit() {
                r.single_qubit += 1;
            } else if g.is_two_qubit() {
                r.two_qubit += 1;
            } else {
                r.opaque += 1;
            }
        }
        r
    }
}

/// Elementary gate tally. Oracle payloads are counted once each under `opaque`
/// since they are simulated as dense blocks rather than compiled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCountReport {
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub qubits: usize,
    pub opaque: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_offsets_partition_qubits() {
        let c = Circuit::new(&[
            (RegisterName::Work, 2),
            (RegisterName::Idx, 1),
            (RegisterName::Ancilla, 3),
            (RegisterName::Augmented, 2),
        ])
        .unwrap();
        assert_eq!(c.n_qubits(), 8);
        let aug = c.register(RegisterName::Augmented).unwrap();
        assert_eq!(aug.offset, 6);
        assert_eq!(aug.extract(0b1000_0000), 0b10);
        let mut covered = 0u64;
        for r in c.registers() {
            assert_eq!(covered & r.mask(), 0);
            covered |= r.mask();
        }
        assert_eq!(covered, 0xFF);
    }

    #[test]
    fn push_validates_qubits() {
        let mut c = Circuit::plain(2);
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 0 }).is_ok());
    }

    #[test]
    fn non_unitary_payload_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[1., 1.], &[0., 1.]]).unwrap();
        assert!(Gate::dense(vec![0], m, "bad").is_err());
    }

    #[test]
    fn counts_single_h() {
        let mut c = Circuit::plain(1);
        c.push(Gate::H(0)).unwrap();
        assert_eq!(
            c.gate_count_report(),
            GateCountReport {
                single_qubit: 1,
                two_qubit: 0,
                qubits: 1,
                opaque: 0
            }
        );
    }

    #[test]
    fn rotation_adjoints() {
        let g = Gate::Ry(0, 0.3);
        let m = g.single_qubit_matrix().unwrap();
        let ma = g.adjoint().single_qubit_matrix().unwrap();
        assert!(ma.max_abs_diff(&adjoint(&m)) < 1e-15);
        assert_eq!(Gate::S(1).adjoint(), Gate::Sdg(1));
    }
}
