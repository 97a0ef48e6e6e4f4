use crate::ansatz::{ansatz_unitary, AnsatzSpec};
use crate::encoding::{pauli_decompose, LcuDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixPencil};

/// A pencil with its block encodings and the two ansatz shapes. Parameter vectors
/// are `θ` (for `Q`) followed by `φ` (for `Z`).
#[derive(Debug, Clone)]
pub struct VqgeProblem {
    pencil: MatrixPencil,
    n_qubits: usize,
    spec_q: AnsatzSpec,
    spec_z: AnsatzSpec,
    lcu_a: LcuDecomposition,
    lcu_b: LcuDecomposition,
}

impl VqgeProblem {
    /// Pauli-decomposes both matrices. The pencil dimension must be a power of two.
    pub fn new(pencil: MatrixPencil, spec_q: AnsatzSpec, spec_z: AnsatzSpec) -> Result<VqgeProblem> {
        let lcu_a = pauli_decompose(pencil.a())?;
        let lcu_b = pauli_decompose(pencil.b())?;
        VqgeProblem::with_lcus(pencil, lcu_a, lcu_b, spec_q, spec_z)
    }

    /// Uses caller-supplied encodings; both are widened to a shared ancilla register.
    pub fn with_lcus(
        pencil: MatrixPencil,
        lcu_a: LcuDecomposition,
        lcu_b: LcuDecomposition,
        spec_q: AnsatzSpec,
        spec_z: AnsatzSpec,
    ) -> Result<VqgeProblem> {
        let dim = pencil.dim();
        if !dim.is_power_of_two() {
            return Err(Error::Shape(format!(
                "pencil dimension {dim} is not a power of two; embed it first"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        for (what, k) in [
            ("Q ansatz", spec_q.n_qubits),
            ("Z ansatz", spec_z.n_qubits),
            ("A encoding", lcu_a.n_qubits()),
            ("B encoding", lcu_b.n_qubits()),
        ] {
            if k != n {
                return Err(Error::Shape(format!("{what} acts on {k} qubits, pencil needs {n}")));
            }
        }
        spec_q.validate()?;
        spec_z.validate()?;
        let m = lcu_a.m().max(lcu_b.m());
        Ok(VqgeProblem {
            pencil,
            n_qubits: n,
            spec_q,
            spec_z,
            lcu_a: lcu_a.with_ancillas(m)?,
            lcu_b: lcu_b.with_ancillas(m)?,
        })
    }

    pub fn pencil(&self) -> &MatrixPencil {
        &self.pencil
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn spec_q(&self) -> &AnsatzSpec {
        &self.spec_q
    }

    pub fn spec_z(&self) -> &AnsatzSpec {
        &self.spec_z
    }

    pub fn lcu_a(&self) -> &LcuDecomposition {
        &self.lcu_a
    }

    pub fn lcu_b(&self) -> &LcuDecomposition {
        &self.lcu_b
    }

    /// Shared ancilla count.
    pub fn m(&self) -> usize {
        self.lcu_a.m()
    }

    pub fn parameter_count(&self) -> usize {
        self.spec_q.parameter_count() + self.spec_z.parameter_count()
    }

    pub fn split<'a>(&self, params: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if params.len() != self.parameter_count() {
            return Err(Error::Arity {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        Ok(params.split_at(self.spec_q.parameter_count()))
    }

    /// `(T, S) = (Q†AZ, Q†BZ)`.
    pub fn transformed(&self, params: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (theta, phi) = self.split(params)?;
        transformed(&self.pencil, &self.spec_q, theta, &self.spec_z, phi)
    }

    pub fn loss_exact(&self, params: &[f64]) -> Result<f64> {
        let (t, s) = self.transformed(params)?;
        Ok(lower_mass(&t) + lower_mass(&s))
    }
}

pub fn transformed(
    p: &MatrixPencil,
    spec_q: &AnsatzSpec,
    theta: &[f64],
    spec_z: &AnsatzSpec,
    phi: &[f64],
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if spec_q.n_qubits != spec_z.n_qubits || p.dim() != 1 << spec_q.n_qubits {
        return Err(Error::Shape(format!(
            "pencil of size {} with ansatzes on {} and {} qubits",
            p.dim(),
            spec_q.n_qubits,
            spec_z.n_qubits
        )));
    }
    let qd = ansatz_unitary(spec_q, theta)?.dagger();
    let z = ansatz_unitary(spec_z, phi)?;
    let t = &(&qd * p.a()) * &z;
    let s = &(&qd * p.b()) * &z;
    Ok((t, s))
}

/// `Σ_{i>j} |M_ij|²`.
pub fn lower_mass(m: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 1..m.rows() {
        for j in 0..i.min(m.cols()) {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Sum of squared strictly-lower entries of `Q†AZ` and `Q†BZ`.
pub fn loss_exact(
    p: &MatrixPencil,
    spec_q: &AnsatzSpec,
    theta: &[f64],
    spec_z: &AnsatzSpec,
    phi: &[f64],
) -> Result<f64> {
    let (t, s) = transformed(p, spec_q, theta, spec_z, phi)?;
    Ok(lower_mass(&t) + lower_mass(&s))
}
