use std::collections::HashMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use vqge_core::ansatz::{ansatz_unitary, AnsatzSpec};
use vqge_core::cli::{loss_mode, solve_pencil, Command, EigenFlag, RawConfig};
use vqge_core::encoding::pauli_decompose as core_pauli_decompose;
use vqge_core::linalg::{classical_generalized_eigenvalues, ComplexMatrix, MatrixPencil};
use vqge_core::pencils;
use vqge_core::rng::{stream, INSTANCE};
use vqge_core::vqge::loss_exact;

create_exception!(vqge, VqgeError, PyException);

fn err(e: vqge_core::Error) -> PyErr {
    VqgeError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// A square pair `(A, B)`; matrices are lists of rows of complex numbers.
#[pyclass(name = "Pencil", module = "vqge")]
struct PyPencil {
    inner: MatrixPencil,
}

#[pymethods]
impl PyPencil {
    #[new]
    fn new(a: Vec<Vec<Complex64>>, b: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let inner = MatrixPencil::new(to_matrix(a)?, to_matrix(b)?).map_err(err)?;
        Ok(PyPencil { inner })
    }

    #[staticmethod]
    fn example1() -> Self {
        PyPencil {
            inner: pencils::example1(),
        }
    }

    /// Complex Gaussian pair, drawn from the same stream the CLI uses for `seed`.
    #[staticmethod]
    #[pyo3(signature = (dim, seed=1, real=false))]
    fn random(dim: usize, seed: u64, real: bool) -> Self {
        let mut rng = stream(seed, &[INSTANCE]);
        let inner = if real {
            pencils::random_real_pencil(dim, &mut rng)
        } else {
            pencils::random_pencil(dim, &mut rng)
        };
        PyPencil { inner }
    }

    #[staticmethod]
    #[pyo3(signature = (dim, seed=1))]
    fn structured(dim: usize, seed: u64) -> Self {
        let mut rng = stream(seed, &[INSTANCE]);
        PyPencil {
            inner: pencils::structured_pencil(dim, &mut rng),
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.a())
    }

    #[getter]
    fn b(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.b())
    }

    /// Classical reference: `(finite eigenvalues, infinite count, degenerate)`.
    #[pyo3(signature = (rank_tol=1e-10))]
    fn eigenvalues(&self, rank_tol: f64) -> PyResult<(Vec<Complex64>, usize, bool)> {
        let r = classical_generalized_eigenvalues(&self.inner, rank_tol).map_err(err)?;
        Ok((r.eigenvalues, r.infinite_count, r.degenerate))
    }

    fn __repr__(&self) -> String {
        format!("Pencil(dim={})", self.inner.dim())
    }
}

#[pyclass(name = "Ansatz", module = "vqge")]
struct PyAnsatz {
    inner: AnsatzSpec,
}

#[pymethods]
impl PyAnsatz {
    #[new]
    #[pyo3(signature = (n_qubits, architecture="fanin", layers=2, rotation="rzryrz"))]
    fn new(n_qubits: usize, architecture: &str, layers: usize, rotation: &str) -> PyResult<Self> {
        let spec = AnsatzSpec::new(
            architecture.parse().map_err(err)?,
            n_qubits,
            layers,
            rotation.parse().map_err(err)?,
        )
        .map_err(err)?;
        Ok(PyAnsatz { inner: spec })
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn unitary(&self, params: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(to_rows(&ansatz_unitary(&self.inner, &params).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "Ansatz(n_qubits={}, architecture='{}', layers={}, rotation='{}')",
            s.n_qubits, s.architecture, s.layers, s.rotation
        )
    }
}

/// `Σ_{i>j} |(Q†AZ)_ij|² + |(Q†BZ)_ij|²` with `Q` and `Z` from the two ansätze.
#[pyfunction]
fn loss(pencil: &PyPencil, q: &PyAnsatz, theta: Vec<f64>, z: &PyAnsatz, phi: Vec<f64>) -> PyResult<f64> {
    loss_exact(&pencil.inner, &q.inner, &theta, &z.inner, &phi).map_err(err)
}

#[pyclass(name = "SolveResult", module = "vqge", get_all)]
struct PySolveResult {
    converged: bool,
    final_loss: f64,
    iterations: usize,
    restarts: usize,
    params: Vec<f64>,
    losses: Vec<f64>,
    eigenvalues: Vec<Complex64>,
    infinite_count: usize,
    degenerate: bool,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(converged={}, final_loss={:.3e}, eigenvalues={}, infinite_count={})",
            if self.converged { "True" } else { "False" },
            self.final_loss,
            self.eigenvalues.len(),
            self.infinite_count
        )
    }
}

/// Runs the variational solver. `options` takes the CLI config keys, e.g.
/// `{"ansatz": "hwe", "opt.learning_rate": 0.1}`; the `pencil*` keys are ignored.
#[pyfunction]
#[pyo3(signature = (pencil, options=None, noisy=false))]
fn solve(
    py: Python<'_>,
    pencil: &PyPencil,
    options: Option<HashMap<String, Bound<'_, PyAny>>>,
    noisy: bool,
) -> PyResult<PySolveResult> {
    let mut raw = RawConfig::default();
    for (k, v) in options.unwrap_or_default() {
        let text = match v.extract::<bool>() {
            Ok(b) => b.to_string(),
            Err(_) => v.str()?.to_string(),
        };
        raw.set(&k, &text, "python").map_err(err)?;
    }
    let command = if noisy { Command::NoisySolve } else { Command::Solve };
    let cfg = raw.resolve(command).map_err(err)?;
    let p = pencil.inner.clone();
    let (trace, rows) = py.detach(|| solve_pencil(&cfg, &p, &loss_mode(&cfg))).map_err(err)?;
    let best = trace.best_run();
    let pick = |f: EigenFlag| rows.iter().filter(move |r| r.flag == f);
    Ok(PySolveResult {
        converged: trace.converged(),
        final_loss: trace.final_loss(),
        iterations: best.records.last().map_or(0, |r| r.iteration),
        restarts: trace.restarts.len(),
        params: trace.final_params().to_vec(),
        losses: best.records.iter().map(|r| r.loss).collect(),
        eigenvalues: pick(EigenFlag::Finite).map(|r| r.lambda).collect(),
        infinite_count: pick(EigenFlag::Infinite).count(),
        degenerate: pick(EigenFlag::Degenerate).next().is_some(),
    })
}

/// Pauli terms `(word, coefficient)` of a `2^n` square matrix, most significant qubit first.
#[pyfunction]
fn pauli_decompose(matrix: Vec<Vec<Complex64>>) -> PyResult<Vec<(String, Complex64)>> {
    let lcu = core_pauli_decompose(&to_matrix(matrix)?).map_err(err)?;
    Ok(lcu.terms().iter().map(|t| (t.label(), t.coefficient)).collect())
}

type QpsRow = (String, usize, usize, u64, f64);

/// Rows `(variant, unitaries, dim, shots, rmse)` of the process-snapshot benchmark.
#[pyfunction]
#[pyo3(signature = (sets, shots, repeats=4, seed=1))]
fn qps_bench(
    py: Python<'_>,
    sets: Vec<(usize, usize)>,
    shots: Vec<u64>,
    repeats: usize,
    seed: u64,
) -> PyResult<Vec<QpsRow>> {
    let rows = py
        .detach(|| vqge_core::qps::qps_bench(&sets, &shots, repeats, seed))
        .map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.variant.name().to_string(), r.unitaries, r.dim, r.shots, r.rmse))
        .collect())
}

#[pymodule]
fn vqge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("VqgeError", m.py().get_type::<VqgeError>())?;
    m.add_class::<PyPencil>()?;
    m.add_class::<PyAnsatz>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(loss, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(qps_bench, m)?)?;
    Ok(())
}
