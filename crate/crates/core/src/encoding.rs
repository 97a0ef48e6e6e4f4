//! Linear combinations of unitaries and their PREP / SELECT / UNPREP oracles.
//!
//! A matrix `M = Σ α_i P_i` is block-encoded as `M / c` with `c = Σ|α_i|`. The phase
//! of each `α_i` is folded into the unitary that SELECT applies, so PREP only has
//! to load the real amplitudes `√(|α_i|/c)`.

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal_basis, ComplexMatrix, C64, I, ONE, ZERO};
use crate::simulator::{pauli_matrix, Gate, StateVector};

/// Coefficients at or below this magnitude are dropped.
pub const PAULI_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TermUnitary {
    /// Pauli word written most significant qubit first.
    Pauli(String),
    Dense(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcuTerm {
    pub unitary: TermUnitary,
    pub coefficient: C64,
}

impl LcuTerm {
    /// The bare unitary `P_i`.
    pub fn matrix(&self, n_qubits: usize) -> ComplexMatrix {
        match &self.unitary {
            TermUnitary::Pauli(word) => pauli_string_matrix(word),
            TermUnitary::Dense(m) => {
                debug_assert_eq!(m.rows(), 1 << n_qubits);
                m.clone()
            }
        }
    }

    /// `e^{i·arg α}·P_i`, the payload SELECT applies.
    pub fn phased_matrix(&self, n_qubits: usize) -> ComplexMatrix {
        let phase = if self.coefficient.norm() > 0.0 {
            self.coefficient / self.coefficient.norm()
        } else {
            ONE
        };
        self.matrix(n_qubits).scale(phase)
    }

    pub fn label(&self) -> String {
        match &self.unitary {
            TermUnitary::Pauli(w) => w.clone(),
            TermUnitary::Dense(_) => "U".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcuDecomposition {
    n_qubits: usize,
    terms: Vec<LcuTerm>,
    c: f64,
    m: usize,
}

impl LcuDecomposition {
    /// Builds an LCU from explicit terms. The ancilla count is the smallest `m`
    /// with `2^m ≥ terms`, so a single term needs none.
    pub fn new(n_qubits: usize, terms: Vec<LcuTerm>) -> Result<LcuDecomposition> {
        if terms.is_empty() {
            return Err(Error::Shape("an LCU needs at least one term".into()));
        }
        let dim = 1usize << n_qubits;
        for t in &terms {
            match &t.unitary {
                TermUnitary::Pauli(w) => {
                    if w.len() != n_qubits || !w.chars().all(|ch| "IXYZ".contains(ch)) {
                        return Err(Error::Shape(format!("bad Pauli word '{w}' for {n_qubits} qubits")));
                    }
                }
                TermUnitary::Dense(u) => {
                    if u.rows() != dim || u.cols() != dim || !u.is_unitary(1e-10) {
                        return Err(Error::Shape("dense LCU term must be a unitary of matching size".into()));
                    }
                }
            }
        }
        let c = terms.iter().map(|t| t.coefficient.norm()).sum();
        let m = ceil_log2(terms.len());
        Ok(LcuDecomposition { n_qubits, terms, c, m })
    }

    /// A unitary as a one-term LCU with `c = 1` and no ancillas.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<LcuDecomposition> {
        if !u.is_square() || !u.rows().is_power_of_two() {
            return Err(Error::Shape("unitary must be 2^n square".into()));
        }
        LcuDecomposition::new(
            u.rows().trailing_zeros() as usize,
            vec![LcuTerm {
                unitary: TermUnitary::Dense(u.clone()),
                coefficient: ONE,
            }],
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[LcuTerm] {
        &self.terms
    }

    /// `Σ|α_i|`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Ancilla qubits used by PREP and SELECT.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Same decomposition addressed through a wider ancilla register; the extra
    /// slots carry zero amplitude and SELECT acts trivially on them.
    pub fn with_ancillas(&self, m: usize) -> Result<LcuDecomposition> {
        if m < self.m {
            return Err(Error::Shape(format!(
                "{} terms do not fit in {m} ancillas",
                self.terms.len()
            )));
        }
        Ok(LcuDecomposition { m, ..self.clone() })
    }

    /// `Σ α_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = 1usize << self.n_qubits;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for t in &self.terms {
            out = &out + &t.matrix(self.n_qubits).scale(t.coefficient);
        }
        out
    }

    /// PREP column `√(|α_i|/c)`, zero-padded to `2^m`.
    pub fn prep_amplitudes(&self) -> Vec<C64> {
        let mut col = vec![ZERO; 1 << self.m];
        if self.c == 0.0 {
            col[0] = ONE;
            return col;
        }
        for (slot, t) in col.iter_mut().zip(&self.terms) {
            *slot = C64::new((t.coefficient.norm() / self.c).sqrt(), 0.0);
        }
        col
    }
}

fn ceil_log2(k: usize) -> usize {
    k.next_power_of_two().trailing_zeros() as usize
}

/// Matrix of a Pauli word, leftmost letter on the most significant qubit.
pub fn pauli_string_matrix(word: &str) -> ComplexMatrix {
    word.chars()
        .fold(ComplexMatrix::identity(1), |acc, ch| acc.kron(&pauli_matrix(ch)))
}

/// `P|l⟩ = phase(l)·|l ⊕ flips⟩` for a word given per qubit (index 0 = qubit 0).
fn pauli_action(per_qubit: &[u8], l: usize) -> C64 {
    let mut ph = ONE;
    for (q, &p) in per_qubit.iter().enumerate() {
        let bit = l >> q & 1;
        ph *= match (p, bit) {
            (2, 0) => I,
            (2, _) => -I,
            (3, 1) => -ONE,
            _ => ONE,
        };
    }
    ph
}

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Expands a `2^n × 2^n` matrix in the Pauli basis, `α_P = Tr(P†M)/2^n`.
pub fn pauli_decompose(m: &ComplexMatrix) -> Result<LcuDecomposition> {
    if !m.is_square() || !m.rows().is_power_of_two() {
        return Err(Error::Shape(format!(
            "Pauli decomposition needs a 2^n square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let dim = m.rows();
    let n = dim.trailing_zeros() as usize;
    let mut terms = Vec::new();
    // code digit q (base 4) is the letter on qubit q: I=0, X=1, Y=2, Z=3
    for code in 0..1usize << (2 * n) {
        let per_qubit: Vec<u8> = (0..n).map(|q| (code >> (2 * q) & 3) as u8).collect();
        let flips: usize = per_qubit
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 1 || p == 2)
            .map(|(q, _)| 1 << q)
            .sum();
        let mut acc = ZERO;
        for l in 0..dim {
            acc += pauli_action(&per_qubit, l).conj() * m[(l ^ flips, l)];
        }
        let alpha = acc / dim as f64;
        if alpha.norm() > PAULI_DROP_TOL {
            let word: String = per_qubit.iter().rev().map(|&p| LETTERS[p as usize]).collect();
            terms.push(LcuTerm {
                unitary: TermUnitary::Pauli(word),
                coefficient: alpha,
            });
        }
    }
    if terms.is_empty() {
        // the zero matrix: keep a placeholder identity with zero weight so c = 0
        terms.push(LcuTerm {
            unitary: TermUnitary::Pauli("I".repeat(n)),
            coefficient: ZERO,
        });
    }
    LcuDecomposition::new(n, terms)
}

/// Real orthogonal PREP on `m` qubits whose first column holds the LCU amplitudes.
pub fn build_prep(lcu: &LcuDecomposition) -> ComplexMatrix {
    complete_orthonormal_basis(&[lcu.prep_amplitudes()], 1 << lcu.m())
}

/// SELECT as one controlled payload per term: term `i` applies its phased unitary
/// to the system when the ancillas read `i`.
#[derive(Debug, Clone)]
pub struct Select {
    m: usize,
    n_qubits: usize,
    payloads: Vec<(usize, ComplexMatrix, String)>,
}

impl Select {
    /// Gates on the given qubits, each additionally gated by `extra_controls`.
    pub fn gates(&self, ancillas: &[usize], system: &[usize], extra_controls: &[(usize, bool)]) -> Result<Vec<Gate>> {
        if ancillas.len() != self.m || system.len() != self.n_qubits {
            return Err(Error::Shape(format!(
                "SELECT wants {} ancillas and {} system qubits",
                self.m, self.n_qubits
            )));
        }
        self.payloads
            .iter()
            .map(|(i, u, label)| {
                let controls = extra_controls
                    .iter()
                    .copied()
                    .chain(ancillas.iter().enumerate().map(|(b, &q)| (q, i >> b & 1 == 1)))
                    .collect();
                Gate::controlled(controls, system.to_vec(), u.clone(), format!("SELECT[{label}]"))
            })
            .collect()
    }

    /// Dense matrix on (ancilla, system) with local index `i_a + 2^m·j_sys`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let na = 1usize << self.m;
        let ns = 1usize << self.n_qubits;
        let mut out = ComplexMatrix::zeros(na * ns, na * ns);
        let mut used = vec![false; na];
        for (i, u, _) in &self.payloads {
            used[*i] = true;
            for r in 0..ns {
                for c in 0..ns {
                    out[(i + na * r, i + na * c)] = u[(r, c)];
                }
            }
        }
        for (i, _) in used.iter().enumerate().filter(|(_, &u)| !u) {
            for r in 0..ns {
                out[(i + na * r, i + na * r)] = ONE;
            }
        }
        out
    }
}

pub fn build_select(lcu: &LcuDecomposition) -> Select {
    Select {
        m: lcu.m(),
        n_qubits: lcu.n_qubits(),
        payloads: lcu
            .terms()
            .iter()
            .enumerate()
            .map(|(i, t)| (i, t.phased_matrix(lcu.n_qubits()), t.label()))
            .collect(),
    }
}

/// The PREP, SELECT, PREP† sandwich on the given qubits, optionally gated.
pub fn block_encoding_gates(
    lcu: &LcuDecomposition,
    ancillas: &[usize],
    system: &[usize],
    extra_controls: &[(usize, bool)],
) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    let prep = build_prep(lcu);
    let with_controls = |g: Gate| extra_controls.iter().fold(g, |g, &c| g.with_control(c));
    if lcu.m() > 0 {
        gates.push(with_controls(Gate::dense(ancillas.to_vec(), prep.clone(), "PREP")?));
    }
    gates.extend(build_select(lcu).gates(ancillas, system, extra_controls)?);
    if lcu.m() > 0 {
        gates.push(with_controls(Gate::dense(ancillas.to_vec(), prep.dagger(), "UNPREP")?));
    }
    Ok(gates)
}

/// Runs the block encoding on every system basis state, reads the ancilla-zero
/// block, and returns `max |c·block − original|`.
pub fn verify_block_encoding(lcu: &LcuDecomposition, original: &ComplexMatrix) -> Result<f64> {
    let n = lcu.n_qubits();
    let m = lcu.m();
    let dim = 1usize << n;
    if original.rows() != dim || original.cols() != dim {
        return Err(Error::Shape("original does not match the LCU size".into()));
    }
    // ancillas are the low qubits, system the high ones
    let ancillas: Vec<usize> = (0..m).collect();
    let system: Vec<usize> = (m..m + n).collect();
    let gates = block_encoding_gates(lcu, &ancillas, &system, &[])?;
    let mut worst: f64 = 0.0;
    for j in 0..dim {
        let mut amps = StateVector::basis(m + n, j << m).amplitudes().to_vec();
        for g in &gates {
            crate::simulator::apply_gate(&mut amps, g);
        }
        for i in 0..dim {
            let got = amps[i << m] * lcu.c();
            worst = worst.max((got - original[(i, j)]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use crate::pencils::{example1, random_complex_matrix};
    use crate::rng::stream;
    use proptest::prelude::*;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_one_term() {
        let lcu = pauli_decompose(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(lcu.terms().len(), 1);
        assert_eq!(lcu.terms()[0].unitary, TermUnitary::Pauli("I".into()));
        assert!((lcu.terms()[0].coefficient - ONE).norm() < 1e-15);
        assert_eq!(lcu.m(), 0);
        assert!(build_prep(&lcu).max_abs_diff(&ComplexMatrix::identity(1)) < 1e-15);
        assert!(verify_block_encoding(&lcu, &ComplexMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn raising_operator_is_x_plus_iy() {
        let m = real(&[&[0., 1.], &[0., 0.]]);
        let lcu = pauli_decompose(&m).unwrap();
        let t: Vec<_> = lcu.terms().iter().map(|t| (t.label(), t.coefficient)).collect();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].0, "X");
        assert!((t[0].1 - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(t[1].0, "Y");
        assert!((t[1].1 - C64::new(0.0, 0.5)).norm() < 1e-15);
        let prep = build_prep(&lcu);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((prep[(0, 0)].re - h).abs() < 1e-15 && (prep[(1, 0)].re - h).abs() < 1e-15);
        assert!(verify_block_encoding(&lcu, &m).unwrap() < 1e-12);
    }

    #[test]
    fn pauli_words_put_qubit_zero_last() {
        // Z on qubit 0 only: diag(1, -1, 1, -1)
        let z0 = pauli_string_matrix("IZ");
        assert_eq!(z0[(1, 1)], -ONE);
        assert_eq!(z0[(2, 2)], ONE);
        let lcu = pauli_decompose(&z0).unwrap();
        assert_eq!(lcu.terms()[0].label(), "IZ");
    }

    #[test]
    fn select_matrix_by_construction() {
        let lcu = LcuDecomposition::new(
            1,
            vec![
                LcuTerm {
                    unitary: TermUnitary::Pauli("X".into()),
                    coefficient: C64::new(0.0, 2.0),
                },
                LcuTerm {
                    unitary: TermUnitary::Pauli("Z".into()),
                    coefficient: C64::new(-1.0, 0.0),
                },
            ],
        )
        .unwrap();
        let sel = build_select(&lcu).to_matrix();
        let p0 = ComplexMatrix::diag(&[ONE, ZERO]);
        let p1 = ComplexMatrix::diag(&[ZERO, ONE]);
        // system is the high factor in the local index
        let want = &pauli_matrix('X').scale(I).kron(&p0) + &pauli_matrix('Z').scale(-ONE).kron(&p1);
        assert!(sel.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn example1_encodings() {
        let p = example1();
        for m in [p.a(), p.b()] {
            let lcu = pauli_decompose(m).unwrap();
            assert!(lcu.terms().len() <= 16);
            assert!(lcu.reconstruct().max_abs_diff(m) < 1e-12);
            let col = build_prep(&lcu).column(0);
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for (z, t) in col.iter().zip(lcu.terms()) {
                assert!((z.norm_sqr() - t.coefficient.norm() / lcu.c()).abs() < 1e-12);
            }
            assert!(build_select(&lcu).to_matrix().unitarity_defect() < 1e-10);
            assert!(verify_block_encoding(&lcu, m).unwrap() < 1e-10);
        }
    }

    #[test]
    fn example1_normalization_golden() {
        // Σ|α_P| evaluated separately with numpy; all 16 Pauli pairs survive for both
        let p = example1();
        let a = pauli_decompose(p.a()).unwrap();
        let b = pauli_decompose(p.b()).unwrap();
        assert!((a.c() - 7.4332695).abs() < 1e-9);
        assert!((b.c() - 6.6977425).abs() < 1e-9);
        assert_eq!((a.terms().len(), a.m()), (16, 4));
        assert_eq!((b.terms().len(), b.m()), (16, 4));
    }

    #[test]
    fn padding_keeps_the_encoding() {
        let m = real(&[&[0., 1.], &[0., 0.]]);
        let lcu = pauli_decompose(&m).unwrap().with_ancillas(3).unwrap();
        assert_eq!(lcu.m(), 3);
        assert!(verify_block_encoding(&lcu, &m).unwrap() < 1e-12);
        assert!(lcu.with_ancillas(0).is_err());
    }

    #[test]
    fn dense_unitary_term() {
        let u = crate::pencils::random_unitary(4, &mut stream(5, &[1]));
        let lcu = LcuDecomposition::from_unitary(&u).unwrap();
        assert_eq!((lcu.m(), lcu.c()), (0, 1.0));
        assert!(verify_block_encoding(&lcu, &u).unwrap() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        let z = ComplexMatrix::zeros(2, 2);
        let lcu = pauli_decompose(&z).unwrap();
        assert_eq!((lcu.c(), lcu.m()), (0.0, 0));
        assert!(verify_block_encoding(&lcu, &z).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            pauli_decompose(&ComplexMatrix::zeros(3, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn random_corpus_reconstructs_and_encodes() {
        let mut rng = stream(11, &[2]);
        for _ in 0..50 {
            let m = random_complex_matrix(4, &mut rng);
            let lcu = pauli_decompose(&m).unwrap();
            assert!(lcu.reconstruct().max_abs_diff(&m) < 1e-10);
            assert!(verify_block_encoding(&lcu, &m).unwrap() < 1e-10);
            assert!(lcu.c() >= spectral_norm(&m).unwrap() - 1e-12);
            let c: f64 = lcu.terms().iter().map(|t| t.coefficient.norm()).sum();
            assert!((c - lcu.c()).abs() < 1e-12);
            // phase-absorbed payloads weighted by |α| give back the matrix
            let mut sum = ComplexMatrix::zeros(4, 4);
            for t in lcu.terms() {
                sum = &sum + &t.phased_matrix(2).scale(C64::new(t.coefficient.norm(), 0.0));
            }
            assert!(sum.max_abs_diff(&m) < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn c_dominates_spectral_norm(seed in 0u64..1000, n in 1usize..4) {
            let m = random_complex_matrix(1 << n, &mut stream(seed, &[7]));
            let lcu = pauli_decompose(&m).unwrap();
            prop_assert!(lcu.c() >= spectral_norm(&m).unwrap() * (1.0 - 1e-12));
            prop_assert!(lcu.reconstruct().max_abs_diff(&m) < 1e-10);
        }
    }
}
