use vqge_core::ansatz::{AnsatzSpec, Architecture, Rotation};
use vqge_core::pencils::example1;
use vqge_core::vqge::{build_loss_circuit, VqgeProblem};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/example1_gate_counts.txt");

fn report_line(architecture: Architecture, layers: usize) -> String {
    let spec = AnsatzSpec::new(architecture, 2, layers, Rotation::RzRyRz).unwrap();
    let problem = VqgeProblem::new(example1(), spec, spec).unwrap();
    let params = vec![0.25; problem.parameter_count()];
    let r = build_loss_circuit(&problem, &params)
        .unwrap()
        .circuit
        .gate_count_report();
    format!(
        "{} layers={} qubits={} single={} two={} opaque={}",
        architecture, layers, r.qubits, r.single_qubit, r.two_qubit, r.opaque
    )
}

// Counts depend only on the structure, so they must not drift between builds
// or parameter values.
#[test]
fn example1_loss_circuit_counts_match_golden() {
    let got: Vec<String> = [
        (Architecture::CnotSpecific, 2),
        (Architecture::HardwareEfficient, 1),
        (Architecture::Identity, 1),
    ]
    .into_iter()
    .map(|(a, l)| report_line(a, l))
    .collect();
    if std::env::var_os("VQGE_BLESS").is_some() {
        std::fs::write(GOLDEN, got.join("\n") + "\n").unwrap();
    }
    let want = std::fs::read_to_string(GOLDEN).expect("golden file; regenerate with VQGE_BLESS=1");
    assert_eq!(want.lines().collect::<Vec<_>>(), got);
}
