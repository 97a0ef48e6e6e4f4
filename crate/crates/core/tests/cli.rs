use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

use vqge_core::cli::{read_eigen_csv, EigenFlag, EigenRow};
use vqge_core::linalg::{match_multisets, write_matrix, ComplexMatrix, C64};
use vqge_core::pencils::random_upper_triangular;
use vqge_core::rng::stream;

fn vqge(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vqge"));
    cmd.args(args).env_remove("VQGE_SEED");
    if let Some(s) = seed_env {
        cmd.env("VQGE_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    format!("out={}", dir.display())
}

fn finite(rows: &[EigenRow]) -> Vec<C64> {
    rows.iter()
        .filter(|r| r.flag == EigenFlag::Finite)
        .map(|r| r.lambda)
        .collect()
}

fn count(rows: &[EigenRow], flag: EigenFlag) -> usize {
    rows.iter().filter(|r| r.flag == flag).count()
}

#[test]
fn oracle_reproduces_the_golden_file() {
    let dir = TempDir::new().unwrap();
    let out = vqge(&["oracle", "--set", &out_arg(dir.path())], None);
    assert_eq!(out.status.code(), Some(0));
    let got = read_eigen_csv(&dir.path().join("oracle.csv")).unwrap();
    let golden = read_eigen_csv(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/example1_oracle.csv"
    )))
    .unwrap();
    assert_eq!(got.len(), golden.len());
    for (g, w) in got.iter().zip(&golden) {
        assert_eq!(g.flag, w.flag);
        if g.flag == EigenFlag::Finite {
            assert!((g.lambda - w.lambda).norm() < 1e-9, "{:?} vs {:?}", g.lambda, w.lambda);
        }
    }
    assert!(dir.path().join("config.resolved").is_file());
}

#[test]
fn default_solve_matches_the_oracle() {
    let dir = TempDir::new().unwrap();
    let out = vqge(&["solve", "--set", &out_arg(dir.path())], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let solved = read_eigen_csv(&dir.path().join("eigenvalues.csv")).unwrap();
    let golden = read_eigen_csv(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/example1_oracle.csv"
    )))
    .unwrap();
    let dist = match_multisets(&finite(&solved), &finite(&golden), true).expect("same number of finite eigenvalues");
    assert!(dist <= 1e-3, "distance {dist}");
    assert_eq!(count(&solved, EigenFlag::Infinite), count(&golden, EigenFlag::Infinite));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,loss,gradient_norm,shots_used,wall_ms,"));
}

fn write_pair(dir: &Path, a: &ComplexMatrix, b: &ComplexMatrix) -> (String, String) {
    let (pa, pb) = (dir.join("a.txt"), dir.join("b.txt"));
    write_matrix(&pa, a).unwrap();
    write_matrix(&pb, b).unwrap();
    (pa.display().to_string(), pb.display().to_string())
}

#[test]
fn triangular_pencil_converges_at_iteration_zero() {
    let dir = TempDir::new().unwrap();
    let mut rng = stream(3, &[0]);
    let (a, b) = write_pair(
        dir.path(),
        &random_upper_triangular(4, &mut rng),
        &random_upper_triangular(4, &mut rng),
    );
    let out = vqge(
        &[
            "solve",
            "--a",
            &a,
            "--b",
            &b,
            "--set",
            "ansatz=identity",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2, "header plus iteration 0:\n{trace}");
}

#[test]
fn malformed_pencil_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2\n1,0 0,0\n0,0 oops\n").unwrap();
    let bad = bad.display().to_string();
    let out = vqge(
        &["solve", "--a", &bad, "--b", &bad, "--set", &out_arg(dir.path())],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(vqge(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(vqge(&["solve", "--set", "no_such_key=1"], None).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 3\nthis line is wrong\n").unwrap();
    let out = vqge(&["oracle", "--config", &cfg.display().to_string()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn non_convergence_exits_two_with_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = vqge(
        &[
            "solve",
            "--set",
            "pencil=random",
            "--set",
            "opt.max_iterations=3",
            "--set",
            "opt.restarts=1",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    for f in ["trace.csv", "eigenvalues.csv", "config.resolved"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
}

#[test]
fn capacity_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let out = vqge(
        &[
            "solve",
            "--set",
            "pencil=random",
            "--set",
            "pencil.dim=128",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(3));
    let out = vqge(
        &[
            "noisy-solve",
            "--set",
            "pencil=random",
            "--set",
            "pencil.dim=16",
            "--set",
            "ansatz=hwe",
            "--set",
            "ansatz.layers=1",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap is 11"));
}

#[test]
fn identical_seeds_give_identical_csvs() {
    let run = |dir: &Path, seed: Option<&str>| {
        let out = vqge(
            &[
                "solve",
                "--set",
                "pencil=random",
                "--set",
                "mode=sampled",
                "--set",
                "shots=2000",
                "--set",
                "opt.max_iterations=4",
                "--set",
                "opt.restarts=2",
                "--set",
                "ansatz=hwe",
                "--set",
                "ansatz.layers=1",
                "--set",
                &out_arg(dir),
            ],
            seed,
        );
        assert_eq!(out.status.code(), Some(2));
        (
            std::fs::read(dir.join("trace.csv")).unwrap(),
            std::fs::read(dir.join("eigenvalues.csv")).unwrap(),
        )
    };
    let (d1, d2, d3) = (
        TempDir::new().unwrap(),
        TempDir::new().unwrap(),
        TempDir::new().unwrap(),
    );
    assert_eq!(run(d1.path(), Some("11")), run(d2.path(), Some("11")));
    assert_ne!(run(d1.path(), Some("11")), run(d3.path(), Some("12")));
    let echo = std::fs::read_to_string(d1.path().join("config.resolved")).unwrap();
    assert!(echo.contains("\nseed = 11\n"));
}

#[test]
fn set_overrides_the_environment_seed() {
    let dir = TempDir::new().unwrap();
    let out = vqge(&["oracle", "--set", "seed=4", "--set", &out_arg(dir.path())], Some("9"));
    assert_eq!(out.status.code(), Some(0));
    let echo = std::fs::read_to_string(dir.path().join("config.resolved")).unwrap();
    assert!(echo.contains("\nseed = 4\n"));
    let out = vqge(&["oracle", "--set", &out_arg(dir.path())], Some("9"));
    assert_eq!(out.status.code(), Some(0));
    let echo = std::fs::read_to_string(dir.path().join("config.resolved")).unwrap();
    assert!(echo.contains("\nseed = 9\n"));
}

#[test]
fn qps_bench_writes_one_row_per_variant_and_shots() {
    let dir = TempDir::new().unwrap();
    let out = vqge(
        &[
            "qps-bench",
            "--set",
            "qps.sets=2x2",
            "--set",
            "qps.shots=1000,100000",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("qps.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "variant,unitaries,dim,shots,rmse");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("single,2,4,1000,"));
    let plot = vqge(&["plot", "--out", &dir.path().display().to_string()], None);
    assert_eq!(plot.status.code(), Some(0));
    let script = std::fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert!(script.contains("'qps.csv'") && !script.contains("'trace.csv'"));
}

#[test]
fn structured_pencil_solves_after_projection() {
    let dir = TempDir::new().unwrap();
    let out = vqge(
        &[
            "solve",
            "--set",
            "pencil=structured",
            "--set",
            "pencil.dim=5",
            "--set",
            "project=true",
            "--set",
            "normalize=true",
            "--set",
            "opt.learning_rate=0.1",
            "--set",
            "opt.epsilon=1e-12",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = read_eigen_csv(&dir.path().join("eigenvalues.csv")).unwrap();
    // dim 5 with rank-3 B: 3 finite, 2 projected infinite, one padding row to reach 4
    assert_eq!(count(&rows, EigenFlag::Infinite), 2);
    assert_eq!(count(&rows, EigenFlag::Padding), 1);
    assert_eq!(count(&rows, EigenFlag::Finite), 3);
    let oracle = vqge(
        &[
            "oracle",
            "--set",
            "pencil=structured",
            "--set",
            "pencil.dim=5",
            "--set",
            &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(oracle.status.code(), Some(0));
    let want = read_eigen_csv(&dir.path().join("oracle.csv")).unwrap();
    let dist = match_multisets(&finite(&rows), &finite(&want), true).unwrap();
    assert!(dist < 1e-3, "distance {dist}");
}
