//! Command-line front end: `vqge solve|oracle|qps-bench|noisy-solve|plot`.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 no convergence (artifacts
//! are still written), 3 capacity exceeded.
//!
//! CSV schemas (header row always present, column order fixed):
//!
//! * `trace.csv`: `iteration,loss,gradient_norm,shots_used,wall_ms,restart,exact_loss,param_hash,ancilla_success`
//! * `eigenvalues.csv`: `index,re_t,im_t,re_s,im_s,re_lambda,im_lambda,flag` with
//!   flag one of `finite`, `infinite`, `degenerate`, `padding`
//! * `qps.csv`: `variant,unitaries,dim,shots,rmse`

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::linalg::{
    classical_generalized_eigenvalues, embed_to_power_of_two, project_singular_pencil, read_matrix, svd, MatrixPencil,
    C64,
};
use crate::pencils::{example1, random_pencil, random_real_pencil, structured_pencil};
use crate::qps::qps_bench;
use crate::rng::{stream, INSTANCE};
use crate::vqge::{default_tolerance, optimize, LossMode, OptimizationTrace, VqgeProblem};

pub use config::{Command, DiagonalMode, ExperimentConfig, PencilSource, RawConfig};
pub use output::{
    gnuplot_script, oracle_rows, read_eigen_csv, solver_rows, write_eigen_csv, write_qps_csv, write_trace_csv,
    EigenFlag, EigenRow,
};

#[derive(Debug, Parser)]
#[command(
    name = "vqge",
    version,
    about = "Variational generalized eigensolver on a simulated quantum backend"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Optimize the loss and extract eigenvalues from the triangularized pair.
    Solve(RunArgs),
    /// Classical reference eigenvalues in the same CSV schema.
    Oracle(RunArgs),
    /// Shots-versus-RMSE benchmark of the process-snapshot circuits.
    QpsBench(RunArgs),
    /// Solve with the loss circuit run under the noise model.
    NoisySolve(RunArgs),
    /// Write a gnuplot script for the CSVs in an output directory.
    Plot {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Matrix file for A (implies pencil = file).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Matrix file for B.
    #[arg(long)]
    b: Option<PathBuf>,
}

/// Result of one runner: exit status plus the files it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => 3,
        _ => 1,
    }
}

/// Entry point for the binary. `seed_env` is the value of `VQGE_SEED`, if set.
pub fn run<I, S>(args: I, seed_env: Option<String>) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Sub::Plot { out } => write_plot_script(&out),
        Sub::Solve(a) => resolve(Command::Solve, &a, seed_env).and_then(|(c, raw)| run_solve(&c, &raw)),
        Sub::Oracle(a) => resolve(Command::Oracle, &a, seed_env).and_then(|(c, raw)| run_oracle(&c, &raw)),
        Sub::QpsBench(a) => resolve(Command::QpsBench, &a, seed_env).and_then(|(c, raw)| run_qps_bench(&c, &raw)),
        Sub::NoisySolve(a) => resolve(Command::NoisySolve, &a, seed_env).and_then(|(c, raw)| run_noisy_solve(&c, &raw)),
    };
    match result {
        Ok(o) => {
            for p in &o.artifacts {
                say(format_args!("wrote {}", p.display()));
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve(command: Command, args: &RunArgs, seed_env: Option<String>) -> Result<(ExperimentConfig, RawConfig)> {
    let mut raw = RawConfig::default();
    if let Some(path) = &args.config {
        raw.merge_file(path)?;
    }
    if let Some(seed) = seed_env {
        raw.set("seed", &seed, "VQGE_SEED")?;
    }
    match (&args.a, &args.b) {
        (Some(a), Some(b)) => {
            raw.set("pencil", "file", "--a/--b")?;
            raw.set("pencil.a", &a.display().to_string(), "--a")?;
            raw.set("pencil.b", &b.display().to_string(), "--b")?;
        }
        (None, None) => {}
        _ => return Err(Error::Config("--a and --b must be given together".into())),
    }
    for kv in &args.set {
        raw.merge_override(kv)?;
    }
    Ok((raw.resolve(command)?, raw))
}

pub fn load_pencil(cfg: &ExperimentConfig) -> Result<MatrixPencil> {
    let mut rng = stream(cfg.optimizer.seed, &[INSTANCE]);
    match &cfg.pencil {
        PencilSource::Example1 => Ok(example1()),
        PencilSource::Files { a, b } => MatrixPencil::new(read_pencil_file(a)?, read_pencil_file(b)?),
        PencilSource::Random { dim } => Ok(random_pencil(*dim, &mut rng)),
        PencilSource::RandomReal { dim } => Ok(random_real_pencil(*dim, &mut rng)),
        PencilSource::Structured { dim } => Ok(structured_pencil(*dim, &mut rng)),
    }
}

fn read_pencil_file(path: &Path) -> Result<crate::linalg::ComplexMatrix> {
    read_matrix(path).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn write_echo(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<PathBuf> {
    let path = cfg.out.join("config.resolved");
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = format!(
        "# vqge {}, resolved at unix time {stamp}\n{}",
        cfg.command.name(),
        raw.echo()
    );
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Pencil actually handed to the optimizer, with bookkeeping to map its
/// diagonal back to the input.
struct Prepared {
    problem: VqgeProblem,
    /// Identity rows added to reach a power of two.
    padding: usize,
    /// Directions removed by compressing a singular `B`.
    projected_infinite: usize,
    /// Factors `A` and `B` were divided by.
    scale: (f64, f64),
}

/// RMS singular value, or 1 for a zero matrix.
fn rms_scale(m: &crate::linalg::ComplexMatrix) -> f64 {
    let s = m.frobenius_norm() / (m.rows() as f64).sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn prepare(cfg: &ExperimentConfig, pencil: &MatrixPencil) -> Result<Prepared> {
    let mut work = pencil.clone();
    let mut projected_infinite = 0;
    if cfg.project {
        let rank = svd(pencil.b())?.rank(cfg.rank_tol);
        if rank < pencil.dim() {
            work = project_singular_pencil(pencil, cfg.rank_tol)?;
            projected_infinite = pencil.dim() - work.dim();
        }
    }
    let mut scale = (1.0, 1.0);
    if cfg.normalize {
        scale = (rms_scale(work.a()), rms_scale(work.b()));
        work = MatrixPencil::new(
            work.a().scale(C64::new(1.0 / scale.0, 0.0)),
            work.b().scale(C64::new(1.0 / scale.1, 0.0)),
        )?;
    }
    let padded = embed_to_power_of_two(&work);
    let padding = padded.dim() - work.dim();
    let n = padded.dim().trailing_zeros() as usize;
    let spec = AnsatzSpec::new(cfg.architecture, n, cfg.layers, cfg.rotation)?;
    Ok(Prepared {
        problem: VqgeProblem::new(padded, spec, spec)?,
        padding,
        projected_infinite,
        scale,
    })
}

/// Optimizes `pencil` under `cfg` and returns the trace with the eigenvalue rows,
/// after projection, normalization and padding are undone.
pub fn solve_pencil(
    cfg: &ExperimentConfig,
    pencil: &MatrixPencil,
    mode: &LossMode,
) -> Result<(OptimizationTrace, Vec<EigenRow>)> {
    let prep = prepare(cfg, pencil)?;
    let trace = optimize(&prep.problem, mode, &cfg.optimizer)?;
    let params = trace.final_params().to_vec();
    let diag = match cfg.diagonal {
        DiagonalMode::Exact => prep.problem.diagonals_exact(&params)?,
        DiagonalMode::Hadamard { shots } => prep.problem.diagonals_hadamard(&params, shots, cfg.optimizer.seed)?,
    };
    let tol = cfg.eig_tol.unwrap_or_else(|| default_tolerance(&diag));
    let mut rows = solver_rows(&diag, tol, prep.padding, prep.projected_infinite);
    if cfg.normalize {
        let (sa, sb) = prep.scale;
        for r in rows.iter_mut().take(diag.t.len()) {
            r.t *= sa;
            r.s *= sb;
            if matches!(r.flag, EigenFlag::Finite | EigenFlag::Padding) {
                r.lambda = r.t / r.s;
            }
        }
    }
    Ok((trace, rows))
}

/// Loss mode the config asks for.
pub fn loss_mode(cfg: &ExperimentConfig) -> LossMode {
    match (cfg.command, cfg.shots) {
        (Command::NoisySolve, _) => {
            let mut model = cfg.noise;
            model.enabled = true;
            LossMode::Noisy {
                model,
                shots: cfg.noise_shots,
            }
        }
        (_, None) => LossMode::Exact,
        (_, Some(shots)) => LossMode::Sampled { shots },
    }
}

fn solve_with(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<Outcome> {
    let pencil = load_pencil(cfg)?;
    // fail on capacity before touching the output directory
    prepare(cfg, &pencil)?;
    std::fs::create_dir_all(&cfg.out)?;
    let echo = write_echo(cfg, raw)?;
    let (trace, rows) = solve_pencil(cfg, &pencil, &loss_mode(cfg))?;
    let trace_path = cfg.out.join("trace.csv");
    write_trace_csv(&trace_path, &trace)?;
    let eig_path = cfg.out.join("eigenvalues.csv");
    write_eigen_csv(&eig_path, &rows)?;
    report(&trace);
    Ok(Outcome {
        exit_code: if trace.converged() { 0 } else { 2 },
        artifacts: vec![trace_path, eig_path, echo],
    })
}

/// Progress output that tolerates a closed stdout.
fn say(args: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{args}");
}

fn report(trace: &OptimizationTrace) {
    let best = trace.best_run();
    say(format_args!(
        "{} after {} restart(s): restart {} stopped at iteration {} with loss {:.3e}",
        if trace.converged() {
            "converged"
        } else {
            "not converged"
        },
        trace.restarts.len(),
        best.restart,
        best.records.last().map_or(0, |r| r.iteration),
        best.final_loss
    ));
}

pub fn run_solve(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<Outcome> {
    solve_with(cfg, raw)
}

pub fn run_noisy_solve(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<Outcome> {
    solve_with(cfg, raw)
}

pub fn run_oracle(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<Outcome> {
    let pencil = load_pencil(cfg)?;
    let result = classical_generalized_eigenvalues(&pencil, cfg.rank_tol)?;
    std::fs::create_dir_all(&cfg.out)?;
    let echo = write_echo(cfg, raw)?;
    let path = cfg.out.join("oracle.csv");
    write_eigen_csv(&path, &oracle_rows(&result))?;
    Ok(Outcome {
        exit_code: 0,
        artifacts: vec![path, echo],
    })
}

pub fn run_qps_bench(cfg: &ExperimentConfig, raw: &RawConfig) -> Result<Outcome> {
    let rows = qps_bench(&cfg.qps_sets, &cfg.qps_shots, cfg.qps_repeats, cfg.optimizer.seed)?;
    std::fs::create_dir_all(&cfg.out)?;
    let echo = write_echo(cfg, raw)?;
    let path = cfg.out.join("qps.csv");
    write_qps_csv(&path, &rows)?;
    Ok(Outcome {
        exit_code: 0,
        artifacts: vec![path, echo],
    })
}

fn write_plot_script(out: &Path) -> Result<Outcome> {
    let trace = out.join("trace.csv").is_file();
    let qps = out.join("qps.csv").is_file();
    if !trace && !qps {
        return Err(Error::Config(format!("no trace.csv or qps.csv in {}", out.display())));
    }
    let path = out.join("plot.gp");
    std::fs::write(&path, gnuplot_script(trace, qps))?;
    Ok(Outcome {
        exit_code: 0,
        artifacts: vec![path],
    })
}
