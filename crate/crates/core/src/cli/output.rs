use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{GeneralizedEigenResult, C64, ONE, ZERO};
use crate::qps::QpsBenchRow;
use crate::vqge::{DiagonalEstimates, OptimizationTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenFlag {
    Finite,
    Infinite,
    Degenerate,
    /// Eigenvalue 1 introduced by padding to a power of two.
    Padding,
}

impl EigenFlag {
    pub fn name(self) -> &'static str {
        match self {
            EigenFlag::Finite => "finite",
            EigenFlag::Infinite => "infinite",
            EigenFlag::Degenerate => "degenerate",
            EigenFlag::Padding => "padding",
        }
    }

    fn parse(s: &str) -> Option<EigenFlag> {
        [
            EigenFlag::Finite,
            EigenFlag::Infinite,
            EigenFlag::Degenerate,
            EigenFlag::Padding,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRow {
    pub index: usize,
    pub t: C64,
    pub s: C64,
    pub lambda: C64,
    pub flag: EigenFlag,
}

/// Rows for the diagonal of the triangularized pair. The `padding` finite
/// ratios closest to 1 are flagged as padding; `projected` extra infinite rows
/// (with placeholder `t = 1, s = 0`) stand for directions removed by compression.
pub fn solver_rows(d: &DiagonalEstimates, tol: f64, padding: usize, projected: usize) -> Vec<EigenRow> {
    let mut rows: Vec<EigenRow> =
        d.t.iter()
            .zip(&d.s)
            .enumerate()
            .map(|(index, (&t, &s))| {
                let (lambda, flag) = if s.norm() > tol {
                    (t / s, EigenFlag::Finite)
                } else if t.norm() > tol {
                    (C64::new(f64::INFINITY, 0.0), EigenFlag::Infinite)
                } else {
                    (C64::new(f64::NAN, f64::NAN), EigenFlag::Degenerate)
                };
                EigenRow {
                    index,
                    t,
                    s,
                    lambda,
                    flag,
                }
            })
            .collect();
    let mut finite: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].flag == EigenFlag::Finite).collect();
    finite.sort_by(|&i, &j| {
        (rows[i].lambda - ONE)
            .norm()
            .total_cmp(&(rows[j].lambda - ONE).norm())
            .then(i.cmp(&j))
    });
    for &i in finite.iter().take(padding) {
        rows[i].flag = EigenFlag::Padding;
    }
    let base = rows.len();
    rows.extend((0..projected).map(|k| EigenRow {
        index: base + k,
        t: ONE,
        s: ZERO,
        lambda: C64::new(f64::INFINITY, 0.0),
        flag: EigenFlag::Infinite,
    }));
    rows
}

/// Oracle rows: finite eigenvalues sorted by real then imaginary part as
/// `(t, s) = (λ, 1)`, then infinite ones as `(1, 0)`. A degenerate pencil gives one
/// `degenerate` row.
pub fn oracle_rows(r: &GeneralizedEigenResult) -> Vec<EigenRow> {
    if r.degenerate {
        let nan = C64::new(f64::NAN, f64::NAN);
        return vec![EigenRow {
            index: 0,
            t: ZERO,
            s: ZERO,
            lambda: nan,
            flag: EigenFlag::Degenerate,
        }];
    }
    let mut finite = r.eigenvalues.clone();
    finite.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut rows: Vec<EigenRow> = finite
        .into_iter()
        .map(|l| EigenRow {
            index: 0,
            t: l,
            s: ONE,
            lambda: l,
            flag: EigenFlag::Finite,
        })
        .collect();
    rows.extend((0..r.infinite_count).map(|_| EigenRow {
        index: 0,
        t: ONE,
        s: ZERO,
        lambda: C64::new(f64::INFINITY, 0.0),
        flag: EigenFlag::Infinite,
    }));
    for (i, row) in rows.iter_mut().enumerate() {
        row.index = i;
    }
    rows
}

const EIGEN_HEADER: &str = "index,re_t,im_t,re_s,im_s,re_lambda,im_lambda,flag";

pub fn write_eigen_csv(path: &Path, rows: &[EigenRow]) -> Result<()> {
    let mut out = format!("{EIGEN_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.index,
            r.t.re,
            r.t.im,
            r.s.re,
            r.s.im,
            r.lambda.re,
            r.lambda.im,
            r.flag.name()
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_eigen_csv(path: &Path) -> Result<Vec<EigenRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == EIGEN_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{EIGEN_HEADER}'"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad("expected 8 fields"));
            }
            let num = |k: usize| f[k].trim().parse::<f64>().map_err(|_| bad("bad number"));
            Ok(EigenRow {
                index: f[0].trim().parse().map_err(|_| bad("bad index"))?,
                t: C64::new(num(1)?, num(2)?),
                s: C64::new(num(3)?, num(4)?),
                lambda: C64::new(num(5)?, num(6)?),
                flag: EigenFlag::parse(f[7].trim()).ok_or_else(|| bad("bad flag"))?,
            })
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, trace: &OptimizationTrace) -> Result<()> {
    let mut out =
        String::from("iteration,loss,gradient_norm,shots_used,wall_ms,restart,exact_loss,param_hash,ancilla_success\n");
    for run in &trace.restarts {
        for r in &run.records {
            let success = r.ancilla_success.map(|s| format!("{s:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:e},{:e},{},{},{},{:e},{:016x},{}",
                r.iteration,
                r.loss,
                r.gradient_norm,
                r.shots_used,
                r.wall_ms,
                run.restart,
                r.exact_loss,
                r.param_hash,
                success
            )
            .unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_qps_csv(path: &Path, rows: &[QpsBenchRow]) -> Result<()> {
    let mut out = String::from("variant,unitaries,dim,shots,rmse\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:e}",
            r.variant.name(),
            r.unitaries,
            r.dim,
            r.shots,
            r.rmse
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Gnuplot script for the CSVs present: loss against iteration for every
/// restart, and RMSE against total shots per snapshot variant.
pub fn gnuplot_script(trace: bool, qps: bool) -> String {
    let mut out = String::from("# gnuplot plot.gp\nset datafile separator ','\nset terminal pngcairo size 900,600\n");
    if trace {
        out.push_str(
            "\nset output 'trace.png'\nset logscale y\nset xlabel 'iteration'\nset ylabel 'loss'\n\
             stats 'trace.csv' using 6 nooutput\n\
             plot for [r=0:int(STATS_max)] 'trace.csv' using 1:($6 == r ? $2 : 1/0) with lines title sprintf('restart %d', r)\n\
             unset logscale\n",
        );
    }
    if qps {
        out.push_str(
            "\nset output 'qps.png'\nset logscale xy\nset xlabel 'total shots'\nset ylabel 'RMSE'\n\
             plot 'qps.csv' using 4:(strcol(1) eq 'single' ? $5 : 1/0) with points pt 7 title 'single', \\\n     \
             'qps.csv' using 4:(strcol(1) eq 'indexed' ? $5 : 1/0) with points pt 5 title 'indexed'\n",
        );
    }
    out
}
