use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::rng::{stream, EVAL, INIT};

use super::loss_circuit::{build_loss_circuit, loss_noisy, loss_sampled, LossEstimate};
use super::problem::VqgeProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossMode {
    /// Dense `Σ_{i>j}` of the transformed pair.
    Exact,
    /// Shot-sampled loss circuit.
    Sampled { shots: u64 },
    /// Loss circuit under a noise model, on the density-matrix path. `shots: None`
    /// uses the exact outcome distribution.
    Noisy { model: NoiseModel, shots: Option<u64> },
}

impl LossMode {
    pub fn shots(&self) -> u64 {
        match *self {
            LossMode::Exact => 0,
            LossMode::Sampled { shots } => shots,
            LossMode::Noisy { shots, .. } => shots.unwrap_or(0),
        }
    }

    fn is_stochastic(&self) -> bool {
        self.shots() > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub fd_step: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Heavy-ball coefficient; `None` is plain gradient descent.
    pub momentum: Option<f64>,
    /// Starting point for the first restart instead of a random draw.
    pub initial_params: Option<Vec<f64>>,
    /// Fill `wall_ms` in the trace. Off by default so traces are reproducible.
    pub record_timing: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.1,
            fd_step: 1e-3,
            epsilon: 1e-6,
            max_iterations: 5000,
            restarts: 10,
            seed: 0,
            momentum: None,
            initial_params: None,
            record_timing: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("fd_step", self.fd_step),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iterations and restarts must be at least 1".into()));
        }
        if let Some(mu) = self.momentum {
            if !(0.0..1.0).contains(&mu) {
                return Err(Error::Config(format!("momentum must lie in [0, 1), got {mu}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub loss: f64,
    pub gradient_norm: f64,
    /// Shots spent on this iteration (centre plus gradient evaluations).
    pub shots_used: u64,
    pub wall_ms: u64,
    pub param_hash: u64,
    /// Dense loss at the same parameters, for stochastic and noisy modes.
    pub exact_loss: f64,
    /// Ancilla-success rate of the centre evaluation; `None` in exact mode.
    pub ancilla_success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub final_loss: f64,
    pub final_params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub restarts: Vec<RestartTrace>,
    /// Index into `restarts` of the run that is reported.
    pub best: usize,
    theta_len: usize,
}

impl OptimizationTrace {
    pub fn best_run(&self) -> &RestartTrace {
        &self.restarts[self.best]
    }

    pub fn iterations(&self) -> &[IterationRecord] {
        &self.best_run().records
    }

    pub fn converged(&self) -> bool {
        self.best_run().converged
    }

    pub fn final_loss(&self) -> f64 {
        self.best_run().final_loss
    }

    pub fn final_params(&self) -> &[f64] {
        &self.best_run().final_params
    }

    pub fn theta(&self) -> &[f64] {
        &self.final_params()[..self.theta_len]
    }

    pub fn phi(&self) -> &[f64] {
        &self.final_params()[self.theta_len..]
    }
}

/// FNV-1a over the bit patterns, enough to tell parameter snapshots apart in a trace.
pub fn param_hash(params: &[f64]) -> u64 {
    params
        .iter()
        .flat_map(|x| x.to_bits().to_le_bytes())
        .fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

/// Central differences `(L(x + Δe_i) − L(x − Δe_i)) / 2Δ`. `loss(x, k)` receives the
/// evaluation slot `k` (`2i+1` for `+Δ` on component `i`, `2i+2` for `−Δ`) so that
/// stochastic losses can key their random stream on it. Components run in parallel.
pub fn gradient_fd<F>(loss: F, params: &[f64], delta: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    if !(delta > 0.0) {
        return Err(Error::Domain {
            name: "fd_step",
            value: delta,
        });
    }
    (0..params.len())
        .into_par_iter()
        .map(|i| {
            let mut x = params.to_vec();
            x[i] = params[i] + delta;
            let plus = loss(&x, 2 * i as u64 + 1)?;
            x[i] = params[i] - delta;
            let minus = loss(&x, 2 * i as u64 + 2)?;
            Ok((plus - minus) / (2.0 * delta))
        })
        .collect()
}

impl VqgeProblem {
    /// One loss evaluation in `mode`; stochastic modes draw from stream
    /// `[EVAL, restart, iteration, slot]` of `seed`.
    pub fn evaluate(&self, params: &[f64], mode: &LossMode, seed: u64, labels: [u64; 3]) -> Result<LossEstimate> {
        let mut rng = stream(seed, &[EVAL, labels[0], labels[1], labels[2]]);
        match mode {
            LossMode::Exact => Ok(LossEstimate {
                loss: self.loss_exact(params)?,
                std_error: 0.0,
                kept: 0,
                shots: 0,
                ancilla_success: f64::NAN,
            }),
            LossMode::Sampled { shots } => loss_sampled(&build_loss_circuit(self, params)?, *shots, &mut rng),
            LossMode::Noisy { model, shots } => loss_noisy(&build_loss_circuit(self, params)?, model, *shots, &mut rng),
        }
    }
}

/// Gradient descent on the loss with finite-difference gradients and random
/// restarts. Restarts stop at the first run that meets `epsilon`; otherwise the
/// run with the lowest final loss is reported.
pub fn optimize(problem: &VqgeProblem, mode: &LossMode, cfg: &OptimizerConfig) -> Result<OptimizationTrace> {
    cfg.validate()?;
    if let LossMode::Noisy { model, .. } = mode {
        model.validate()?;
    }
    let n_params = problem.parameter_count();
    let mut runs = Vec::new();
    for r in 0..cfg.restarts {
        let start = match (&cfg.initial_params, r) {
            (Some(p), 0) => {
                if p.len() != n_params {
                    return Err(Error::Arity {
                        expected: n_params,
                        got: p.len(),
                    });
                }
                p.clone()
            }
            _ => random_start(problem, cfg.seed, r),
        };
        let run = descend(problem, mode, cfg, r, start)?;
        let done = run.converged;
        runs.push(run);
        if done {
            break;
        }
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (!a.1.converged, a.1.final_loss)
                .partial_cmp(&(!b.1.converged, b.1.final_loss))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(OptimizationTrace {
        restarts: runs,
        best,
        theta_len: problem.spec_q().parameter_count(),
    })
}

fn random_start(problem: &VqgeProblem, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = stream(seed, &[INIT, restart as u64]);
    let mut p = problem.spec_q().random_params(&mut rng);
    p.extend(problem.spec_z().random_params(&mut rng));
    p
}

fn descend(
    problem: &VqgeProblem,
    mode: &LossMode,
    cfg: &OptimizerConfig,
    restart: usize,
    start: Vec<f64>,
) -> Result<RestartTrace> {
    let mut params = start;
    let mut velocity = vec![0.0; params.len()];
    let mut records = Vec::new();
    let mut recent: Vec<f64> = Vec::new();
    let r = restart as u64;
    let shots = mode.shots();
    for t in 0..=cfg.max_iterations {
        let clock = Instant::now();
        let centre_eval = problem.evaluate(&params, mode, cfg.seed, [r, t as u64, 0])?;
        let centre = centre_eval.loss;
        // stochastic losses stop on a three-evaluation moving average
        recent.push(centre);
        if recent.len() > 3 {
            recent.remove(0);
        }
        let statistic = if mode.is_stochastic() {
            recent.iter().sum::<f64>() / recent.len() as f64
        } else {
            centre
        };
        let exact_loss = match mode {
            LossMode::Exact => centre,
            _ => problem.loss_exact(&params)?,
        };
        let converged = statistic < cfg.epsilon;
        let last = t == cfg.max_iterations;
        let mut record = IterationRecord {
            iteration: t,
            loss: centre,
            gradient_norm: 0.0,
            shots_used: shots,
            wall_ms: 0,
            param_hash: param_hash(&params),
            exact_loss,
            ancilla_success: (!matches!(mode, LossMode::Exact)).then_some(centre_eval.ancilla_success),
        };
        if converged || last {
            if cfg.record_timing {
                record.wall_ms = clock.elapsed().as_millis() as u64;
            }
            records.push(record);
            return Ok(RestartTrace {
                restart,
                records,
                converged,
                final_loss: statistic,
                final_params: params,
            });
        }
        let grad = gradient_fd(
            |x, k| Ok(problem.evaluate(x, mode, cfg.seed, [r, t as u64, k])?.loss),
            &params,
            cfg.fd_step,
        )?;
        record.gradient_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        record.shots_used = shots * (1 + 2 * params.len() as u64);
        match cfg.momentum {
            Some(mu) => {
                for ((v, p), g) in velocity.iter_mut().zip(params.iter_mut()).zip(&grad) {
                    *v = mu * *v - cfg.learning_rate * g;
                    *p += *v;
                }
            }
            None => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= cfg.learning_rate * g;
                }
            }
        }
        if cfg.record_timing {
            record.wall_ms = clock.elapsed().as_millis() as u64;
        }
        records.push(record);
    }
    unreachable!("the loop returns on its last iteration")
}
