//! Flat `key = value` experiment configuration.
//!
//! Resolution order, later wins: built-in defaults, the config file, the
//! `VQGE_SEED` environment variable, `--a`/`--b`, then `--set` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::ansatz::{Architecture, Rotation};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::vqge::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Oracle,
    QpsBench,
    NoisySolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::QpsBench => "qps-bench",
            Command::NoisySolve => "noisy-solve",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PencilSource {
    Example1,
    Files {
        a: PathBuf,
        b: PathBuf,
    },
    /// Gaussian complex pair of the given dimension.
    Random {
        dim: usize,
    },
    /// Gaussian real pair of the given dimension.
    RandomReal {
        dim: usize,
    },
    /// Banded boundary-value pencil with singular `B`.
    Structured {
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalMode {
    Exact,
    Hadamard { shots: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub pencil: PencilSource,
    pub architecture: Architecture,
    pub layers: usize,
    pub rotation: Rotation,
    pub optimizer: OptimizerConfig,
    /// `None` for exact loss; `Some(shots)` for the sampled circuit.
    pub shots: Option<u64>,
    pub noise: NoiseModel,
    /// Shots per noisy evaluation; `None` reads the exact outcome distribution.
    pub noise_shots: Option<u64>,
    pub diagonal: DiagonalMode,
    /// Compress a singular `B` onto its range before solving.
    pub project: bool,
    /// Divide `A` and `B` by their RMS singular values before optimizing.
    pub normalize: bool,
    pub rank_tol: f64,
    /// Threshold on `|s_ii|` for infinite eigenvalues; `None` is relative to `max |s_ii|`.
    pub eig_tol: Option<f64>,
    /// `(count, n_qubits)` unitary sets for the snapshot benchmark.
    pub qps_sets: Vec<(usize, usize)>,
    pub qps_shots: Vec<u64>,
    /// Independent runs pooled into each RMSE.
    pub qps_repeats: usize,
    pub out: PathBuf,
}

const KEYS: &[&str] = &[
    "pencil",
    "pencil.a",
    "pencil.b",
    "pencil.dim",
    "ansatz",
    "ansatz.layers",
    "ansatz.rotation",
    "mode",
    "shots",
    "seed",
    "opt.learning_rate",
    "opt.fd_step",
    "opt.epsilon",
    "opt.max_iterations",
    "opt.restarts",
    "opt.momentum",
    "opt.timing",
    "noise.gamma",
    "noise.p1",
    "noise.p2",
    "noise.shots",
    "diag",
    "diag.shots",
    "project",
    "normalize",
    "rank_tol",
    "eig_tol",
    "qps.sets",
    "qps.shots",
    "qps.repeats",
    "out",
];

/// The defaults solve the built-in 4×4 example in exact mode.
const DEFAULTS: &[(&str, &str)] = &[
    ("pencil", "example1"),
    ("pencil.dim", "2"),
    ("ansatz", "fanin"),
    ("ansatz.layers", "2"),
    ("ansatz.rotation", "rzryrz"),
    ("mode", "exact"),
    ("shots", "10000"),
    ("seed", "1"),
    ("opt.learning_rate", "0.05"),
    ("opt.fd_step", "0.001"),
    ("opt.epsilon", "1e-12"),
    ("opt.max_iterations", "5000"),
    ("opt.restarts", "10"),
    ("opt.momentum", "none"),
    ("opt.timing", "false"),
    ("noise.gamma", "0.01"),
    ("noise.p1", "0.1"),
    ("noise.p2", "0.3"),
    ("noise.shots", "0"),
    ("diag", "exact"),
    ("diag.shots", "1000000"),
    ("project", "false"),
    ("normalize", "false"),
    ("rank_tol", "1e-10"),
    ("eig_tol", "auto"),
    ("qps.sets", "2x2,4x3"),
    ("qps.shots", "1000,10000,100000,1000000"),
    ("qps.repeats", "4"),
    ("out", "out"),
];

/// Raw key/value table with the origin of each value, for error messages.
#[derive(Debug, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, (String, String)>,
}

impl Default for RawConfig {
    fn default() -> Self {
        let values = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), (v.to_string(), "default".to_string())))
            .collect();
        RawConfig { values }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str, origin: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.values
            .insert(key.to_string(), (value.trim().to_string(), origin.into()));
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message: format!("{source}: {message}"),
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, got '{line}'")))?;
            self.set(k.trim(), v, format!("{source} line {}", i + 1))
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.merge_text(&text, &path.display().to_string())
    }

    /// One `--set key=value` override.
    pub fn merge_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
        self.set(k.trim(), v, "--set")
    }

    fn get(&self, key: &str) -> (&str, &str) {
        let (v, o) = self
            .values
            .get(key)
            .map(|(v, o)| (v.as_str(), o.as_str()))
            .unwrap_or(("", "unset"));
        (v, o)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let (v, origin) = self.get(key);
        v.parse()
            .map_err(|e| Error::Config(format!("{key} = '{v}' ({origin}): {e}")))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str, none: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if self.get(key).0 == none {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let (v, origin) = self.get(key);
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("{key} = '{v}' ({origin}): {e}")))
            })
            .collect()
    }

    pub fn resolve(&self, command: Command) -> Result<ExperimentConfig> {
        let dim: usize = self.parse("pencil.dim")?;
        let pencil = match self.get("pencil").0 {
            "example1" => PencilSource::Example1,
            "file" => {
                let a = self.get("pencil.a").0;
                let b = self.get("pencil.b").0;
                if a.is_empty() || b.is_empty() {
                    return Err(Error::Config("pencil = file needs pencil.a and pencil.b".into()));
                }
                PencilSource::Files {
                    a: a.into(),
                    b: b.into(),
                }
            }
            "random" => PencilSource::Random { dim },
            "random-real" => PencilSource::RandomReal { dim },
            "structured" => PencilSource::Structured { dim },
            other => {
                return Err(Error::Config(format!(
                    "pencil = '{other}': expected example1, file, random, random-real or structured"
                )))
            }
        };
        let shots: u64 = self.parse("shots")?;
        let shots = match self.get("mode").0 {
            "exact" => None,
            "sampled" => Some(shots),
            other => return Err(Error::Config(format!("mode = '{other}': expected exact or sampled"))),
        };
        let diagonal = match self.get("diag").0 {
            "exact" => DiagonalMode::Exact,
            "hadamard" => DiagonalMode::Hadamard {
                shots: self.parse("diag.shots")?,
            },
            other => return Err(Error::Config(format!("diag = '{other}': expected exact or hadamard"))),
        };
        let optimizer = OptimizerConfig {
            learning_rate: self.parse("opt.learning_rate")?,
            fd_step: self.parse("opt.fd_step")?,
            epsilon: self.parse("opt.epsilon")?,
            max_iterations: self.parse("opt.max_iterations")?,
            restarts: self.parse("opt.restarts")?,
            seed: self.parse("seed")?,
            momentum: self.optional("opt.momentum", "none")?,
            initial_params: None,
            record_timing: self.parse("opt.timing")?,
        };
        optimizer.validate()?;
        let noise = NoiseModel {
            gamma: self.parse("noise.gamma")?,
            p1: self.parse("noise.p1")?,
            p2: self.parse("noise.p2")?,
            enabled: command == Command::NoisySolve,
        };
        noise.validate()?;
        let noise_shots = match self.parse::<u64>("noise.shots")? {
            0 => None,
            s => Some(s),
        };
        let qps_sets = self
            .list::<String>("qps.sets")?
            .iter()
            .map(|s| {
                let bad = || Error::Config(format!("qps.sets entry '{s}': expected COUNTxQUBITS"));
                let (c, n) = s.split_once('x').ok_or_else(bad)?;
                Ok((c.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<(usize, usize)>>>()?;
        let cfg = ExperimentConfig {
            command,
            pencil,
            architecture: self.parse("ansatz")?,
            layers: self.parse("ansatz.layers")?,
            rotation: self.parse("ansatz.rotation")?,
            optimizer,
            shots,
            noise,
            noise_shots,
            diagonal,
            project: self.parse("project")?,
            normalize: self.parse("normalize")?,
            rank_tol: self.parse("rank_tol")?,
            eig_tol: self.optional("eig_tol", "auto")?,
            qps_sets,
            qps_shots: self.list("qps.shots")?,
            qps_repeats: self.parse("qps.repeats")?,
            out: self.get("out").0.into(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key = value` lines in key order, as echoed next to the results.
    pub fn echo(&self) -> String {
        self.values.iter().map(|(k, (v, _))| format!("{k} = {v}\n")).collect()
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let PencilSource::Files { a, b } = &self.pencil {
            for p in [a, b] {
                if !p.is_file() {
                    return Err(Error::Config(format!("pencil file {} does not exist", p.display())));
                }
            }
        }
        match self.pencil {
            PencilSource::Random { dim } | PencilSource::RandomReal { dim } if dim == 0 => {
                return Err(Error::Config("pencil.dim must be at least 1".into()))
            }
            PencilSource::Structured { dim } if dim < 3 => {
                return Err(Error::Config("structured pencils need pencil.dim >= 3".into()))
            }
            _ => {}
        }
        if self.layers == 0 {
            return Err(Error::Config("ansatz.layers must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("sampled mode needs shots >= 1".into()));
        }
        if self.qps_sets.iter().any(|&(c, n)| c == 0 || n == 0) || self.qps_shots.contains(&0) || self.qps_repeats == 0
        {
            return Err(Error::Config(
                "qps.sets, qps.shots and qps.repeats must be positive".into(),
            ));
        }
        Ok(())
    }
}
