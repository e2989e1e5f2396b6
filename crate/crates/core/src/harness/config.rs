use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::solvers::{Oracle, SolverKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    #[default]
    Rpca,
    Karcher,
    Bilinear,
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rpca" => Ok(ProblemKind::Rpca),
            "karcher" => Ok(ProblemKind::Karcher),
            "bilinear" => Ok(ProblemKind::Bilinear),
            other => Err(Error::Config(format!("unknown problem {other:?}"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Rpca => "rpca",
            ProblemKind::Karcher => "karcher",
            ProblemKind::Bilinear => "bilinear",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaRule {
    /// `1/(2ℓ̂)`, or `min{1/(2ℓ̂), a/t}` when `a` is set.
    Auto,
    /// The step size prescribed for the solver by its convergence theorem.
    Theorem,
}

/// Step-size selection: a number, `auto` or `theorem`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(f64),
    Rule(EtaRule),
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Rule(EtaRule::Auto)
    }
}

impl FromStr for EtaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(EtaSpec::Rule(EtaRule::Auto)),
            "theorem" => Ok(EtaSpec::Rule(EtaRule::Theorem)),
            other => other
                .parse::<f64>()
                .map(EtaSpec::Value)
                .map_err(|_| Error::Config(format!("--eta expects a number, 'auto' or 'theorem', got {s:?}"))),
        }
    }
}

/// One experiment. Serialized as a flat JSON object whose keys mirror the CLI
/// flags; missing keys take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Strong-convexity term of the Euclidean test problem.
    pub reg: f64,
    /// Load the instance from JSON instead of generating it.
    pub instance: Option<PathBuf>,
    pub data_seed: u64,
    pub solver: SolverKind,
    pub eta: EtaSpec,
    pub a: Option<f64>,
    pub ell: Option<f64>,
    pub mu: Option<f64>,
    pub lipschitz: Option<f64>,
    pub sigma: Option<f64>,
    pub batch_size: Option<usize>,
    pub iters: usize,
    pub seed: Option<u64>,
    /// Diameter bound at which the curvature constants are evaluated.
    pub diameter: f64,
    /// Initial distance estimate; defaults to `diameter²`.
    pub d0: Option<f64>,
    pub estimate_samples: usize,
    pub estimate_radius: f64,
    pub out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub init_from: Option<PathBuf>,
    pub timings: bool,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::Rpca,
            d: 25,
            n: 40,
            alpha: 1.0,
            gamma: 4.0,
            reg: 0.0,
            instance: None,
            data_seed: 0,
            solver: SolverKind::Rceg,
            eta: EtaSpec::default(),
            a: None,
            ell: None,
            mu: None,
            lipschitz: None,
            sigma: None,
            batch_size: None,
            iters: 500,
            seed: None,
            diameter: 1.0,
            d0: None,
            estimate_samples: 200,
            estimate_radius: 0.5,
            out: None,
            reference: None,
            init_from: None,
            timings: false,
            execution: Execution::default(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(cfg_err(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))
    }

    /// Cross-field checks; every failure is a configuration error.
    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(cfg_err("iters must be at least 1"));
        }
        if self.instance.is_none() {
            if self.d == 0 {
                return Err(cfg_err("d must be positive"));
            }
            if self.problem != ProblemKind::Bilinear && self.n == 0 {
                return Err(cfg_err("n must be positive"));
            }
        }
        match self.problem {
            ProblemKind::Rpca => positive("alpha", self.alpha)?,
            ProblemKind::Karcher => positive("gamma", self.gamma)?,
            ProblemKind::Bilinear => {
                if !(self.reg >= 0.0) || !self.reg.is_finite() {
                    return Err(cfg_err(format!("reg must be finite and >= 0, got {}", self.reg)));
                }
            }
        }
        if let EtaSpec::Value(eta) = self.eta {
            positive("eta", eta)?;
        }
        for (name, v) in [("a", self.a), ("ell", self.ell), ("lipschitz", self.lipschitz), ("d0", self.d0)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(mu) = self.mu {
            if !mu.is_finite() {
                return Err(cfg_err("mu must be finite"));
            }
        }
        positive("diameter", self.diameter)?;
        positive("estimate_radius", self.estimate_radius)?;
        if self.estimate_samples == 0 {
            return Err(cfg_err("estimate_samples must be at least 1"));
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(cfg_err(format!("sigma must be finite and >= 0, got {s}")));
            }
        }
        if self.solver.is_stochastic() {
            if self.sigma.is_none() && self.batch_size.is_none() {
                return Err(cfg_err(format!("{} needs --sigma or --batch-size", self.solver.name())));
            }
            if let Some(b) = self.batch_size {
                if self.problem != ProblemKind::Rpca {
                    return Err(cfg_err("--batch-size needs a finite-sum problem (rpca)"));
                }
                if b == 0 || (self.instance.is_none() && b > self.n) {
                    return Err(cfg_err(format!("batch size must lie in [1, n = {}], got {b}", self.n)));
                }
            }
        } else if self.sigma.is_some() || self.batch_size.is_some() {
            return Err(cfg_err(format!(
                "{} is deterministic; --sigma and --batch-size do not apply",
                self.solver.name()
            )));
        }
        Ok(())
    }

    /// Minibatch when a batch size is given, otherwise Gaussian noise of size
    /// `sigma`, otherwise exact.
    pub fn oracle(&self) -> Oracle {
        if !self.solver.is_stochastic() {
            return Oracle::Exact;
        }
        match (self.batch_size, self.sigma) {
            (Some(b), _) => Oracle::Minibatch { batch_size: b },
            (None, Some(sigma)) => Oracle::Gaussian { sigma },
            (None, None) => Oracle::Exact,
        }
    }

    pub fn seed_or_err(&self) -> Result<u64> {
        self.seed.ok_or_else(|| cfg_err("--seed is required"))
    }

    pub fn d0_or_default(&self) -> f64 {
        self.d0.unwrap_or(self.diameter * self.diameter)
    }
}
