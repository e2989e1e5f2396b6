//! One configured run: constants, step schedule, initial pair and trace.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{EtaRule, EtaSpec, RunConfig};
use super::metrics::{distance_gap, gradient_norm};
use super::reference::ReferenceRecord;
use super::trace::{Trace, TraceRow};
use super::Problem;
use crate::curvature::CurvatureConstants;
use crate::error::{Error, Result};
use crate::manifold::{Point, PointRecord};
use crate::problems::{estimate_monotonicity, estimate_smoothness, EstimateOptions};
use crate::solvers::schedule::{rceg_scsc, rgda_cc, srceg_cc, srceg_scsc, srgda_cc};
use crate::solvers::{self, RunSpec, SaddleProblem, SolverKind, SolverState, StepSchedule};

/// Runs whose iterates move farther than this from the start are treated as
/// diverged.
pub const DIVERGENCE_RADIUS: f64 = 1e6;

/// Random sub-stream of the run seed used for the default initial pair.
const STREAM_INIT: u64 = 3;

/// Pinned initial pair. Any JSON object with `x` and `y` point records works,
/// so reference files can be reused.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRecord {
    pub x: PointRecord,
    pub y: PointRecord,
}

fn read_pair(p: &Problem, path: &Path) -> Result<(Point, Point)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let rec: InitRecord = serde_json::from_str(&text)?;
    Ok((rec.x.to_point(p.min_manifold())?, rec.y.to_point(p.max_manifold())?))
}

/// Everything a run needs apart from the solver seed.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub cfg: RunConfig,
    pub problem: Problem,
    pub ell_hat: Option<f64>,
    pub mu_hat: Option<f64>,
    /// Curvature constants at the configured diameter, or why they are
    /// undefined there.
    pub curvature: std::result::Result<CurvatureConstants, String>,
    pub schedule: StepSchedule,
    pub reference: Option<(Point, Point)>,
}

/// Outcome of [`Experiment::run`]. The trace holds every row recorded before
/// a failure.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub trace: Trace,
    pub state: SolverState,
    pub failure: Option<(usize, Error)>,
}

impl RunReport {
    pub fn into_result(self) -> Result<Trace> {
        match self.failure {
            None => Ok(self.trace),
            Some((_, e)) => Err(e),
        }
    }
}

impl Experiment {
    pub fn prepare(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let problem = Problem::build(cfg)?;
        let known = problem.constants();
        let opts = EstimateOptions {
            samples: cfg.estimate_samples,
            radius: cfg.estimate_radius,
            seed: cfg.data_seed,
            exec: cfg.execution,
        };
        let needs_ell = matches!(cfg.eta, EtaSpec::Rule(_));
        let needs_mu = cfg.eta == EtaSpec::Rule(EtaRule::Theorem);
        let ell_hat = match cfg.ell.or(known.ell) {
            Some(v) => Some(v),
            None if needs_ell => Some(estimate_smoothness(&problem, &opts)?),
            None => None,
        };
        let mu_hat = match cfg.mu.or(known.mu) {
            Some(v) => Some(v),
            None if needs_mu => Some(estimate_monotonicity(&problem, &opts)?),
            None => None,
        };
        let curvature = CurvatureConstants::for_pair(problem.min_manifold(), problem.max_manifold(), cfg.diameter)
            .map_err(|e| e.to_string());
        let schedule = resolve_schedule(cfg, ell_hat, mu_hat, &curvature)?;
        schedule.validate()?;
        let reference = match &cfg.reference {
            Some(path) if path.exists() => {
                let rec = ReferenceRecord::read(path)?;
                Some(rec.to_points(&problem)?)
            }
            Some(path) => {
                log::warn!("reference {} not found; distance gap omitted", path.display());
                None
            }
            None => problem.known_saddle(),
        };
        Ok(Experiment { cfg: cfg.clone(), problem, ell_hat, mu_hat, curvature, schedule, reference })
    }

    pub fn initial_pair(&self, seed: u64) -> Result<(Point, Point)> {
        match &self.cfg.init_from {
            Some(path) => read_pair(&self.problem, path),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(STREAM_INIT);
                Ok(self.problem.sample_pair(&mut rng))
            }
        }
    }

    fn header(&self, seed: u64) -> Trace {
        let cfg = &self.cfg;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let mut t = Trace::default();
        t.push_meta("rminmax_version", env!("CARGO_PKG_VERSION"));
        t.push_meta("seed", seed);
        t.push_meta("problem", self.problem.kind());
        t.push_meta("data_seed", cfg.data_seed);
        t.push_meta("solver", cfg.solver.name());
        t.push_meta("oracle", serde_json::to_string(&cfg.oracle()).expect("oracle serializes"));
        t.push_meta("schedule", self.schedule.describe());
        t.push_meta("eta_0", opt(self.schedule.eta(0).ok()));
        t.push_meta("iters", cfg.iters);
        t.push_meta("ell_hat", opt(self.ell_hat));
        t.push_meta("mu_hat", opt(self.mu_hat));
        t.push_meta("diameter", cfg.diameter);
        match &self.curvature {
            Ok(c) => {
                t.push_meta("xi_lower_0", c.xi_lower_0);
                t.push_meta("xi_upper_0", c.xi_upper_0);
                t.push_meta("tau_0", c.tau_0);
            }
            Err(e) => t.push_meta("curvature", format!("undefined ({})", e.replace('\n', " "))),
        }
        t.push_meta("d0", cfg.d0_or_default());
        t.push_meta("reference", if self.reference.is_some() { "yes" } else { "no" });
        t
    }

    /// Runs with `cfg.seed`.
    pub fn run(&self) -> Result<RunReport> {
        self.run_seed(self.cfg.seed_or_err()?)
    }

    pub fn run_seed(&self, seed: u64) -> Result<RunReport> {
        let (x0, y0) = self.initial_pair(seed)?;
        self.run_from(seed, x0, y0)
    }

    pub fn run_from(&self, seed: u64, x0: Point, y0: Point) -> Result<RunReport> {
        let cfg = &self.cfg;
        let p = &self.problem;
        let (mx, my) = (p.min_manifold(), p.max_manifold());
        let spec = RunSpec {
            solver: cfg.solver,
            schedule: self.schedule.clone(),
            oracle: cfg.oracle(),
            iters: cfg.iters,
            seed,
        };
        let mut trace = self.header(seed);
        let start = Instant::now();
        let mut reach = 0.0_f64;
        let (sx, sy) = (x0.clone(), y0.clone());
        let outcome = solvers::run(p, x0, y0, &spec, |s, eta| {
            let last = gradient_norm(p, &s.x, &s.y)?;
            let (xa, ya) = s.average();
            let avg = gradient_norm(p, xa, ya)?;
            let (gap, gap_avg) = match &self.reference {
                Some((xs, ys)) => (Some(distance_gap(p, &s.x, &s.y, xs, ys)?), Some(distance_gap(p, xa, ya, xs, ys)?)),
                None => (None, None),
            };
            reach = reach.max(mx.distance(&sx, &s.x)?).max(my.distance(&sy, &s.y)?);
            let row = TraceRow {
                iter: s.t,
                data_passes: s.data_passes,
                grad_norm: last.combined,
                grad_norm_x: last.x,
                grad_norm_y: last.y,
                grad_norm_avg: avg.combined,
                dist_gap: gap,
                dist_gap_avg: gap_avg,
                eta_t: eta,
                empirical_diameter: reach,
                elapsed_ms: cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
            };
            let finite = [row.grad_norm, row.grad_norm_avg, row.empirical_diameter].iter().all(|v| v.is_finite())
                && [row.dist_gap, row.dist_gap_avg].iter().flatten().all(|v| v.is_finite());
            if !finite {
                return Err(Error::numeric(format!("non-finite metric at iteration {}", s.t)));
            }
            if reach > DIVERGENCE_RADIUS {
                return Err(Error::numeric(format!(
                    "iterates left the ball of radius {DIVERGENCE_RADIUS:e} at iteration {}",
                    s.t
                )));
            }
            trace.rows.push(row);
            Ok(())
        })?;
        Ok(RunReport { trace, state: outcome.state, failure: outcome.failure })
    }
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("the step rule needs {what}")))
}

/// Turns the configured step rule into a schedule.
///
/// A numeric `eta` is used as is (or as the first branch of the practical
/// rule when `a` is set). `auto` uses `1/(2ℓ̂)`. `theorem` uses the step of the
/// matching convergence result: the strongly-convex-strongly-concave one when
/// `μ̂ > 0`, the convex-concave one otherwise.
pub fn resolve_schedule(
    cfg: &RunConfig,
    ell_hat: Option<f64>,
    mu_hat: Option<f64>,
    curvature: &std::result::Result<CurvatureConstants, String>,
) -> Result<StepSchedule> {
    match cfg.eta {
        EtaSpec::Value(eta) => Ok(match cfg.a {
            Some(a) => StepSchedule::Practical { ell: 1.0 / (2.0 * eta), a },
            None => StepSchedule::constant(eta),
        }),
        EtaSpec::Rule(EtaRule::Auto) => {
            let ell = need(ell_hat, "a smoothness constant")?;
            Ok(match cfg.a {
                Some(a) => StepSchedule::Practical { ell, a },
                None => StepSchedule::constant(1.0 / (2.0 * ell)),
            })
        }
        EtaSpec::Rule(EtaRule::Theorem) => {
            let c = curvature.as_ref().map_err(|e| Error::Domain(e.clone()))?;
            let d0 = cfg.d0_or_default();
            let t = cfg.iters;
            let mu = mu_hat.filter(|m| *m > 0.0);
            match cfg.solver {
                SolverKind::Rceg => {
                    let ell = need(ell_hat, "a smoothness constant")?;
                    Ok(StepSchedule::constant(match mu {
                        Some(mu) => rceg_scsc(ell, mu, c.tau_0, c.xi_lower_0)?,
                        None => srceg_cc(ell, c.tau_0, c.xi_upper_0, t, d0, 0.0)?,
                    }))
                }
                SolverKind::Srceg => {
                    let ell = need(ell_hat, "a smoothness constant")?;
                    let sigma = need(cfg.sigma, "--sigma")?;
                    Ok(StepSchedule::constant(match mu {
                        Some(mu) => srceg_scsc(ell, mu, c.tau_0, c.xi_lower_0, t, d0, sigma)?,
                        None => srceg_cc(ell, c.tau_0, c.xi_upper_0, t, d0, sigma)?,
                    }))
                }
                SolverKind::Rgda | SolverKind::Srgda => match mu {
                    Some(mu) => Ok(StepSchedule::RgdaScsc { mu }),
                    None => {
                        let big_l = need(cfg.lipschitz, "--lipschitz")?;
                        Ok(StepSchedule::constant(if cfg.solver == SolverKind::Rgda {
                            rgda_cc(big_l, t, d0, c.xi_upper_0)?
                        } else {
                            srgda_cc(big_l, need(cfg.sigma, "--sigma")?, t, d0, c.xi_upper_0)?
                        }))
                    }
                },
            }
        }
    }
}
