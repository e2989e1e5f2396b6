//! Reference saddles for the distance-gap metric.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::Experiment;
use super::metrics::gradient_norm;
use super::Problem;
use crate::error::{Error, Result};
use crate::manifold::{Point, PointRecord};
use crate::solvers::{rceg_step, SaddleProblem, SolverState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub x: PointRecord,
    pub y: PointRecord,
    pub grad_norm: f64,
    /// Total extragradient steps spent on this point, across refinements.
    pub iterations: usize,
}

impl ReferenceRecord {
    pub fn new(p: &Problem, x: &Point, y: &Point, iterations: usize) -> Result<Self> {
        Ok(ReferenceRecord {
            x: PointRecord::from_point(p.min_manifold(), x)?,
            y: PointRecord::from_point(p.max_manifold(), y)?,
            grad_norm: gradient_norm(p, x, y)?.combined,
            iterations,
        })
    }

    pub fn to_points(&self, p: &Problem) -> Result<(Point, Point)> {
        Ok((self.x.to_point(p.min_manifold())?, self.y.to_point(p.max_manifold())?))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceOptions {
    /// Stop once the gradient norm is at most this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { tol: 1e-10, max_iters: 20_000 }
    }
}

/// Runs corrected extragradient with the experiment's step rule until the
/// gradient norm reaches `opts.tol`, starting from `previous` when given.
///
/// Returns the iterate with the smallest gradient norm seen, which is never
/// worse than `previous`. Closed-form saddles are returned directly.
pub fn solve_reference(
    exp: &Experiment,
    opts: &ReferenceOptions,
    previous: Option<&ReferenceRecord>,
) -> Result<ReferenceRecord> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let p = &exp.problem;
    if let Some((xs, ys)) = p.known_saddle() {
        return ReferenceRecord::new(p, &xs, &ys, 0);
    }
    let (x0, y0, spent) = match previous {
        Some(r) => {
            let (x, y) = r.to_points(p)?;
            (x, y, r.iterations)
        }
        None => {
            let (x, y) = exp.initial_pair(exp.cfg.seed.unwrap_or(0))?;
            (x, y, 0)
        }
    };
    let mut best = ReferenceRecord::new(p, &x0, &y0, spent)?;
    if previous.is_some_and(|r| r.grad_norm < best.grad_norm) {
        best = previous.cloned().expect("checked");
    }
    let mut state = SolverState::new(p, x0, y0, 0)?;
    for t in 0..opts.max_iters {
        if best.grad_norm <= opts.tol {
            break;
        }
        let eta = exp.schedule.eta(t)?;
        if let Err(e) = rceg_step(p, &mut state, eta) {
            if e.is_numeric() {
                log::warn!("reference run stopped at step {t}: {e}");
                break;
            }
            return Err(e);
        }
        let g = match gradient_norm(p, &state.x, &state.y) {
            Ok(g) if g.combined.is_finite() => g.combined,
            Ok(_) => break,
            Err(e) if e.is_numeric() => break,
            Err(e) => return Err(e),
        };
        if g < best.grad_norm {
            best = ReferenceRecord::new(p, &state.x, &state.y, spent + t + 1)?;
        }
    }
    if best.grad_norm > opts.tol {
        log::warn!("reference gradient norm {:e} is above the tolerance {:e}", best.grad_norm, opts.tol);
    }
    Ok(best)
}
