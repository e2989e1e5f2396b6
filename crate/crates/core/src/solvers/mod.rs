//! Extragradient and gradient descent ascent on manifold pairs.
//!
//! Every solver descends in the first slot (`x`, on the min manifold) and
//! ascends in the second (`y`, on the max manifold). Problems report the
//! Riemannian gradients of the objective itself; the sign pattern lives here.

pub mod schedule;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};

pub use schedule::StepSchedule;

/// Known or estimated problem constants; `None` when unknown.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub ell: Option<f64>,
    pub big_l: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
}

/// `min_x max_y f(x, y)` with `x` on [`min_manifold`](Self::min_manifold)
/// and `y` on [`max_manifold`](Self::max_manifold).
pub trait SaddleProblem: Sync {
    fn min_manifold(&self) -> &Manifold;
    fn max_manifold(&self) -> &Manifold;
    fn value(&self, x: &Point, y: &Point) -> Result<f64>;

    /// `(grad_x f, grad_y f)`.
    fn grad(&self, x: &Point, y: &Point) -> Result<(Tangent, Tangent)>;

    /// Number of terms in a finite-sum objective, if it has that structure.
    fn data_size(&self) -> Option<usize> {
        None
    }

    /// Unbiased gradient estimate from the data terms in `batch`.
    fn batch_grad(&self, _x: &Point, _y: &Point, _batch: &[usize]) -> Result<(Tangent, Tangent)> {
        Err(Error::invalid("problem has no finite-sum structure for minibatch gradients"))
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants::default()
    }

    /// A point pair in the region of interest, used by the constant estimators.
    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        (self.min_manifold().random_point(rng), self.max_manifold().random_point(rng))
    }
}

/// Isotropic Gaussian tangent noise with `E‖ξ_x‖² = E‖ξ_y‖² = σ²/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(NoiseModel { sigma })
    }

    pub fn sample_block(&self, m: &Manifold, x: &Point, rng: &mut ChaCha8Rng) -> Result<Tangent> {
        let dim = m.dim();
        if dim == 0 {
            return Ok(m.zero_tangent(x));
        }
        let g = m.gaussian_tangent(x, rng)?;
        Ok(g.scale(self.sigma / (2.0 * dim as f64).sqrt()))
    }

    pub fn sample(
        &self,
        m_x: &Manifold,
        x: &Point,
        m_y: &Manifold,
        y: &Point,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tangent, Tangent)> {
        Ok((self.sample_block(m_x, x, rng)?, self.sample_block(m_y, y, rng)?))
    }
}

/// Gradient oracle used by the stochastic solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Oracle {
    Exact,
    Gaussian { sigma: f64 },
    Minibatch { batch_size: usize },
}

impl Oracle {
    pub fn validate(&self, p: &dyn SaddleProblem) -> Result<()> {
        match *self {
            Oracle::Exact => Ok(()),
            Oracle::Gaussian { sigma } => NoiseModel::new(sigma).map(|_| ()),
            Oracle::Minibatch { batch_size } => {
                let n = p.data_size().ok_or_else(|| Error::invalid("minibatch oracle needs a finite-sum problem"))?;
                if batch_size == 0 || batch_size > n {
                    return Err(Error::invalid(format!("batch size must lie in [1, {n}], got {batch_size}")));
                }
                Ok(())
            }
        }
    }

    /// Data passes charged per call.
    fn cost(&self, p: &dyn SaddleProblem) -> f64 {
        match *self {
            Oracle::Minibatch { batch_size } => batch_size as f64 / p.data_size().unwrap_or(batch_size) as f64,
            _ => 1.0,
        }
    }
}

/// Draws indices without replacement, reshuffling when an epoch runs out.
#[derive(Clone, Debug)]
pub struct EpochSampler {
    perm: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl EpochSampler {
    pub fn new(n: usize, rng: ChaCha8Rng) -> Self {
        EpochSampler { perm: (0..n).collect(), pos: n, rng }
    }

    pub fn next_batch(&mut self, b: usize) -> Vec<usize> {
        let n = self.perm.len();
        if self.pos + b > n {
            self.perm.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let out = self.perm[self.pos..self.pos + b].to_vec();
        self.pos += b;
        out
    }
}

const STREAM_FIRST_QUERY: u64 = 0;
const STREAM_SECOND_QUERY: u64 = 1;
const STREAM_BATCH: u64 = 2;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Iterates, half-iterates, running means and bookkeeping for one run.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub x: Point,
    pub y: Point,
    pub x_half: Option<Point>,
    pub y_half: Option<Point>,
    pub x_bar: Option<Point>,
    pub y_bar: Option<Point>,
    /// Number of completed steps.
    pub t: usize,
    /// Number of averaged inputs so far.
    pub averaged: usize,
    pub oracle_calls: usize,
    pub data_passes: f64,
    rng_first: ChaCha8Rng,
    rng_second: ChaCha8Rng,
    sampler: Option<EpochSampler>,
    seed: u64,
}

impl SolverState {
    pub fn new(p: &dyn SaddleProblem, x: Point, y: Point, seed: u64) -> Result<Self> {
        p.min_manifold().check_point(&x)?;
        p.max_manifold().check_point(&y)?;
        Ok(SolverState {
            x,
            y,
            x_half: None,
            y_half: None,
            x_bar: None,
            y_bar: None,
            t: 0,
            averaged: 0,
            oracle_calls: 0,
            data_passes: 0.0,
            rng_first: substream(seed, STREAM_FIRST_QUERY),
            rng_second: substream(seed, STREAM_SECOND_QUERY),
            sampler: p.data_size().map(|n| EpochSampler::new(n, substream(seed, STREAM_BATCH))),
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The time-average pair, falling back to the current iterates before the
    /// first step.
    pub fn average(&self) -> (&Point, &Point) {
        match (&self.x_bar, &self.y_bar) {
            (Some(a), Some(b)) => (a, b),
            _ => (&self.x, &self.y),
        }
    }

    fn fold_average(&mut self, p: &dyn SaddleProblem, x_new: &Point, y_new: &Point) -> Result<()> {
        let (xb, yb) = match (&self.x_bar, &self.y_bar) {
            (Some(xb), Some(yb)) => (
                running_mean_update(p.min_manifold(), xb, x_new, self.averaged)?,
                running_mean_update(p.max_manifold(), yb, y_new, self.averaged)?,
            ),
            _ => (x_new.clone(), y_new.clone()),
        };
        self.x_bar = Some(xb);
        self.y_bar = Some(yb);
        self.averaged += 1;
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Query {
    First,
    Second,
}

fn query(
    p: &dyn SaddleProblem,
    s: &mut SolverState,
    oracle: &Oracle,
    which: Query,
    x: &Point,
    y: &Point,
) -> Result<(Tangent, Tangent)> {
    let out = match *oracle {
        Oracle::Exact => p.grad(x, y)?,
        Oracle::Gaussian { sigma } => {
            let (gx, gy) = p.grad(x, y)?;
            let rng = match which {
                Query::First => &mut s.rng_first,
                Query::Second => &mut s.rng_second,
            };
            if sigma == 0.0 {
                (gx, gy)
            } else {
                let noise = NoiseModel::new(sigma)?;
                let (nx, ny) = noise.sample(p.min_manifold(), x, p.max_manifold(), y, rng)?;
                (gx.axpy(1.0, &nx)?, gy.axpy(1.0, &ny)?)
            }
        }
        Oracle::Minibatch { batch_size } => {
            let sampler =
                s.sampler.as_mut().ok_or_else(|| Error::invalid("minibatch oracle needs a finite-sum problem"))?;
            let batch = sampler.next_batch(batch_size);
            p.batch_grad(x, y, &batch)?
        }
    };
    if !out.0.is_finite() || !out.1.is_finite() {
        return Err(Error::numeric("gradient oracle returned non-finite values"));
    }
    s.oracle_calls += 1;
    s.data_passes += oracle.cost(p);
    Ok(out)
}

fn check_eta(eta: f64, allow_zero: bool) -> Result<()> {
    let ok = eta.is_finite() && (eta > 0.0 || (allow_zero && eta == 0.0));
    if !ok {
        return Err(Error::invalid(format!("step size must be positive and finite, got {eta}")));
    }
    Ok(())
}

fn extragradient(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64, oracle: &Oracle) -> Result<()> {
    check_eta(eta, false)?;
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    let mut next = s.clone();
    let (gx, gy) = query(p, &mut next, oracle, Query::First, &s.x, &s.y)?;
    let x_half = mx.exp(&s.x, &gx.scale(-eta))?;
    let y_half = my.exp(&s.y, &gy.scale(eta))?;
    let (hx, hy) = query(p, &mut next, oracle, Query::Second, &x_half, &y_half)?;
    let back_x = mx.log(&x_half, &s.x)?;
    let back_y = my.log(&y_half, &s.y)?;
    next.x = mx.exp(&x_half, &back_x.axpy(-eta, &hx)?)?;
    next.y = my.exp(&y_half, &back_y.axpy(eta, &hy)?)?;
    next.fold_average(p, &x_half, &y_half)?;
    next.x_half = Some(x_half);
    next.y_half = Some(y_half);
    next.t += 1;
    *s = next;
    Ok(())
}

fn descent_ascent(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64, oracle: &Oracle) -> Result<()> {
    check_eta(eta, true)?;
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    let mut next = s.clone();
    let (gx, gy) = query(p, &mut next, oracle, Query::First, &s.x, &s.y)?;
    next.x = mx.exp(&s.x, &gx.scale(-eta))?;
    next.y = my.exp(&s.y, &gy.scale(eta))?;
    // the average runs over x_0, ..., x_{T-1}
    next.fold_average(p, &s.x, &s.y)?;
    next.t += 1;
    *s = next;
    Ok(())
}

/// One corrected extragradient step with exact gradients. On error the state
/// is left untouched.
pub fn rceg_step(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64) -> Result<()> {
    extragradient(p, s, eta, &Oracle::Exact)
}

/// Corrected extragradient with a stochastic oracle; the two queries draw from
/// independent random streams.
pub fn srceg_step(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64, oracle: &Oracle) -> Result<()> {
    oracle.validate(p)?;
    extragradient(p, s, eta, oracle)
}

pub fn rgda_step(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64) -> Result<()> {
    descent_ascent(p, s, eta, &Oracle::Exact)
}

pub fn srgda_step(p: &dyn SaddleProblem, s: &mut SolverState, eta: f64, oracle: &Oracle) -> Result<()> {
    oracle.validate(p)?;
    descent_ascent(p, s, eta, oracle)
}

/// `Exp_{x̄}(Log_{x̄}(x_new) / (t + 1))`.
pub fn running_mean_update(m: &Manifold, x_bar: &Point, x_new: &Point, t: usize) -> Result<Point> {
    let v = m.log(x_bar, x_new)?;
    m.exp(x_bar, &v.scale(1.0 / (t as f64 + 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Rceg,
    Srceg,
    Rgda,
    Srgda,
}

impl SolverKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, SolverKind::Srceg | SolverKind::Srgda)
    }

    pub fn is_extragradient(self) -> bool {
        matches!(self, SolverKind::Rceg | SolverKind::Srceg)
    }

    pub fn oracle_calls_per_step(self) -> usize {
        if self.is_extragradient() {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Rceg => "RCEG",
            SolverKind::Srceg => "SRCEG",
            SolverKind::Rgda => "RGDA",
            SolverKind::Srgda => "SRGDA",
        }
    }

    pub fn step(self, p: &dyn SaddleProblem, s: &mut SolverState, eta: f64, oracle: &Oracle) -> Result<()> {
        match self {
            SolverKind::Rceg => rceg_step(p, s, eta),
            SolverKind::Srceg => srceg_step(p, s, eta, oracle),
            SolverKind::Rgda => rgda_step(p, s, eta),
            SolverKind::Srgda => srgda_step(p, s, eta, oracle),
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rceg" => Ok(SolverKind::Rceg),
            "srceg" => Ok(SolverKind::Srceg),
            "rgda" => Ok(SolverKind::Rgda),
            "srgda" => Ok(SolverKind::Srgda),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub solver: SolverKind,
    pub schedule: StepSchedule,
    pub oracle: Oracle,
    pub iters: usize,
    pub seed: u64,
}

/// Final state of a run and, if it stopped early, the error and the step at
/// which it happened.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: SolverState,
    pub failure: Option<(usize, Error)>,
}

impl RunOutcome {
    pub fn into_result(self) -> Result<SolverState> {
        match self.failure {
            None => Ok(self.state),
            Some((_, e)) => Err(e),
        }
    }
}

/// Runs `spec.iters` steps from `(x0, y0)`.
///
/// `observe` sees the initial state with the first step size, and then the
/// state after every step together with the step size that produced it; an
/// error from it stops the run like a solver error.
pub fn run<F>(p: &dyn SaddleProblem, x0: Point, y0: Point, spec: &RunSpec, mut observe: F) -> Result<RunOutcome>
where
    F: FnMut(&SolverState, f64) -> Result<()>,
{
    if spec.iters == 0 {
        return Err(Error::invalid("iteration count must be at least 1"));
    }
    spec.schedule.validate()?;
    if spec.solver.is_stochastic() {
        spec.oracle.validate(p)?;
    }
    let mut state = SolverState::new(p, x0, y0, spec.seed)?;
    observe(&state, spec.schedule.eta(0)?)?;
    for t in 0..spec.iters {
        let step = spec
            .schedule
            .eta(t)
            .and_then(|eta| spec.solver.step(p, &mut state, eta, &spec.oracle).map(|_| eta))
            .and_then(|eta| observe(&state, eta));
        if let Err(e) = step {
            return Ok(RunOutcome { state, failure: Some((t + 1, e)) });
        }
    }
    Ok(RunOutcome { state, failure: None })
}
