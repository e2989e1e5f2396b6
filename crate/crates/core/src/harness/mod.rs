//! Experiment runner behind the `rminmax` CLI: configuration, problem
//! construction, metrics, traces, grid search, reference saddles and plot data.

pub mod config;
pub mod experiment;
pub mod grid;
pub mod metrics;
pub mod plot;
pub mod reference;
pub mod trace;

use std::path::Path;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

pub use config::{EtaRule, EtaSpec, ProblemKind, RunConfig};
pub use experiment::{Experiment, RunReport};
pub use grid::{grid_search, GridReport, GridSpec};
pub use metrics::{distance_gap, gradient_norm, GradNorm};
pub use plot::{plot_rows, write_plot_csv, write_plot_svg, PlotRow};
pub use reference::{solve_reference, ReferenceOptions, ReferenceRecord};
pub use trace::{Trace, TraceRow};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};
use crate::problems::{gen_spd_data, BilinearInstance, InstanceRecord, KarcherInstance, RpcaInstance};
use crate::solvers::{ProblemConstants, SaddleProblem};

/// Eigenvalue range of generated data matrices.
pub const DATA_EIGENVALUES: (f64, f64) = (0.2, 4.5);

/// Any of the built-in problems.
#[derive(Clone, Debug)]
pub enum Problem {
    Rpca(RpcaInstance),
    Karcher(KarcherInstance),
    Bilinear(BilinearInstance),
}

impl Problem {
    /// Loads `cfg.instance` if set, otherwise generates an instance from
    /// `cfg.data_seed`.
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let p = match &cfg.instance {
            Some(path) => Self::load(path)?,
            None => {
                let (lo, hi) = DATA_EIGENVALUES;
                match cfg.problem {
                    ProblemKind::Rpca => {
                        Problem::Rpca(RpcaInstance::new(cfg.alpha, gen_spd_data(cfg.d, cfg.n, lo, hi, cfg.data_seed)?)?)
                    }
                    ProblemKind::Karcher => Problem::Karcher(KarcherInstance::new(
                        cfg.gamma,
                        gen_spd_data(cfg.d, cfg.n, lo, hi, cfg.data_seed)?,
                    )?),
                    ProblemKind::Bilinear => {
                        Problem::Bilinear(BilinearInstance::new(DMatrix::identity(cfg.d, cfg.d), cfg.reg)?)
                    }
                }
            }
        };
        if p.kind() != cfg.problem {
            return Err(Error::Config(format!(
                "instance file holds a {} problem, config asks for {}",
                p.kind(),
                cfg.problem
            )));
        }
        Ok(p.with_execution(cfg.execution))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let rec: InstanceRecord = serde_json::from_str(&text)?;
        Self::from_record(&rec)
    }

    pub fn from_record(rec: &InstanceRecord) -> Result<Self> {
        Ok(match rec {
            InstanceRecord::Rpca(r) => Problem::Rpca(RpcaInstance::from_record(r)?),
            InstanceRecord::Karcher(r) => Problem::Karcher(KarcherInstance::from_record(r)?),
            InstanceRecord::Bilinear(r) => Problem::Bilinear(BilinearInstance::from_record(r)?),
        })
    }

    pub fn record(&self) -> InstanceRecord {
        match self {
            Problem::Rpca(p) => InstanceRecord::Rpca(p.to_record()),
            Problem::Karcher(p) => InstanceRecord::Karcher(p.to_record()),
            Problem::Bilinear(p) => InstanceRecord::Bilinear(p.to_record()),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Rpca(_) => ProblemKind::Rpca,
            Problem::Karcher(_) => ProblemKind::Karcher,
            Problem::Bilinear(_) => ProblemKind::Bilinear,
        }
    }

    pub fn with_execution(self, exec: crate::par::Execution) -> Self {
        match self {
            Problem::Rpca(p) => Problem::Rpca(p.with_execution(exec)),
            Problem::Karcher(p) => Problem::Karcher(p.with_execution(exec)),
            b => b,
        }
    }

    /// The exact saddle when it is known in closed form.
    pub fn known_saddle(&self) -> Option<(Point, Point)> {
        match self {
            Problem::Bilinear(b) => {
                let invertible = b.reg() > 0.0
                    || (b.coupling().is_square() && b.coupling().clone().svd(false, false).singular_values.min() > 0.0);
                invertible.then(|| b.origin())
            }
            _ => None,
        }
    }

    fn inner(&self) -> &dyn SaddleProblem {
        match self {
            Problem::Rpca(p) => p,
            Problem::Karcher(p) => p,
            Problem::Bilinear(p) => p,
        }
    }
}

impl SaddleProblem for Problem {
    fn min_manifold(&self) -> &Manifold {
        self.inner().min_manifold()
    }

    fn max_manifold(&self) -> &Manifold {
        self.inner().max_manifold()
    }

    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        self.inner().value(x, y)
    }

    fn grad(&self, x: &Point, y: &Point) -> Result<(Tangent, Tangent)> {
        self.inner().grad(x, y)
    }

    fn data_size(&self) -> Option<usize> {
        self.inner().data_size()
    }

    fn batch_grad(&self, x: &Point, y: &Point, batch: &[usize]) -> Result<(Tangent, Tangent)> {
        self.inner().batch_grad(x, y, batch)
    }

    fn constants(&self) -> ProblemConstants {
        self.inner().constants()
    }

    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        self.inner().sample_pair(rng)
    }
}
