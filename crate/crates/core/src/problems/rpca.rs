//! Robust PCA on SPD matrices:
//! `max_M min_x  −xᵀMx − (α/n) Σᵢ d(M, Mᵢ)` over `M ≻ 0` and unit `x`.
//!
//! In solver orientation the sphere variable `x` is the first (min) slot and
//! `M` the second (max) slot.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{matrix_from_rows, matrix_rows};
use crate::error::{Error, Result};
use crate::linalg::{self, SpdFrame};
use crate::manifold::{Manifold, Point, Tangent};
use crate::par::{self, Execution};
use crate::solvers::SaddleProblem;

/// Distances below this select the zero subgradient for that data term.
pub const KINK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct RpcaInstance {
    d: usize,
    alpha: f64,
    data: Vec<DMatrix<f64>>,
    sphere: Manifold,
    spd: Manifold,
    exec: Execution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpcaRecord {
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub data: Vec<Vec<Vec<f64>>>,
}

impl RpcaInstance {
    pub fn new(alpha: f64, data: Vec<DMatrix<f64>>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        let d = data.first().map(|m| m.nrows()).ok_or_else(|| Error::invalid("RPCA needs at least one data matrix"))?;
        let spd = Manifold::spd(d).with_bounds(-0.5, 1.0, std::f64::consts::PI)?;
        for (i, m) in data.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::invalid(format!("data matrix {i} is not {d}x{d}")));
            }
            spd.check_point(&Point::matrix(m.clone())).map_err(|e| Error::invalid(format!("data matrix {i}: {e}")))?;
        }
        Ok(RpcaInstance { d, alpha, data, sphere: Manifold::sphere(d), spd, exec: Execution::default() })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> &[DMatrix<f64>] {
        &self.data
    }

    pub fn to_record(&self) -> RpcaRecord {
        RpcaRecord { d: self.d, n: self.n(), alpha: self.alpha, data: self.data.iter().map(matrix_rows).collect() }
    }

    pub fn from_record(r: &RpcaRecord) -> Result<Self> {
        if r.data.len() != r.n {
            return Err(Error::invalid(format!("record says n = {} but holds {} matrices", r.n, r.data.len())));
        }
        let data = r.data.iter().map(|m| matrix_from_rows(r.d, m)).collect::<Result<Vec<_>>>()?;
        Self::new(r.alpha, data)
    }

    fn unpack<'a>(&self, x: &'a Point, m: &'a Point) -> Result<(&'a nalgebra::DVector<f64>, &'a DMatrix<f64>)> {
        self.sphere.check_point(x)?;
        self.spd.check_point(m)?;
        Ok((x.as_vector().expect("checked"), m.as_matrix().expect("checked")))
    }

    /// Whitened logarithms `logm(M^{-1/2} Mᵢ M^{-1/2})` and distances for the
    /// terms in `idx`, in order.
    fn terms(&self, frame: &SpdFrame, idx: &[usize]) -> Result<Vec<(DMatrix<f64>, f64)>> {
        par::map(self.exec, idx, |&i| {
            let l = linalg::logm_spd(&frame.whiten(&self.data[i]))?;
            let dist = l.norm();
            Ok((l, dist))
        })
        .into_iter()
        .collect()
    }

    fn grad_over(&self, x: &Point, m: &Point, idx: &[usize], weight: f64) -> Result<(Tangent, Tangent)> {
        let (xv, mm) = self.unpack(x, m)?;
        let frame = SpdFrame::new(mm)?;
        let mx = mm * xv;
        let rayleigh = xv.dot(&mx);
        let gx = (&mx - xv * rayleigh) * -2.0;

        let mut pull = DMatrix::zeros(self.d, self.d);
        for (l, dist) in self.terms(&frame, idx)? {
            if dist >= KINK_TOL {
                pull += l / dist;
            }
        }
        let gm = frame.unwhiten(&(pull * weight)) - &mx * mx.transpose();
        Ok((Tangent::vector(gx), Tangent::matrix(linalg::symmetrize(&gm))))
    }
}

impl SaddleProblem for RpcaInstance {
    fn min_manifold(&self) -> &Manifold {
        &self.sphere
    }

    fn max_manifold(&self) -> &Manifold {
        &self.spd
    }

    fn value(&self, x: &Point, m: &Point) -> Result<f64> {
        let (xv, mm) = self.unpack(x, m)?;
        let frame = SpdFrame::new(mm)?;
        let idx: Vec<usize> = (0..self.n()).collect();
        let penalty: f64 = self.terms(&frame, &idx)?.iter().map(|(_, d)| d).sum();
        Ok(-xv.dot(&(mm * xv)) - self.alpha / self.n() as f64 * penalty)
    }

    fn grad(&self, x: &Point, m: &Point) -> Result<(Tangent, Tangent)> {
        let idx: Vec<usize> = (0..self.n()).collect();
        self.grad_over(x, m, &idx, self.alpha / self.n() as f64)
    }

    fn data_size(&self) -> Option<usize> {
        Some(self.n())
    }

    /// Penalty terms in `batch` scaled by `n / |batch|`.
    fn batch_grad(&self, x: &Point, m: &Point, batch: &[usize]) -> Result<(Tangent, Tangent)> {
        if batch.is_empty() || batch.iter().any(|&i| i >= self.n()) {
            return Err(Error::invalid("batch indices out of range"));
        }
        self.grad_over(x, m, batch, self.alpha / batch.len() as f64)
    }

    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        let x = self.sphere.random_point(rng);
        let m = self.data[rng.random_range(0..self.n())].clone();
        (x, Point::matrix(m))
    }
}
