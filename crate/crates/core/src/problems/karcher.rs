//! Robust matrix Karcher mean:
//! `min_X max_{Y₁..Y_N}  Σᵢ d²(X, Yᵢ) − γ Σᵢ d²(Yᵢ, Aᵢ)` over SPD matrices.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{matrix_from_rows, matrix_rows};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};
use crate::par::{self, Execution};
use crate::solvers::SaddleProblem;

#[derive(Clone, Debug)]
pub struct KarcherInstance {
    d: usize,
    gamma: f64,
    anchors: Vec<Point>,
    spd: Manifold,
    ys: Manifold,
    exec: Execution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KarcherRecord {
    pub d: usize,
    pub n: usize,
    pub gamma: f64,
    pub anchors: Vec<Vec<Vec<f64>>>,
}

impl KarcherInstance {
    pub fn new(gamma: f64, anchors: Vec<DMatrix<f64>>) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        let d = anchors
            .first()
            .map(|a| a.nrows())
            .ok_or_else(|| Error::invalid("Karcher mean needs at least one anchor"))?;
        let spd = Manifold::spd(d);
        let anchors: Vec<Point> = anchors.into_iter().map(Point::matrix).collect();
        for (i, a) in anchors.iter().enumerate() {
            spd.check_point(a).map_err(|e| Error::invalid(format!("anchor {i}: {e}")))?;
        }
        let ys = Manifold::product(vec![spd.clone(); anchors.len()]);
        Ok(KarcherInstance { d, gamma, anchors, spd, ys, exec: Execution::default() })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.anchors.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    /// `(X, Y) = (A₁, (A₁, …, A_N))`.
    pub fn anchor_start(&self) -> (Point, Point) {
        (self.anchors[0].clone(), Point::product(self.anchors.clone()))
    }

    pub fn to_record(&self) -> KarcherRecord {
        KarcherRecord {
            d: self.d,
            n: self.n(),
            gamma: self.gamma,
            anchors: self.anchors.iter().map(|a| matrix_rows(a.as_matrix().expect("spd point"))).collect(),
        }
    }

    pub fn from_record(r: &KarcherRecord) -> Result<Self> {
        if r.anchors.len() != r.n {
            return Err(Error::invalid(format!("record says n = {} but holds {} anchors", r.n, r.anchors.len())));
        }
        let anchors = r.anchors.iter().map(|m| matrix_from_rows(r.d, m)).collect::<Result<Vec<_>>>()?;
        Self::new(r.gamma, anchors)
    }

    fn split(&self, x: &Point, y: &Point) -> Result<Vec<Point>> {
        self.spd.check_point(x)?;
        self.ys.check_point(y)?;
        Ok(y.factors().expect("checked product"))
    }
}

impl SaddleProblem for KarcherInstance {
    fn min_manifold(&self) -> &Manifold {
        &self.spd
    }

    fn max_manifold(&self) -> &Manifold {
        &self.ys
    }

    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        let ys = self.split(x, y)?;
        let terms = par::map_range(self.exec, ys.len(), |i| -> Result<f64> {
            let fit = self.spd.distance(x, &ys[i])?;
            let pull = self.spd.distance(&ys[i], &self.anchors[i])?;
            Ok(fit * fit - self.gamma * pull * pull)
        });
        terms.into_iter().sum()
    }

    fn grad(&self, x: &Point, y: &Point) -> Result<(Tangent, Tangent)> {
        let ys = self.split(x, y)?;
        let parts = par::map_range(self.exec, ys.len(), |i| -> Result<(Tangent, Tangent)> {
            let to_y = self.spd.log(x, &ys[i])?;
            let to_x = self.spd.log(&ys[i], x)?;
            let to_a = self.spd.log(&ys[i], &self.anchors[i])?;
            Ok((to_y.scale(-2.0), to_x.scale(-2.0).axpy(2.0 * self.gamma, &to_a)?))
        });
        let mut gx = self.spd.zero_tangent(x);
        let mut gy = Vec::with_capacity(ys.len());
        for part in parts {
            let (px, py) = part?;
            gx = gx.axpy(1.0, &px)?;
            gy.push(py);
        }
        Ok((gx, Tangent::product(gy)))
    }

    fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        let x = self.spd.random_point(rng);
        let y = Point::product(self.anchors.iter().map(|_| self.spd.random_point(rng)).collect());
        (x, y)
    }
}
