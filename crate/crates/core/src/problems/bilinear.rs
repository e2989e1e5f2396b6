//! Euclidean test problem `f(x, y) = (r/2)‖x‖² + xᵀBy − (r/2)‖y‖²`.
//!
//! With `r = 0` this is the bilinear game on which plain gradient descent
//! ascent spirals outwards; with `r > 0` it is `r`-strongly-convex-strongly-concave.
//! The saddle is the origin whenever `B` or `r` makes it unique.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, Tangent};
use crate::solvers::{ProblemConstants, SaddleProblem};

#[derive(Clone, Debug)]
pub struct BilinearInstance {
    b: DMatrix<f64>,
    reg: f64,
    mx: Manifold,
    my: Manifold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearRecord {
    pub k: usize,
    pub reg: f64,
    pub coupling: Vec<Vec<f64>>,
}

impl BilinearInstance {
    /// `B = I_k`, `r = 0`.
    pub fn identity(k: usize) -> Self {
        Self::new(DMatrix::identity(k, k), 0.0).expect("identity coupling is valid")
    }

    pub fn new(b: DMatrix<f64>, reg: f64) -> Result<Self> {
        if !b.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("coupling matrix has non-finite entries"));
        }
        if !(reg >= 0.0) || !reg.is_finite() {
            return Err(Error::invalid(format!("regularization must be finite and >= 0, got {reg}")));
        }
        if b.nrows() == 0 || b.ncols() == 0 {
            return Err(Error::invalid("coupling matrix is empty"));
        }
        let (mx, my) = (Manifold::euclidean(b.nrows()), Manifold::euclidean(b.ncols()));
        Ok(BilinearInstance { b, reg, mx, my })
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    pub fn origin(&self) -> (Point, Point) {
        (Point::vector(DVector::zeros(self.b.nrows())), Point::vector(DVector::zeros(self.b.ncols())))
    }

    pub fn to_record(&self) -> BilinearRecord {
        BilinearRecord { k: self.b.nrows(), reg: self.reg, coupling: super::matrix_rows(&self.b) }
    }

    pub fn from_record(r: &BilinearRecord) -> Result<Self> {
        let cols = r.coupling.first().map_or(0, |row| row.len());
        if r.coupling.len() != r.k || r.coupling.iter().any(|row| row.len() != cols) {
            return Err(Error::invalid("coupling rows are ragged or do not match k"));
        }
        Self::new(DMatrix::from_fn(r.k, cols, |i, j| r.coupling[i][j]), r.reg)
    }

    fn unpack<'a>(&self, x: &'a Point, y: &'a Point) -> Result<(&'a DVector<f64>, &'a DVector<f64>)> {
        self.mx.check_point(x)?;
        self.my.check_point(y)?;
        Ok((x.as_vector().expect("checked"), y.as_vector().expect("checked")))
    }
}

impl SaddleProblem for BilinearInstance {
    fn min_manifold(&self) -> &Manifold {
        &self.mx
    }

    fn max_manifold(&self) -> &Manifold {
        &self.my
    }

    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        let (x, y) = self.unpack(x, y)?;
        Ok(0.5 * self.reg * (x.norm_squared() - y.norm_squared()) + x.dot(&(&self.b * y)))
    }

    fn grad(&self, x: &Point, y: &Point) -> Result<(Tangent, Tangent)> {
        let (x, y) = self.unpack(x, y)?;
        let gx = &self.b * y + x * self.reg;
        let gy = self.b.transpose() * x - y * self.reg;
        Ok((Tangent::vector(gx), Tangent::vector(gy)))
    }

    fn constants(&self) -> ProblemConstants {
        let norm = self.b.clone().svd(false, false).singular_values.max();
        ProblemConstants { ell: Some(norm.max(self.reg)), big_l: None, mu: Some(self.reg), sigma: Some(0.0) }
    }
}
