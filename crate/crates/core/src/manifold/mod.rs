//! Geometry kernels: exponential and logarithm maps, parallel transport, the
//! Riemannian metric and geodesic distance on Euclidean space, the unit sphere,
//! SPD matrices and finite products of those.
//!
//! A [`Manifold`] is an immutable descriptor: it names the geometry and carries
//! the sectional-curvature interval `[kappa_min, kappa_max]` and a diameter
//! bound used by the comparison constants in [`crate::curvature`]. Points and
//! tangent vectors are plain payloads ([`Point`], [`Tangent`]); every operation
//! takes the base point explicitly.

mod element;
mod record;
pub mod spd;
pub mod sphere;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use element::{Element, Point, Tangent};
pub use record::PointRecord;

use crate::error::{Error, Result};
use crate::linalg::{self, SpdFrame};

/// Geometry of a descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldKind {
    Euclidean(usize),
    /// Unit sphere embedded in ℝ^d; the payload is the ambient dimension `d`.
    Sphere(usize),
    /// `n × n` SPD matrices.
    Spd(usize),
    Product(Vec<Manifold>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    kind: ManifoldKind,
    kappa_min: f64,
    kappa_max: f64,
    diameter_bound: f64,
}

const POINT_TOL: f64 = 1e-10;

impl Manifold {
    pub fn euclidean(dim: usize) -> Self {
        Manifold { kind: ManifoldKind::Euclidean(dim), kappa_min: 0.0, kappa_max: 0.0, diameter_bound: f64::INFINITY }
    }

    /// Unit sphere in ℝ^`ambient`, curvature 1, diameter π. The curvature
    /// interval is stored as `[0, 1]` since lower bounds are taken `<= 0`.
    /// `ambient = 1` gives the two-point sphere `{±1}`, which has no tangent
    /// directions.
    pub fn sphere(ambient: usize) -> Self {
        assert!(ambient >= 1, "sphere needs ambient dimension >= 1");
        Manifold { kind: ManifoldKind::Sphere(ambient), kappa_min: 0.0, kappa_max: 1.0, diameter_bound: PI }
    }

    /// SPD(n) with the affine-invariant metric. Curvature defaults to
    /// `[-1/2, 0]` and the diameter is unbounded; see [`Manifold::with_bounds`].
    pub fn spd(n: usize) -> Self {
        assert!(n >= 1, "SPD needs n >= 1");
        Manifold { kind: ManifoldKind::Spd(n), kappa_min: -0.5, kappa_max: 0.0, diameter_bound: f64::INFINITY }
    }

    /// Product manifold; curvature is the hull of the factors' intervals and the
    /// diameter bound is `sqrt(Σ D_i²)`.
    pub fn product(factors: Vec<Manifold>) -> Self {
        assert!(!factors.is_empty(), "product needs at least one factor");
        let kappa_min = factors.iter().map(|f| f.kappa_min).fold(f64::INFINITY, f64::min);
        let kappa_max = factors.iter().map(|f| f.kappa_max).fold(f64::NEG_INFINITY, f64::max);
        let diameter_bound = factors.iter().map(|f| f.diameter_bound.powi(2)).sum::<f64>().sqrt();
        Manifold { kind: ManifoldKind::Product(factors), kappa_min, kappa_max, diameter_bound }
    }

    /// Replaces the curvature interval and diameter bound after validating
    /// `kappa_min ≤ 0`, `kappa_min ≤ kappa_max` and, when `kappa_max > 0`,
    /// `D ≤ π / sqrt(kappa_max)`.
    pub fn with_bounds(mut self, kappa_min: f64, kappa_max: f64, diameter_bound: f64) -> Result<Self> {
        validate_bounds(kappa_min, kappa_max, diameter_bound)?;
        self.kappa_min = kappa_min;
        self.kappa_max = kappa_max;
        self.diameter_bound = diameter_bound;
        Ok(self)
    }

    pub fn with_diameter(self, diameter_bound: f64) -> Result<Self> {
        let (lo, hi) = (self.kappa_min, self.kappa_max);
        self.with_bounds(lo, hi, diameter_bound)
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::Euclidean(d) => *d,
            ManifoldKind::Sphere(d) => d - 1,
            ManifoldKind::Spd(n) => n * (n + 1) / 2,
            ManifoldKind::Product(fs) => fs.iter().map(Manifold::dim).sum(),
        }
    }

    /// Injectivity radius used for round-trip checks.
    pub fn injectivity_radius(&self) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere(_) => PI,
            ManifoldKind::Product(fs) => fs.iter().map(Manifold::injectivity_radius).fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ManifoldKind::Euclidean(d) => format!("euclidean({d})"),
            ManifoldKind::Sphere(d) => format!("sphere({d})"),
            ManifoldKind::Spd(n) => format!("spd({n})"),
            ManifoldKind::Product(fs) => {
                let inner: Vec<String> = fs.iter().map(Manifold::name).collect();
                format!("product({})", inner.join(", "))
            }
        }
    }

    // ----- validation ---------------------------------------------------

    pub fn check_point(&self, x: &Point) -> Result<()> {
        check_point_element(self, &x.0)
    }

    pub fn check_tangent(&self, x: &Point, v: &Tangent) -> Result<()> {
        check_tangent_element(self, &x.0, &v.0)
    }

    // ----- geometry -----------------------------------------------------

    /// Exponential map `Exp_x(v)`.
    pub fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        check_tangent_element(self, &x.0, &v.0)?;
        exp_element(self, &x.0, &v.0).map(Point)
    }

    /// Logarithm map `Exp_x^{-1}(y)`.
    pub fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        check_shape(self, &y.0)?;
        if !y.is_finite() {
            return Err(Error::numeric("log target has non-finite entries"));
        }
        log_element(self, &x.0, &y.0).map(Tangent)
    }

    /// Parallel transport `Γ_x^y(v)` along the minimizing geodesic.
    pub fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Result<Tangent> {
        check_tangent_element(self, &x.0, &v.0)?;
        check_shape(self, &y.0)?;
        transport_element(self, &x.0, &y.0, &v.0).map(Tangent)
    }

    /// Riemannian metric `⟨u, v⟩_x`.
    pub fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        check_shape(self, &x.0)?;
        check_shape(self, &u.0)?;
        check_shape(self, &v.0)?;
        inner_element(self, &x.0, &u.0, &v.0)
    }

    pub fn norm(&self, x: &Point, v: &Tangent) -> Result<f64> {
        Ok(self.inner(x, v, v)?.max(0.0).sqrt())
    }

    /// Geodesic distance.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        check_shape(self, &x.0)?;
        check_shape(self, &y.0)?;
        distance_element(self, &x.0, &y.0)
    }

    /// Riemannian gradient representation of an ambient (Euclidean) gradient:
    /// identity on ℝ^d, tangent projection on the sphere, `X sym(G) X` on SPD.
    pub fn egrad_to_rgrad(&self, x: &Point, egrad: &Element) -> Result<Tangent> {
        egrad_element(self, &x.0, egrad).map(Tangent)
    }

    pub fn zero_tangent(&self, x: &Point) -> Tangent {
        Tangent(x.0.zeros_like())
    }

    // ----- sampling -----------------------------------------------------

    /// Seeded random point: standard normal on ℝ^d, uniform on the sphere,
    /// `expm(S / sqrt(n))` on SPD with `S` a symmetric Gaussian matrix.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(random_point_element(self, rng))
    }

    /// Isotropic standard Gaussian in `T_x` with respect to the metric, so that
    /// `E‖v‖²_x = dim`.
    pub fn gaussian_tangent<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> Result<Tangent> {
        gaussian_tangent_element(self, &x.0, rng).map(Tangent)
    }

    /// Random tangent with a uniformly distributed direction and norm `scale`.
    pub fn random_tangent<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R, scale: f64) -> Result<Tangent> {
        if !(scale > 0.0) {
            return Err(Error::invalid(format!("tangent scale must be positive, got {scale}")));
        }
        if self.dim() == 0 {
            return Err(Error::invalid(format!("{} has no tangent directions", self.name())));
        }
        loop {
            let g = self.gaussian_tangent(x, rng)?;
            let n = self.norm(x, &g)?;
            if n > 1e-300 {
                return Ok(g.scale(scale / n));
            }
        }
    }
}

fn validate_bounds(kappa_min: f64, kappa_max: f64, d: f64) -> Result<()> {
    if !(kappa_min <= 0.0) {
        return Err(Error::invalid(format!("kappa_min must be <= 0, got {kappa_min}")));
    }
    if !(kappa_min <= kappa_max) {
        return Err(Error::invalid(format!("kappa_min {kappa_min} exceeds kappa_max {kappa_max}")));
    }
    if !(d > 0.0) {
        return Err(Error::invalid(format!("diameter bound must be positive, got {d}")));
    }
    if kappa_max > 0.0 && d > PI / kappa_max.sqrt() * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "diameter bound {d} exceeds pi/sqrt(kappa_max) = {}",
            PI / kappa_max.sqrt()
        )));
    }
    Ok(())
}

fn shape_error(m: &Manifold) -> Error {
    Error::invalid(format!("payload shape does not match {}", m.name()))
}

fn check_shape(m: &Manifold, e: &Element) -> Result<()> {
    match (&m.kind, e) {
        (ManifoldKind::Euclidean(d), Element::Vector(v)) | (ManifoldKind::Sphere(d), Element::Vector(v))
            if v.len() == *d =>
        {
            Ok(())
        }
        (ManifoldKind::Spd(n), Element::Matrix(a)) if a.nrows() == *n && a.ncols() == *n => Ok(()),
        (ManifoldKind::Product(fs), Element::Product(parts)) if fs.len() == parts.len() => {
            fs.iter().zip(parts).try_for_each(|(f, p)| check_shape(f, p))
        }
        _ => Err(shape_error(m)),
    }
}

fn check_point_element(m: &Manifold, x: &Element) -> Result<()> {
    check_shape(m, x)?;
    if !x.is_finite() {
        return Err(Error::numeric("point has non-finite entries"));
    }
    match (&m.kind, x) {
        (ManifoldKind::Sphere(_), Element::Vector(v)) => {
            let n = v.norm();
            if (n - 1.0).abs() > POINT_TOL {
                return Err(Error::invalid(format!("sphere point has norm {n}")));
            }
            Ok(())
        }
        (ManifoldKind::Spd(_), Element::Matrix(a)) => spd::check_point(a),
        (ManifoldKind::Product(fs), Element::Product(parts)) => {
            fs.iter().zip(parts).try_for_each(|(f, p)| check_point_element(f, p))
        }
        _ => Ok(()),
    }
}

fn check_tangent_element(m: &Manifold, x: &Element, v: &Element) -> Result<()> {
    check_shape(m, x)?;
    check_shape(m, v)?;
    if !v.is_finite() {
        return Err(Error::numeric("tangent has non-finite entries"));
    }
    match (&m.kind, x, v) {
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(v)) => {
            let d = x.dot(v);
            if d.abs() > POINT_TOL * v.norm().max(1.0) {
                return Err(Error::invalid(format!("sphere tangent is not orthogonal to its base (<x, v> = {d:e})")));
            }
            Ok(())
        }
        (ManifoldKind::Spd(_), _, Element::Matrix(v)) => spd::check_symmetric(v),
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(vs)) => {
            fs.iter().zip(xs.iter().zip(vs)).try_for_each(|(f, (x, v))| check_tangent_element(f, x, v))
        }
        _ => Ok(()),
    }
}

fn exp_element(m: &Manifold, x: &Element, v: &Element) -> Result<Element> {
    match (&m.kind, x, v) {
        (ManifoldKind::Euclidean(_), Element::Vector(x), Element::Vector(v)) => Ok(Element::Vector(x + v)),
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(v)) => Ok(Element::Vector(sphere::exp(x, v))),
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(v)) => spd::exp(x, v).map(Element::Matrix),
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(vs)) => fs
            .iter()
            .zip(xs.iter().zip(vs))
            .map(|(f, (x, v))| exp_element(f, x, v))
            .collect::<Result<Vec<_>>>()
            .map(Element::Product),
        _ => Err(shape_error(m)),
    }
}

fn log_element(m: &Manifold, x: &Element, y: &Element) -> Result<Element> {
    match (&m.kind, x, y) {
        (ManifoldKind::Euclidean(_), Element::Vector(x), Element::Vector(y)) => Ok(Element::Vector(y - x)),
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(y)) => {
            sphere::log_with_distance(x, y).map(|(v, _)| Element::Vector(v))
        }
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(y)) => spd::log(x, y).map(Element::Matrix),
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(ys)) => fs
            .iter()
            .zip(xs.iter().zip(ys))
            .map(|(f, (x, y))| log_element(f, x, y))
            .collect::<Result<Vec<_>>>()
            .map(Element::Product),
        _ => Err(shape_error(m)),
    }
}

fn transport_element(m: &Manifold, x: &Element, y: &Element, v: &Element) -> Result<Element> {
    match (&m.kind, x, y, v) {
        (ManifoldKind::Euclidean(_), _, _, v) => Ok(v.clone()),
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(y), Element::Vector(v)) => {
            sphere::transport(x, y, v).map(Element::Vector)
        }
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(y), Element::Matrix(v)) => {
            spd::transport(x, y, v).map(Element::Matrix)
        }
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(ys), Element::Product(vs)) => fs
            .iter()
            .enumerate()
            .map(|(i, f)| transport_element(f, &xs[i], &ys[i], &vs[i]))
            .collect::<Result<Vec<_>>>()
            .map(Element::Product),
        _ => Err(shape_error(m)),
    }
}

fn inner_element(m: &Manifold, x: &Element, u: &Element, v: &Element) -> Result<f64> {
    match (&m.kind, x, u, v) {
        (ManifoldKind::Euclidean(_) | ManifoldKind::Sphere(_), _, u, v) => u.dot(v),
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(u), Element::Matrix(v)) => spd::inner(x, u, v),
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(us), Element::Product(vs)) => {
            fs.iter().enumerate().map(|(i, f)| inner_element(f, &xs[i], &us[i], &vs[i])).sum()
        }
        _ => Err(shape_error(m)),
    }
}

fn distance_element(m: &Manifold, x: &Element, y: &Element) -> Result<f64> {
    match (&m.kind, x, y) {
        (ManifoldKind::Euclidean(_), Element::Vector(x), Element::Vector(y)) => Ok((x - y).norm()),
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(y)) => Ok(sphere::distance(x, y)),
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(y)) => spd::distance(x, y),
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(ys)) => {
            let sq: Result<f64> =
                fs.iter().zip(xs.iter().zip(ys)).map(|(f, (x, y))| distance_element(f, x, y).map(|d| d * d)).sum();
            Ok(sq?.sqrt())
        }
        _ => Err(shape_error(m)),
    }
}

fn egrad_element(m: &Manifold, x: &Element, g: &Element) -> Result<Element> {
    check_shape(m, g)?;
    match (&m.kind, x, g) {
        (ManifoldKind::Euclidean(_), _, g) => Ok(g.clone()),
        (ManifoldKind::Sphere(_), Element::Vector(x), Element::Vector(g)) => Ok(Element::Vector(sphere::project(x, g))),
        (ManifoldKind::Spd(_), Element::Matrix(x), Element::Matrix(g)) => {
            Ok(Element::Matrix(linalg::symmetrize(&(x * linalg::symmetrize(g) * x))))
        }
        (ManifoldKind::Product(fs), Element::Product(xs), Element::Product(gs)) => fs
            .iter()
            .zip(xs.iter().zip(gs))
            .map(|(f, (x, g))| egrad_element(f, x, g))
            .collect::<Result<Vec<_>>>()
            .map(Element::Product),
        _ => Err(shape_error(m)),
    }
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Symmetric matrix with N(0, 1) diagonal and N(0, 1/2) off-diagonal entries;
/// isotropic with unit variance in the orthonormal basis of symmetric matrices.
pub(crate) fn gaussian_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z: f64 = rng.sample(StandardNormal);
            if i == j {
                s[(i, i)] = z;
            } else {
                let w = z * std::f64::consts::FRAC_1_SQRT_2;
                s[(i, j)] = w;
                s[(j, i)] = w;
            }
        }
    }
    s
}

fn random_point_element<R: Rng + ?Sized>(m: &Manifold, rng: &mut R) -> Element {
    match &m.kind {
        ManifoldKind::Euclidean(d) => Element::Vector(gaussian_vector(*d, rng)),
        ManifoldKind::Sphere(d) => loop {
            let g = gaussian_vector(*d, rng);
            let n = g.norm();
            if n > 1e-12 {
                break Element::Vector(g / n);
            }
        },
        ManifoldKind::Spd(n) => {
            let s = gaussian_symmetric(*n, rng) / (*n as f64).sqrt();
            Element::Matrix(linalg::expm_sym(&s).expect("finite symmetric input"))
        }
        ManifoldKind::Product(fs) => Element::Product(fs.iter().map(|f| random_point_element(f, rng)).collect()),
    }
}

fn gaussian_tangent_element<R: Rng + ?Sized>(m: &Manifold, x: &Element, rng: &mut R) -> Result<Element> {
    check_shape(m, x)?;
    match (&m.kind, x) {
        (ManifoldKind::Euclidean(d), _) => Ok(Element::Vector(gaussian_vector(*d, rng))),
        (ManifoldKind::Sphere(d), Element::Vector(x)) => {
            Ok(Element::Vector(sphere::project(x, &gaussian_vector(*d, rng))))
        }
        (ManifoldKind::Spd(n), Element::Matrix(x)) => {
            let s = gaussian_symmetric(*n, rng);
            Ok(Element::Matrix(SpdFrame::new(x)?.unwhiten(&s)))
        }
        (ManifoldKind::Product(fs), Element::Product(xs)) => fs
            .iter()
            .zip(xs)
            .map(|(f, x)| gaussian_tangent_element(f, x, rng))
            .collect::<Result<Vec<_>>>()
            .map(Element::Product),
        _ => Err(shape_error(m)),
    }
}

#[cfg(test)]
mod tests;
