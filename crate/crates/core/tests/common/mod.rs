#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rminmax::curvature::{tci_holds_lower, tci_holds_upper, GeodesicTriangle, TciReport};
use rminmax::linalg;
use rminmax::manifold::{Manifold, ManifoldKind, Point};
use rminmax::problems::random_orthogonal;
use rminmax::Result;

/// Manifolds under test with the largest tangent length used for them.
pub fn test_manifolds() -> Vec<(&'static str, Manifold, f64)> {
    vec![
        ("sphere(25)", Manifold::sphere(25), 3.0),
        ("spd(5)", Manifold::spd(5), 2.5),
        ("euclidean(25)", Manifold::euclidean(25), 10.0),
        (
            "sphere(3)xspd(2)xeuclidean(2)",
            Manifold::product(vec![Manifold::sphere(3), Manifold::spd(2), Manifold::euclidean(2)]),
            2.5,
        ),
    ]
}

/// Worst errors seen by [`geometry_case`]; `affine` is zero for non-SPD
/// manifolds.
#[derive(Clone, Copy, Debug, Default)]
pub struct GeometryErrors {
    pub roundtrip: f64,
    pub isometry: f64,
    pub distance: f64,
    pub affine: f64,
}

impl GeometryErrors {
    pub fn merge(self, o: GeometryErrors) -> GeometryErrors {
        GeometryErrors {
            roundtrip: self.roundtrip.max(o.roundtrip),
            isometry: self.isometry.max(o.isometry),
            distance: self.distance.max(o.distance),
            affine: self.affine.max(o.affine),
        }
    }
}

/// `A Q diag(s) Qᵀ`-style invertible matrix with singular values in `[0.5, 2]`.
pub fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let q1 = random_orthogonal(n, rng);
    let q2 = random_orthogonal(n, rng);
    let s = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    q1 * DMatrix::from_diagonal(&s) * q2.transpose()
}

/// One random case: `x`, `v` with `‖v‖ ∈ (0, max_len]`, `y = Exp_x(v)`.
pub fn geometry_case(m: &Manifold, seed: u64, max_len: f64) -> Result<GeometryErrors> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = m.random_point(&mut rng);
    let len = max_len * (1.0 - rng.random::<f64>());
    let v = m.random_tangent(&x, &mut rng, len)?;
    let y = m.exp(&x, &v)?;
    m.check_point(&y)?;

    let back = m.log(&x, &y)?;
    let roundtrip = m.norm(&x, &back.axpy(-1.0, &v)?)?;

    let u = m.gaussian_tangent(&x, &mut rng)?;
    let w = m.gaussian_tangent(&x, &mut rng)?;
    let (tu, tw) = (m.transport(&x, &y, &u)?, m.transport(&x, &y, &w)?);
    m.check_tangent(&y, &tu)?;
    let scale = (m.norm(&x, &u)? * m.norm(&x, &w)?).max(1.0);
    let isometry = ((m.inner(&y, &tu, &tw)? - m.inner(&x, &u, &w)?).abs() / scale)
        .max((m.norm(&y, &tu)? - m.norm(&x, &u)?).abs() / m.norm(&x, &u)?.max(1.0));

    let dxy = m.distance(&x, &y)?;
    let distance = (dxy - len).abs().max((dxy - m.distance(&y, &x)?).abs()).max((dxy - m.norm(&x, &back)?).abs());

    let affine = match m.kind() {
        ManifoldKind::Spd(n) => {
            let a = random_invertible(*n, &mut rng);
            let act = |p: &Point| Point::matrix(linalg::symmetrize(&(&a * p.as_matrix().unwrap() * a.transpose())));
            (m.distance(&act(&x), &act(&y))? - dxy).abs()
        }
        _ => 0.0,
    };
    Ok(GeometryErrors { roundtrip, isometry, distance, affine })
}

/// Random triangle with two sides from `p` of length below `max_side`.
pub fn random_triangle(m: &Manifold, rng: &mut ChaCha8Rng, max_side: f64) -> Result<GeodesicTriangle> {
    let p = m.random_point(rng);
    let lq = max_side * (1.0 - rng.random::<f64>());
    let lr = max_side * (1.0 - rng.random::<f64>());
    let q = m.exp(&p, &m.random_tangent(&p, rng, lq)?)?;
    let r = m.exp(&p, &m.random_tangent(&p, rng, lr)?)?;
    GeodesicTriangle::new(m, p, q, r)
}

/// Smallest slack of the lower (on the unit sphere) and upper (on SPD(2))
/// comparison inequalities over `count` random triangles each; sphere
/// triangles with any side of length `π/2` or more are redrawn.
pub fn tci_min_slack(count: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sphere = Manifold::sphere(3);
    let mut lower = f64::INFINITY;
    let mut drawn = 0;
    while drawn < count {
        let tri = random_triangle(&sphere, &mut rng, std::f64::consts::FRAC_PI_2)?;
        if tri.a >= std::f64::consts::FRAC_PI_2 {
            continue;
        }
        drawn += 1;
        lower = lower.min(tci_holds_lower(&sphere, &tri)?.slack(true));
    }
    let spd = Manifold::spd(2).with_bounds(-0.5, 0.0, f64::INFINITY)?;
    let mut upper = f64::INFINITY;
    for _ in 0..count {
        let tri = random_triangle(&spd, &mut rng, 3.0)?;
        upper = upper.min(tci_holds_upper(&spd, &tri)?.slack(false));
    }
    Ok((lower, upper))
}

/// Largest `|slack|` of both inequalities on flat triangles.
pub fn tci_euclidean_gap(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Manifold::euclidean(3);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let tri = random_triangle(&m, &mut rng, 2.0)?;
        let lo: TciReport = tci_holds_lower(&m, &tri)?;
        let up = tci_holds_upper(&m, &tri)?;
        worst = worst.max(lo.slack(true).abs()).max(up.slack(false).abs());
    }
    Ok(worst)
}

/// Flat extragradient and gradient descent ascent on `f(x, y) = xᵀBy`,
/// written without the manifold layer.
pub fn flat_eg(b: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>, eta: f64) -> (DVector<f64>, DVector<f64>) {
    let xh = x - eta * (b * y);
    let yh = y + eta * (b.transpose() * x);
    (x - eta * (b * &yh), y + eta * (b.transpose() * &xh))
}

pub fn flat_gda(b: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>, eta: f64) -> (DVector<f64>, DVector<f64>) {
    (x - eta * (b * y), y + eta * (b.transpose() * x))
}

/// Least-squares slope of `ys` against `0, 1, 2, …`.
pub fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}
