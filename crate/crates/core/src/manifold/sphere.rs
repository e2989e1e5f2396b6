//! Unit sphere `{x ∈ ℝ^d : ‖x‖ = 1}` with the round metric.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// `⟨x, y⟩ ≤ −1 + ANTIPODAL_SLACK` is treated as an antipodal pair.
pub const ANTIPODAL_SLACK: f64 = 1e-12;

pub fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let nv = v.norm();
    if nv == 0.0 {
        return x.clone();
    }
    let y = x * nv.cos() + v * (nv.sin() / nv);
    let n = y.norm();
    y / n
}

/// Returns the log map and the geodesic distance.
pub fn log_with_distance(x: &DVector<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let c = x.dot(y).clamp(-1.0, 1.0);
    if c <= -1.0 + ANTIPODAL_SLACK {
        return Err(Error::GeodesicNotUnique(format!("sphere points are antipodal (<x, y> = {c})")));
    }
    let u = y - x * c;
    let nu = u.norm();
    if nu == 0.0 {
        return Ok((DVector::zeros(x.len()), 0.0));
    }
    // atan2 keeps full relative accuracy for nearby points, where acos(c) does not.
    let theta = nu.atan2(c);
    Ok((u * (theta / nu), theta))
}

pub fn distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let c = x.dot(y).clamp(-1.0, 1.0);
    let nu = (y - x * c).norm();
    nu.atan2(c)
}

/// Parallel transport of `v ∈ T_x` along the minimizing geodesic to `y`.
pub fn transport(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let (u, theta) = log_with_distance(x, y)?;
    if theta == 0.0 {
        return Ok(v.clone());
    }
    let e = u / theta;
    let a = e.dot(v);
    let out = v + (&e * (theta.cos() - 1.0) - x * theta.sin()) * a;
    Ok(project(y, &out))
}

/// Orthogonal projection of an ambient vector onto `T_x`.
pub fn project(x: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    g - x * x.dot(g)
}
