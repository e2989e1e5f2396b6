//! Trigonometric comparison constants for manifolds with bounded sectional
//! curvature, and numerical validators for the comparison inequalities on
//! concrete geodesic triangles.
//!
//! For an upper curvature bound `κ > 0`, `ξ̲(κ, c) = c√κ·cot(c√κ) ≤ 1`, and
//! `ξ̲ = 1` when `κ ≤ 0`. For a lower bound `κ < 0`,
//! `ξ̄(κ, c) = c√−κ·coth(c√−κ) ≥ 1`, and `ξ̄ = 1` when `κ ≥ 0`. Their ratio
//! `τ = ξ̄(κ_min, c) / ξ̲(κ_max, c)` measures how much the geometry departs from
//! flat space at scale `c`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};

/// Below this value of `c·sqrt(|κ|)` the closed forms are replaced by their series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Slack allowed when checking a comparison inequality numerically.
pub const TCI_SLACK: f64 = 1e-8;

/// Sides shorter than this make a triangle degenerate.
pub const DEGENERATE_SIDE: f64 = 1e-12;

fn check_length(c: f64) -> Result<()> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid(format!("comparison length must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// `ξ̲(κ_max, c)`.
///
/// Positive only while `c√κ < π/2`; callers that need a positive constant
/// should go through [`CurvatureConstants::new`].
pub fn xi_lower(kappa_max: f64, c: f64) -> Result<f64> {
    check_length(c)?;
    if !kappa_max.is_finite() {
        return Err(Error::invalid("kappa_max must be finite"));
    }
    if kappa_max <= 0.0 || c == 0.0 {
        return Ok(1.0);
    }
    let z = c * kappa_max.sqrt();
    if z >= PI {
        return Err(Error::Domain(format!(
            "c = {c} reaches the cotangent pole pi/sqrt(kappa_max) = {}",
            PI / kappa_max.sqrt()
        )));
    }
    if z < SERIES_CUTOFF {
        let z2 = z * z;
        return Ok(1.0 - z2 / 3.0 - z2 * z2 / 45.0);
    }
    Ok(z / z.tan())
}

/// `ξ̄(κ_min, c)`.
pub fn xi_upper(kappa_min: f64, c: f64) -> Result<f64> {
    check_length(c)?;
    if !kappa_min.is_finite() {
        return Err(Error::invalid("kappa_min must be finite"));
    }
    if kappa_min >= 0.0 || c == 0.0 {
        return Ok(1.0);
    }
    let z = c * (-kappa_min).sqrt();
    if z < SERIES_CUTOFF {
        let z2 = z * z;
        return Ok(1.0 + z2 / 3.0 - z2 * z2 / 45.0);
    }
    Ok(z / z.tanh())
}

/// `τ([κ_min, κ_max], c) = ξ̄(κ_min, c) / ξ̲(κ_max, c)`.
pub fn tau(kappa_min: f64, kappa_max: f64, c: f64) -> Result<f64> {
    if !(kappa_min <= kappa_max) {
        return Err(Error::invalid(format!("kappa_min {kappa_min} exceeds kappa_max {kappa_max}")));
    }
    let lo = xi_lower(kappa_max, c)?;
    if lo <= 0.0 {
        return Err(Error::Domain(format!("xi_lower({kappa_max}, {c}) = {lo} is not positive")));
    }
    Ok(xi_upper(kappa_min, c)? / lo)
}

/// The constants `ξ̲₀`, `ξ̄₀`, `τ₀` evaluated at a diameter bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureConstants {
    pub xi_lower_0: f64,
    pub xi_upper_0: f64,
    pub tau_0: f64,
    pub at_diameter: f64,
}

impl CurvatureConstants {
    pub fn new(kappa_min: f64, kappa_max: f64, diameter: f64) -> Result<Self> {
        let xi_lower_0 = xi_lower(kappa_max, diameter)?;
        if xi_lower_0 <= 0.0 {
            return Err(Error::Domain(format!(
                "diameter {diameter} is too large for kappa_max = {kappa_max}: xi_lower = {xi_lower_0}"
            )));
        }
        let xi_upper_0 = xi_upper(kappa_min, diameter)?;
        Ok(CurvatureConstants { xi_lower_0, xi_upper_0, tau_0: xi_upper_0 / xi_lower_0, at_diameter: diameter })
    }

    /// Constants for a min/max manifold pair using the hull of their curvature
    /// intervals.
    pub fn for_pair(m_min: &Manifold, m_max: &Manifold, diameter: f64) -> Result<Self> {
        let kmin = m_min.kappa_min().min(m_max.kappa_min());
        let kmax = m_min.kappa_max().max(m_max.kappa_max());
        Self::new(kmin, kmax, diameter)
    }
}

/// Geodesic triangle with vertices `p`, `q`, `r`, angle `A` at `p`, sides
/// `c = d(p, q)`, `b = d(p, r)` adjacent to `A` and `a = d(q, r)` opposite it.
#[derive(Clone, Debug)]
pub struct GeodesicTriangle {
    pub p: Point,
    pub q: Point,
    pub r: Point,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Angle at `p` in `[0, π]`; zero for degenerate triangles.
    pub angle: f64,
}

impl GeodesicTriangle {
    pub fn new(m: &Manifold, p: Point, q: Point, r: Point) -> Result<Self> {
        let u = m.log(&p, &q)?;
        let w = m.log(&p, &r)?;
        let c = m.norm(&p, &u)?;
        let b = m.norm(&p, &w)?;
        let a = m.distance(&q, &r)?;
        let angle = if b < DEGENERATE_SIDE || c < DEGENERATE_SIDE {
            0.0
        } else {
            (m.inner(&p, &u, &w)? / (b * c)).clamp(-1.0, 1.0).acos()
        };
        Ok(GeodesicTriangle { p, q, r, a, b, c, angle })
    }

    pub fn is_degenerate(&self) -> bool {
        self.a < DEGENERATE_SIDE || self.b < DEGENERATE_SIDE || self.c < DEGENERATE_SIDE
    }
}

/// Both sides of a comparison inequality and whether it holds within [`TCI_SLACK`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TciReport {
    pub lhs: f64,
    pub rhs: f64,
    pub xi: f64,
    pub satisfied: bool,
}

impl TciReport {
    /// `lhs − rhs` for the lower inequality, `rhs − lhs` for the upper one;
    /// callers read it as "how much room is left".
    pub fn slack(&self, lower: bool) -> f64 {
        if lower {
            self.lhs - self.rhs
        } else {
            self.rhs - self.lhs
        }
    }
}

fn law_of_cosines_rhs(tri: &GeodesicTriangle, xi: f64) -> f64 {
    xi * tri.b * tri.b + tri.c * tri.c - 2.0 * tri.b * tri.c * tri.angle.cos()
}

/// `a² ≥ ξ̲(κ_max, ρ)·b² + c² − 2bc·cos A` with `ρ = max(a, c)`.
///
/// `ρ` bounds the distance from `q` to every point of the side `b`, which is
/// what the comparison argument needs; evaluating `ξ̲` at `c` alone is violated
/// by ordinary sphere triangles such as `b = c = 1`, `A = π/2`. Degenerate
/// triangles are reported at `ρ = c`, where both sides agree by continuity.
pub fn tci_holds_lower(m: &Manifold, tri: &GeodesicTriangle) -> Result<TciReport> {
    let rho = if tri.is_degenerate() { tri.c } else { tri.a.max(tri.c) };
    let xi = xi_lower(m.kappa_max(), rho)?;
    let lhs = tri.a * tri.a;
    let rhs = law_of_cosines_rhs(tri, xi);
    let satisfied = tri.is_degenerate() || lhs >= rhs - TCI_SLACK;
    Ok(TciReport { lhs, rhs, xi, satisfied })
}

/// `a² ≤ ξ̄(κ_min, c)·b² + c² − 2bc·cos A`.
pub fn tci_holds_upper(m: &Manifold, tri: &GeodesicTriangle) -> Result<TciReport> {
    let xi = xi_upper(m.kappa_min(), tri.c)?;
    let lhs = tri.a * tri.a;
    let rhs = law_of_cosines_rhs(tri, xi);
    let satisfied = tri.is_degenerate() || lhs <= rhs + TCI_SLACK;
    Ok(TciReport { lhs, rhs, xi, satisfied })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn xi_lower_examples() {
        assert_eq!(xi_lower(-3.0, 0.7).unwrap(), 1.0);
        assert_relative_eq!(xi_lower(1.0, FRAC_PI_4).unwrap(), FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(xi_lower(5.0, 0.0).unwrap(), 1.0);
        assert!(matches!(xi_lower(1.0, PI), Err(Error::Domain(_))));
        assert!(xi_lower(1.0, -0.1).is_err());
    }

    #[test]
    fn xi_upper_examples() {
        assert_eq!(xi_upper(0.5, 2.0).unwrap(), 1.0);
        // coth(1) = (e² + 1) / (e² − 1)
        let e2 = std::f64::consts::E.powi(2);
        assert_relative_eq!(xi_upper(-1.0, 1.0).unwrap(), (e2 + 1.0) / (e2 - 1.0), epsilon = 1e-15);
        assert_relative_eq!(xi_upper(-1.0, 1.0).unwrap(), 1.313035285499331, epsilon = 1e-14);
        assert_eq!(xi_upper(-2.0, 0.0).unwrap(), 1.0);
        assert!(xi_upper(-1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0.0, 0.0, 3.0).unwrap(), 1.0);
        assert_relative_eq!(tau(-1.0, 0.0, 1.0).unwrap(), 1.313035285499331, epsilon = 1e-14);
        let composed = xi_upper(-1.0, FRAC_PI_4).unwrap() / xi_lower(1.0, FRAC_PI_4).unwrap();
        assert_eq!(tau(-1.0, 1.0, FRAC_PI_4).unwrap(), composed);
        assert!(tau(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn series_matches_closed_form_near_cutoff() {
        for &kappa in &[1.0, -1.0] {
            let c = SERIES_CUTOFF * 0.999;
            let z = c;
            let (series, closed) = if kappa > 0.0 {
                (xi_lower(kappa, c).unwrap(), z / z.tan())
            } else {
                (xi_upper(kappa, c).unwrap(), z / z.tanh())
            };
            assert!((series - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_in_length() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.03).collect();
        for w in grid.windows(2) {
            assert!(xi_lower(1.0, w[1]).unwrap() <= xi_lower(1.0, w[0]).unwrap());
            assert!(xi_upper(-1.0, w[1]).unwrap() >= xi_upper(-1.0, w[0]).unwrap());
        }
    }

    #[test]
    fn flat_limit() {
        for &(kappa, c) in &[(1e-7, 1.0), (-1e-7, 1.0), (1.0, 3e-4), (-4.0, 1e-4)] {
            assert!((xi_lower(kappa, c).unwrap() - 1.0).abs() <= 1e-6);
            assert!((xi_upper(kappa, c).unwrap() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn constants_require_positive_lower_xi() {
        let c = CurvatureConstants::new(-0.5, 0.0, 2.0).unwrap();
        assert_eq!(c.xi_lower_0, 1.0);
        assert!(c.tau_0 > 1.0);
        assert!(matches!(CurvatureConstants::new(-0.5, 1.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn euclidean_triangle_is_equality() {
        let m = Manifold::euclidean(2);
        let tri = GeodesicTriangle::new(
            &m,
            Point::from_slice(&[0.0, 0.0]),
            Point::from_slice(&[2.0, 0.5]),
            Point::from_slice(&[-0.3, 1.7]),
        )
        .unwrap();
        let lo = tci_holds_lower(&m, &tri).unwrap();
        let hi = tci_holds_upper(&m, &tri).unwrap();
        assert!((lo.lhs - lo.rhs).abs() < 1e-10 && lo.satisfied);
        assert!((hi.lhs - hi.rhs).abs() < 1e-10 && hi.satisfied);
    }

    #[test]
    fn degenerate_triangle_is_equality() {
        let m = Manifold::sphere(3);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let r = Point::from_slice(&[0.0, 1.0, 0.0]);
        // q = p: c = 0, a = b
        let tri = GeodesicTriangle::new(&m, p.clone(), p, r).unwrap();
        assert!(tri.is_degenerate());
        let lo = tci_holds_lower(&m, &tri).unwrap();
        let hi = tci_holds_upper(&m, &tri).unwrap();
        assert!(lo.satisfied && hi.satisfied);
        assert!((lo.lhs - lo.rhs).abs() < 1e-12 && (hi.lhs - hi.rhs).abs() < 1e-12);
    }

    #[test]
    fn sphere_right_triangle_needs_the_longer_comparison_length() {
        // b = c = 1, A = π/2 on the unit sphere: cos a = cos² 1.
        let m = Manifold::sphere(3);
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = Point::from_slice(&[1f64.cos(), 1f64.sin(), 0.0]);
        let r = Point::from_slice(&[1f64.cos(), 0.0, 1f64.sin()]);
        let tri = GeodesicTriangle::new(&m, p, q, r).unwrap();
        assert_relative_eq!(tri.angle, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        let at_c = xi_lower(1.0, tri.c).unwrap() * tri.b * tri.b + tri.c * tri.c;
        assert!(tri.a * tri.a < at_c - 1e-3);
        assert!(tci_holds_lower(&m, &tri).unwrap().satisfied);
    }
}
