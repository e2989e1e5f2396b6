use crate::error::Result;
use crate::manifold::Point;
use crate::solvers::SaddleProblem;

/// Riemannian gradient norm of the pair and its two blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradNorm {
    /// `√(‖grad_x f‖² + ‖grad_y f‖²)`.
    pub combined: f64,
    pub x: f64,
    pub y: f64,
}

pub fn gradient_norm(p: &dyn SaddleProblem, x: &Point, y: &Point) -> Result<GradNorm> {
    let (gx, gy) = p.grad(x, y)?;
    let nx = p.min_manifold().norm(x, &gx)?;
    let ny = p.max_manifold().norm(y, &gy)?;
    Ok(GradNorm { combined: nx.hypot(ny), x: nx, y: ny })
}

/// `d²(x, x*) + d²(y, y*)`.
pub fn distance_gap(p: &dyn SaddleProblem, x: &Point, y: &Point, x_star: &Point, y_star: &Point) -> Result<f64> {
    let dx = p.min_manifold().distance(x, x_star)?;
    let dy = p.max_manifold().distance(y, y_star)?;
    Ok(dx * dx + dy * dy)
}
