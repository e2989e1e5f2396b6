//! Concrete saddle problems, data generation and constant estimation.

mod bilinear;
mod karcher;
mod rpca;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use bilinear::{BilinearInstance, BilinearRecord};
pub use karcher::{KarcherInstance, KarcherRecord};
pub use rpca::{RpcaInstance, RpcaRecord, KINK_TOL};

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{Manifold, Point, Tangent};
use crate::par::{self, Execution};
use crate::solvers::SaddleProblem;

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub(crate) fn matrix_from_rows(d: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid(format!("expected a {d}x{d} matrix")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian
/// matrix, with column signs fixed by `diag(R) > 0`.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `n` matrices `Q diag(λ) Qᵀ` with `λ` uniform in `[eig_lo, eig_hi]` and `Q`
/// a random orthogonal matrix.
pub fn gen_spd_data(d: usize, n: usize, eig_lo: f64, eig_hi: f64, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    if !(eig_lo > 0.0 && eig_lo <= eig_hi && eig_hi.is_finite()) {
        return Err(Error::invalid(format!("invalid eigenvalue range [{eig_lo}, {eig_hi}]")));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let q = random_orthogonal(d, &mut rng);
            let lam = DVector::from_fn(d, |_, _| rng.random_range(eig_lo..=eig_hi));
            linalg::compose(&q, &lam)
        })
        .collect())
}

/// Serialized problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum InstanceRecord {
    Rpca(RpcaRecord),
    Karcher(KarcherRecord),
    Bilinear(BilinearRecord),
}

/// Options for the sampling estimators of `ℓ` and `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    pub samples: usize,
    /// Perturbations have geodesic length uniform in `(0, radius]`.
    pub radius: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { samples: 200, radius: 0.5, seed: 0, exec: Execution::default() }
    }
}

struct Perturbed {
    x: Point,
    y: Point,
    x2: Point,
    y2: Point,
    dx: f64,
    dy: f64,
}

/// Sample `k` cycles through moving only `x`, only `y`, and both.
fn perturbed_pair(p: &dyn SaddleProblem, k: usize, opts: &EstimateOptions) -> Result<Perturbed> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(k as u64);
    let (x, y) = p.sample_pair(&mut rng);
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    let mut step = |m: &Manifold, at: &Point, active: bool| -> Result<(Point, f64)> {
        if !active {
            return Ok((at.clone(), 0.0));
        }
        let len = opts.radius * (1.0 - rng.random::<f64>());
        let v = m.random_tangent(at, &mut rng, len)?;
        Ok((m.exp(at, &v)?, len))
    };
    let (x2, dx) = step(mx, &x, k % 3 != 1)?;
    let (y2, dy) = step(my, &y, !k.is_multiple_of(3))?;
    Ok(Perturbed { x, y, x2, y2, dx, dy })
}

fn check_opts(opts: &EstimateOptions) -> Result<()> {
    if opts.samples == 0 {
        return Err(Error::invalid("estimators need at least one sample"));
    }
    if !(opts.radius > 0.0) || !opts.radius.is_finite() {
        return Err(Error::invalid(format!("radius must be positive, got {}", opts.radius)));
    }
    Ok(())
}

/// Per-sample smoothness ratios
/// `max(‖g_x − Γ g_x'‖, ‖g_y − Γ g_y'‖) / (d(x, x') + d(y, y'))`.
pub fn smoothness_ratios(p: &dyn SaddleProblem, opts: &EstimateOptions) -> Result<Vec<f64>> {
    check_opts(opts)?;
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    par::map_range(opts.exec, opts.samples, |k| -> Result<f64> {
        let s = perturbed_pair(p, k, opts)?;
        let (gx, gy) = p.grad(&s.x, &s.y)?;
        let (gx2, gy2) = p.grad(&s.x2, &s.y2)?;
        let back_x = mx.transport(&s.x2, &s.x, &gx2)?;
        let back_y = my.transport(&s.y2, &s.y, &gy2)?;
        let ex = mx.norm(&s.x, &gx.axpy(-1.0, &back_x)?)?;
        let ey = my.norm(&s.y, &gy.axpy(-1.0, &back_y)?)?;
        Ok(ex.max(ey) / (s.dx + s.dy))
    })
    .into_iter()
    .collect()
}

/// `ℓ̂`: the largest smoothness ratio over the samples.
pub fn estimate_smoothness(p: &dyn SaddleProblem, opts: &EstimateOptions) -> Result<f64> {
    let ratios = smoothness_ratios(p, opts)?;
    let ell = ratios.into_iter().fold(0.0_f64, f64::max);
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::numeric(format!("smoothness estimate is degenerate: {ell}")));
    }
    Ok(ell)
}

/// Per-sample strong-convexity ratios
/// `2(f(x', y) − f(x, y) − ⟨g_x, Log_x x'⟩)/d²(x, x')` and the concave mirror
/// image in `y`; samples that do not move a block contribute nothing for it.
pub fn monotonicity_ratios(p: &dyn SaddleProblem, opts: &EstimateOptions) -> Result<Vec<f64>> {
    check_opts(opts)?;
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    let per_sample = par::map_range(opts.exec, opts.samples, |k| -> Result<Vec<f64>> {
        let s = perturbed_pair(p, k, opts)?;
        let f0 = p.value(&s.x, &s.y)?;
        let (gx, gy) = p.grad(&s.x, &s.y)?;
        let mut out = Vec::with_capacity(2);
        if s.dx > 0.0 {
            let v: Tangent = mx.log(&s.x, &s.x2)?;
            let gap = p.value(&s.x2, &s.y)? - f0 - mx.inner(&s.x, &gx, &v)?;
            out.push(2.0 * gap / (s.dx * s.dx));
        }
        if s.dy > 0.0 {
            let v: Tangent = my.log(&s.y, &s.y2)?;
            let gap = f0 + my.inner(&s.y, &gy, &v)? - p.value(&s.x, &s.y2)?;
            out.push(2.0 * gap / (s.dy * s.dy));
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in per_sample {
        all.extend(r?);
    }
    Ok(all)
}

/// `μ̂`: the smallest strong-convexity ratio over the samples. Nonpositive
/// values mean the sampled region is not strongly-convex-strongly-concave.
pub fn estimate_monotonicity(p: &dyn SaddleProblem, opts: &EstimateOptions) -> Result<f64> {
    let ratios = monotonicity_ratios(p, opts)?;
    Ok(ratios.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_spectra_and_symmetry() {
        let data = gen_spd_data(6, 20, 0.2, 4.5, 3).unwrap();
        for m in &data {
            assert!((m - m.transpose()).norm() <= 1e-12);
            let eig = linalg::sym_eigen(m).unwrap().eigenvalues;
            assert!(eig.min() >= 0.2 - 1e-12 && eig.max() <= 4.5 + 1e-12);
        }
        assert_eq!(data, gen_spd_data(6, 20, 0.2, 4.5, 3).unwrap());
        assert!(gen_spd_data(3, 2, 0.0, 1.0, 0).is_err());
        assert!(gen_spd_data(3, 2, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(7, &mut ChaCha8Rng::seed_from_u64(1));
        assert!((q.transpose() * &q - DMatrix::identity(7, 7)).norm() < 1e-12);
    }

    #[test]
    fn instance_record_tags() {
        let rec = InstanceRecord::Bilinear(BilinearInstance::identity(2).to_record());
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with(r#"{"problem":"bilinear","k":2"#), "{json}");
        let back: InstanceRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
    }
}
