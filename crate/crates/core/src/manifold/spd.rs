//! Symmetric positive-definite matrices with the affine-invariant metric
//! `⟨U, V⟩_X = tr(X⁻¹ U X⁻¹ V)`.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{self, SpdFrame};

pub fn exp(x: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let out = SpdFrame::new(x)?.exp(v)?;
    check_point(&out)?;
    Ok(out)
}

pub fn log(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_point(y).map_err(|e| Error::invalid(format!("log target: {e}")))?;
    SpdFrame::new(x)?.log(y)
}

/// `‖logm(X^{-1/2} Y X^{-1/2})‖_F`, from the eigenvalues of `L⁻¹ Y L⁻ᵀ` where `X = L Lᵀ`.
pub fn distance(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    check_point(y).map_err(|e| Error::invalid(format!("distance target: {e}")))?;
    let chol =
        Cholesky::new(linalg::symmetrize(x)).ok_or_else(|| Error::numeric("base point is not positive definite"))?;
    let l = chol.l();
    let left = l.solve_lower_triangular(y).expect("nonzero cholesky diagonal");
    let w = l.solve_lower_triangular(&left.transpose()).expect("nonzero cholesky diagonal");
    let eig = linalg::sym_eigen(&w)?;
    linalg::check_positive(&eig.eigenvalues)?;
    Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// `E V Eᵀ` with `E = (Y X⁻¹)^{1/2} = X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{-1/2}`.
pub fn transport(x: &DMatrix<f64>, y: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_point(y).map_err(|e| Error::invalid(format!("transport target: {e}")))?;
    let frame = SpdFrame::new(x)?;
    let p = frame.whiten(y);
    let p_half = linalg::sym_apply(&p, f64::sqrt)?;
    let e = &frame.sqrt * p_half * &frame.inv_sqrt;
    Ok(linalg::symmetrize(&(&e * v * e.transpose())))
}

pub fn inner(x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    linalg::affine_inner(x, u, v)
}

/// Symmetry within 1e-10 (relative Frobenius) and eigenvalues above the floor.
pub fn check_point(x: &DMatrix<f64>) -> Result<()> {
    check_symmetric(x)?;
    let eig = linalg::sym_eigen(x)?;
    linalg::check_positive(&eig.eigenvalues)
}

pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid("matrix is not square"));
    }
    let asym = (a - a.transpose()).norm();
    if asym > 1e-10 * a.norm().max(1.0) {
        return Err(Error::invalid(format!("matrix is not symmetric (‖A − Aᵀ‖ = {asym:e})")));
    }
    Ok(())
}
