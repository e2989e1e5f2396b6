//! Dense symmetric matrix functions built on the symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which a matrix is not treated as positive definite.
pub const SPD_EIGEN_FLOOR: f64 = 1e-12;

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn is_finite(a: &DMatrix<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Eigendecomposition of the symmetric part of `a`.
pub fn sym_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!("expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if !is_finite(a) {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    Ok(SymmetricEigen::new(symmetrize(a)))
}

/// Rebuilds `V diag(values) Vᵀ` and re-symmetrizes.
pub fn compose(vectors: &DMatrix<f64>, values: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= values[j];
    }
    symmetrize(&(scaled * vectors.transpose()))
}

/// Applies a scalar function to the spectrum of a symmetric matrix.
pub fn sym_apply(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(a)?;
    let values = eig.eigenvalues.map(f);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("matrix function produced non-finite eigenvalues"));
    }
    Ok(compose(&eig.eigenvectors, &values))
}

pub fn expm_sym(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_apply(a, f64::exp)
}

/// Principal logarithm of a symmetric positive-definite matrix.
pub fn logm_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(a)?;
    check_positive(&eig.eigenvalues)?;
    Ok(compose(&eig.eigenvectors, &eig.eigenvalues.map(f64::ln)))
}

/// Fails unless `λmin > SPD_EIGEN_FLOOR · λmax` and `λmin > 0`.
pub fn check_positive(values: &DVector<f64>) -> Result<()> {
    let lo = values.min();
    let hi = values.max();
    if !(lo > 0.0) || lo <= SPD_EIGEN_FLOOR * hi {
        return Err(Error::numeric(format!(
            "matrix is not numerically positive definite (eigenvalues in [{lo:e}, {hi:e}])"
        )));
    }
    Ok(())
}

/// Square root and inverse square root of an SPD matrix, cached for repeated
/// whitening `X^{-1/2} A X^{-1/2}` and un-whitening `X^{1/2} B X^{1/2}`.
#[derive(Clone, Debug)]
pub struct SpdFrame {
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
}

impl SpdFrame {
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let eig = sym_eigen(x)?;
        check_positive(&eig.eigenvalues)?;
        let roots = eig.eigenvalues.map(f64::sqrt);
        let inv_roots = roots.map(|r| 1.0 / r);
        Ok(SpdFrame { sqrt: compose(&eig.eigenvectors, &roots), inv_sqrt: compose(&eig.eigenvectors, &inv_roots) })
    }

    pub fn whiten(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.inv_sqrt * a * &self.inv_sqrt))
    }

    pub fn unwhiten(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.sqrt * a * &self.sqrt))
    }

    /// `X^{1/2} expm(X^{-1/2} V X^{-1/2}) X^{1/2}`.
    pub fn exp(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.unwhiten(&expm_sym(&self.whiten(v))?))
    }

    /// `X^{1/2} logm(X^{-1/2} Y X^{-1/2}) X^{1/2}` together with the geodesic distance
    /// `‖logm(X^{-1/2} Y X^{-1/2})‖_F`.
    pub fn log_with_distance(&self, y: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
        let inner = logm_spd(&self.whiten(y))?;
        let dist = inner.norm();
        Ok((self.unwhiten(&inner), dist))
    }

    pub fn log(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.log_with_distance(y).map(|(v, _)| v)
    }

    pub fn distance(&self, y: &DMatrix<f64>) -> Result<f64> {
        let eig = sym_eigen(&self.whiten(y))?;
        check_positive(&eig.eigenvalues)?;
        Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }
}

/// Cholesky-based `tr(X⁻¹ U X⁻¹ V)`.
pub fn affine_inner(x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let chol =
        nalgebra::Cholesky::new(symmetrize(x)).ok_or_else(|| Error::numeric("base point is not positive definite"))?;
    let l = chol.l();
    let wu = whiten_lower(&l, u);
    let wv = whiten_lower(&l, v);
    Ok(wu.dot(&wv))
}

// L⁻¹ A L⁻ᵀ
fn whiten_lower(l: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let left = l.solve_lower_triangular(a).expect("cholesky factor has a nonzero diagonal");
    let both = l.solve_lower_triangular(&left.transpose()).expect("cholesky factor has a nonzero diagonal");
    both.transpose()
}
