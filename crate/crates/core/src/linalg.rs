//! Small dense eigen helpers shared by the estimators and the tests.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// Eigenpairs of a real symmetric (or complex Hermitian) matrix, sorted by
/// decreasing eigenvalue. Eigenvectors are the columns of `vectors`.
pub(crate) struct EigenDesc<T: ComplexField> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

pub(crate) fn eigen_desc<T>(m: &DMatrix<T>) -> Result<EigenDesc<T>>
where
    T: ComplexField<RealField = f64>,
{
    let dim = m.nrows();
    if dim == 0 {
        return Ok(EigenDesc {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Singular("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])].clone());
    Ok(EigenDesc { values, vectors })
}

pub(crate) fn eigenvalues_desc<T>(m: &DMatrix<T>) -> Result<Vec<f64>>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("eigensolver produced non-finite values".into()));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Clamp eigenvalues in `[-tol * scale, 0)` to zero; anything more negative
/// is reported as a PSD violation. `scale` is `max(1, largest eigenvalue)`
/// unless the caller passes a different reference.
pub(crate) fn clamp_psd(values: &mut [f64], rel_tol: f64) -> Result<()> {
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let floor = -rel_tol * top.max(f64::MIN_POSITIVE);
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < floor && *v < -rel_tol {
                return Err(Error::NotPositiveSemidefinite { eigenvalue: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub(crate) fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}
