//! Symmetric eigendecomposition with ascending eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100_000;

/// `A = P·diag(λ)·Pᵀ` with orthonormal `P` and `λ₁ ≤ … ≤ λₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl SpectralDecomposition {
    /// Columns are eigenvectors; row `h` holds the components `p_{h,·}` seen
    /// by a driver at node `h`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lambda_min().abs().max(self.lambda_max().abs())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.basis * DMatrix::from_diagonal(&self.eigenvalues) * self.basis.transpose()
    }
}

pub fn eig_sym(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Contract(format!("eig_sym needs a non-empty square matrix, got {}×{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("eig_sym input has non-finite entries".into()));
    }
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if gap > SYMMETRY_TOL {
                return Err(Error::Contract(format!("matrix not symmetric: |a[{i},{j}] − a[{j},{i}]| = {gap:e}")));
            }
        }
    }
    // Entries below ε²·max|a| are far under the solver's backward error, and
    // strongly graded inputs that keep them can drive the QR sweep to NaN.
    let floor = f64::EPSILON * f64::EPSILON * a.amax();
    let flushed = a.map(|x| if x.abs() < floor { 0.0 } else { x });
    let eig = flushed
        .try_symmetric_eigen(f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Convergence(format!("symmetric QR did not converge for n = {n}")))?;
    if eig.eigenvalues.iter().chain(eig.eigenvectors.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Convergence(format!("symmetric QR produced non-finite output for n = {n}")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut basis = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // sign: first clearly nonzero component positive
        let cutoff = 1e-10 * col.amax();
        if let Some(first) = col.iter().copied().find(|x| x.abs() > cutoff) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
        basis.set_column(dst, &col);
    }
    Ok(SpectralDecomposition { basis, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let s = eig_sym(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.eigenvalues().as_slice(), &[1.0, 1.0, 1.0]);
        assert!((s.basis().transpose() * s.basis() - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn swap_matrix() {
        let s = eig_sym(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-15);
        for c in 0..2 {
            assert!(s.basis()[(0, c)] > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric_and_nan() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(eig_sym(&a), Err(Error::Contract(_))));
        let b = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(eig_sym(&b), Err(Error::Contract(_))));
    }
}
