use std::sync::Arc;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Orthogonality tolerance for the rotation factor: `max |QᵀQ − I| ≤ 1e−10`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// A symmetric positive-definite learning-rate matrix, stored in a form whose
/// eigenvalues are known exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum LearningRateMatrix {
    /// `η·I` in dimension `dim`.
    Scalar { eta: f64, dim: usize },
    /// `diag(d)`.
    Diagonal { d: Vec<f64> },
    /// `Q·diag(d)·Qᵀ` with `Q` orthogonal.
    Rotated { q: Arc<DMatrix<f64>>, d: Vec<f64> },
}

fn check_eigenvalues(d: &[f64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::contract("learning-rate matrix needs dimension ≥ 1"));
    }
    match d.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        Some(bad) => Err(Error::contract(format!(
            "eigenvalue {bad} is not finite and positive"
        ))),
        None => Ok(()),
    }
}

/// Largest entry of `|QᵀQ − I|`.
pub(crate) fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let qtq = q.transpose() * q;
    let n = q.ncols();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((qtq[(i, j)] - target).abs());
        }
    }
    worst
}

pub(crate) fn check_orthogonal(q: &DMatrix<f64>) -> Result<()> {
    if !q.is_square() {
        return Err(Error::contract("rotation factor must be square"));
    }
    let defect = orthogonality_defect(q);
    if defect > ORTHOGONALITY_TOL {
        return Err(Error::contract(format!(
            "rotation factor is not orthogonal (defect {defect:e})"
        )));
    }
    Ok(())
}

impl LearningRateMatrix {
    pub fn scalar(eta: f64, dim: usize) -> Result<Self> {
        check_eigenvalues(&[eta])?;
        if dim == 0 {
            return Err(Error::contract("learning-rate matrix needs dimension ≥ 1"));
        }
        Ok(Self::Scalar { eta, dim })
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        check_eigenvalues(&d)?;
        Ok(Self::Diagonal { d })
    }

    pub fn rotated(q: Arc<DMatrix<f64>>, d: Vec<f64>) -> Result<Self> {
        check_eigenvalues(&d)?;
        check_orthogonal(&q)?;
        if q.nrows() != d.len() {
            return Err(Error::contract("rotation and eigenvalue dimensions differ"));
        }
        Ok(Self::Rotated { q, d })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Scalar { dim, .. } => *dim,
            Self::Diagonal { d } | Self::Rotated { d, .. } => d.len(),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            Self::Scalar { eta, dim } => vec![*eta; *dim],
            Self::Diagonal { d } | Self::Rotated { d, .. } => d.clone(),
        }
    }

    pub fn lambda_min(&self) -> f64 {
        match self {
            Self::Scalar { eta, .. } => *eta,
            Self::Diagonal { d } | Self::Rotated { d, .. } => {
                d.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn lambda_max(&self) -> f64 {
        match self {
            Self::Scalar { eta, .. } => *eta,
            Self::Diagonal { d } | Self::Rotated { d, .. } => {
                d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Spectral condition number `‖M‖₂‖M⁻¹‖₂`.
    pub fn kappa(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    /// Symmetry and positive definiteness, read off the representation.
    pub fn is_symmetric_positive_definite(&self) -> bool {
        match self {
            Self::Scalar { .. } | Self::Diagonal { .. } => {
                check_eigenvalues(&self.eigenvalues()).is_ok()
            }
            Self::Rotated { q, d } => {
                check_eigenvalues(d).is_ok() && check_orthogonal(q).is_ok()
            }
        }
    }

    /// `out = M·g`.
    pub fn apply_into(&self, g: &[f64], out: &mut [f64]) {
        match self {
            Self::Scalar { eta, .. } => {
                for (o, x) in out.iter_mut().zip(g) {
                    *o = eta * x;
                }
            }
            Self::Diagonal { d } => {
                for ((o, x), di) in out.iter_mut().zip(g).zip(d) {
                    *o = di * x;
                }
            }
            Self::Rotated { q, d } => apply_rotated(q, d, g, out),
        }
    }

    /// Dense `p × p` form, mainly for testing.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Scalar { eta, dim } => DMatrix::identity(*dim, *dim) * *eta,
            Self::Diagonal { d } => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())),
            Self::Rotated { q, d } => {
                let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone()));
                q.as_ref() * diag * q.transpose()
            }
        }
    }
}

/// `out = Q·diag(d)·Qᵀ·g`.
pub(crate) fn apply_rotated(q: &DMatrix<f64>, d: &[f64], g: &[f64], out: &mut [f64]) {
    let p = d.len();
    let mut y = vec![0.0; p];
    for (j, yj) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..p {
            s += q[(i, j)] * g[i];
        }
        *yj = s * d[j];
    }
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, yj) in y.iter().enumerate() {
            s += q[(i, j)] * yj;
        }
        *o = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(angle: f64) -> Arc<DMatrix<f64>> {
        let (s, c) = angle.sin_cos();
        Arc::new(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    #[test]
    fn rejects_non_positive_eigenvalues() {
        assert!(LearningRateMatrix::diagonal(vec![0.1, 0.0]).is_err());
        assert!(LearningRateMatrix::scalar(-1.0, 2).is_err());
        assert!(LearningRateMatrix::diagonal(vec![f64::NAN]).is_err());
    }

    #[test]
    fn rejects_non_orthogonal_factor() {
        let q = Arc::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]));
        assert!(LearningRateMatrix::rotated(q, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn rotated_bounds_are_invariant() {
        let m = LearningRateMatrix::rotated(rotation(0.7), vec![0.2, 0.1]).unwrap();
        assert_eq!(m.lambda_min(), 0.1);
        assert_eq!(m.lambda_max(), 0.2);
        assert_eq!(m.kappa(), 2.0);
        let dense = m.to_dense();
        assert!((dense.clone() - dense.transpose()).abs().max() < 1e-15);
        let eig = dense.symmetric_eigenvalues();
        let mut e: Vec<f64> = eig.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 0.1).abs() < 1e-14 && (e[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn apply_matches_dense_product() {
        let m = LearningRateMatrix::rotated(rotation(-1.3), vec![0.5, 3.0]).unwrap();
        let g = [0.7, -2.0];
        let mut out = [0.0; 2];
        m.apply_into(&g, &mut out);
        let dense = m.to_dense() * nalgebra::DVector::from_row_slice(&g);
        assert!((out[0] - dense[0]).abs() < 1e-14 && (out[1] - dense[1]).abs() < 1e-14);
    }
}
