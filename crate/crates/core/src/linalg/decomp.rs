//! Matrix decompositions. The heavy lifting is delegated to `nalgebra`; this
//! module only converts between [`Operator`] and `DMatrix` and fixes ordering
//! conventions.

use nalgebra::DMatrix;

use super::operator::{Operator, C64};
use crate::error::{PctcError, Result};

fn to_na(op: &Operator) -> DMatrix<C64> {
    DMatrix::from_row_slice(op.rows(), op.cols(), op.entries())
}

fn from_na(m: &DMatrix<C64>) -> Operator {
    Operator::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in descending order, `min(rows, cols)` of them.
pub fn singular_values(m: &Operator) -> Vec<f64> {
    let mut sv: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value.
///
/// Cheap entrywise bounds (`max |a_ij| <= sigma_max <= ||A||_F`) settle the
/// question for callers that only compare against a threshold; see
/// [`spectral_norm_exceeds`].
pub fn spectral_norm(m: &Operator) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Whether `sigma_max(m) > threshold`, computing the SVD only when the
/// entrywise bounds cannot decide.
pub fn spectral_norm_exceeds(m: &Operator, threshold: f64) -> bool {
    if m.max_abs() > threshold {
        return true;
    }
    if m.frobenius_norm() <= threshold {
        return false;
    }
    spectral_norm(m) > threshold
}

/// Eigen-decomposition of a Hermitian operator: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &Operator) -> Result<(Vec<f64>, Operator)> {
    if !m.is_hermitian(1e-9 * m.max_abs().max(1.0)) {
        return Err(PctcError::InvalidValue("operator is not Hermitian".into()));
    }
    // symmetrize before handing to the solver
    let sym = (&to_na(m) + to_na(m).adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Operator::from_fn(m.rows(), m.cols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &Operator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.0)
}

/// Principal square root of a positive semidefinite operator. Eigenvalues in
/// `[-tol, 0)` are clamped to zero.
pub fn psd_sqrt(m: &Operator, tol: f64) -> Result<Operator> {
    let (values, vectors) = hermitian_eigen(m)?;
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(PctcError::InvalidValue(format!(
                "operator is not positive semidefinite (eigenvalue {min:.3e})"
            )));
        }
    }
    let n = m.rows();
    Ok(Operator::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vectors.get(i, k) * vectors.get(j, k).conj() * values[k].max(0.0).sqrt())
            .sum()
    }))
}

pub fn inverse(m: &Operator) -> Result<Operator> {
    if !m.is_square() {
        return Err(PctcError::Dimension("inverse of a non-square operator".into()));
    }
    to_na(m)
        .try_inverse()
        .map(|inv| from_na(&inv))
        .ok_or_else(|| PctcError::InvalidValue("singular operator".into()))
}

/// Trace norm `||A||_1` (sum of singular values).
pub fn trace_norm(m: &Operator) -> f64 {
    singular_values(m).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::gates::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn identity_singular_values() {
        let sv = singular_values(&Operator::identity(3));
        assert_eq!(sv.len(), 3);
        for s in sv {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_plus_columns() {
        // eigenvalues of the Gram matrix [[1, 1/√2], [1/√2, 1]] are 1 ± 1/√2
        let m = Operator::from_columns(&[ket0(), ket_plus()]).unwrap();
        let sv = singular_values(&m);
        assert!((sv[0] - (1.0 + FRAC_1_SQRT_2).sqrt()).abs() < 1e-12);
        assert!((sv[1] - (1.0 - FRAC_1_SQRT_2).sqrt()).abs() < 1e-12);
        assert!((sv[0] - 1.30656).abs() < 1e-5);
        assert!((sv[1] - 0.54120).abs() < 1e-5);
    }

    #[test]
    fn duplicate_columns_rank_one() {
        let m = Operator::from_columns(&[ket0(), ket0()]).unwrap();
        let sv = singular_values(&m);
        assert!((sv[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!(sv[1].abs() < 1e-12);
    }

    #[test]
    fn rectangular_singular_value_count() {
        let m = Operator::from_columns(&[basis(4, 0), basis(4, 1)]).unwrap();
        assert_eq!(singular_values(&m).len(), 2);
    }

    #[test]
    fn spectral_bounds_agree_with_svd() {
        let m = Operator::from_real(2, 2, &[3.0, 0.0, 0.0, 4.0]).unwrap();
        assert!(spectral_norm_exceeds(&m, 3.9));
        assert!(!spectral_norm_exceeds(&m, 4.1));
        let tiny = m.scale(r(1e-12));
        assert!(!spectral_norm_exceeds(&tiny, 1e-9));
    }

    #[test]
    fn sqrt_of_projector_is_itself() {
        let p = Operator::outer(&ket_plus(), &ket_plus());
        let s = psd_sqrt(&p, 1e-12).unwrap();
        assert!(s.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn eigenvalues_ascending() {
        let (vals, vecs) = hermitian_eigen(&x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        assert!(vecs.is_unitary(1e-12));
    }
}
