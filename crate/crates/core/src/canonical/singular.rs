//! Pairs whose whole pencil `A + mu D` is singular.
//!
//! Removing the joint null space `{x : A x = 0, D x = 0}` by an orthogonal
//! change of basis leaves a reduced pair plus that many zero block pairs. A
//! symmetric pencil can stay singular after this step without any common
//! null vector; the caller reports that case as a diagnostic.

use super::CanonicalError;
use crate::linalg::{nonsingular_shift, null_space_basis, orthogonal_complement, Matrix};

/// Result of [`reduce_doubly_singular`].
#[derive(Debug, Clone)]
pub struct DoublySingularReduction {
    pub a_reduced: Matrix,
    pub d_reduced: Matrix,
    /// Orthonormal columns spanning the complement of the joint null space.
    pub basis: Matrix,
    /// Orthonormal basis of the joint null space.
    pub null_basis: Matrix,
    pub zero_count: usize,
    /// A shift with `a_reduced + mu d_reduced` nonsingular.
    pub mu: f64,
}

/// Joint null space of `A` and `D`, relative cutoff `tol`.
pub fn joint_null_space(a: &Matrix, d: &Matrix, tol: f64) -> Matrix {
    let n = a.nrows();
    let mut stacked = Matrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(a);
    stacked.view_mut((n, 0), (n, n)).copy_from(d);
    let scale = a.norm().max(d.norm());
    if scale == 0.0 {
        return Matrix::identity(n, n);
    }
    null_space_basis(&(stacked / scale), tol)
}

pub fn reduce_doubly_singular(
    a: &Matrix,
    d: &Matrix,
    tol: f64,
) -> Result<DoublySingularReduction, CanonicalError> {
    if nonsingular_shift(a, d).is_some() {
        return Err(CanonicalError::PreconditionViolated);
    }
    let n = a.nrows();
    let null_basis = joint_null_space(a, d, tol);
    let zero_count = null_basis.ncols();
    let basis = orthogonal_complement(&null_basis, n, tol);
    let a_reduced = basis.transpose() * a * &basis;
    let d_reduced = basis.transpose() * d * &basis;
    let mu = nonsingular_shift(&a_reduced, &d_reduced)
        .ok_or(CanonicalError::SingularPencil(basis.ncols()))?;
    Ok(DoublySingularReduction {
        a_reduced,
        d_reduced,
        basis,
        null_basis,
        zero_count,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(v))
    }

    #[test]
    fn small_examples() {
        let r = reduce_doubly_singular(&diag(&[1.0, 0.0]), &diag(&[0.0, 0.0]), 1e-10).unwrap();
        assert_eq!(r.zero_count, 1);
        assert!((r.a_reduced[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(r.d_reduced[(0, 0)].abs() < 1e-12);

        let r = reduce_doubly_singular(&diag(&[1.0, 0.0]), &diag(&[1.0, 0.0]), 1e-10).unwrap();
        assert_eq!(r.zero_count, 1);
        assert!((r.a_reduced[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((r.d_reduced[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn precondition() {
        let r = reduce_doubly_singular(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 1e-10);
        assert!(matches!(r, Err(CanonicalError::PreconditionViolated)));
    }

    #[test]
    fn singular_pencil_without_common_null_vector() {
        let a = Matrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.]);
        let d = Matrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., 1., 0., 0.]);
        assert_eq!(joint_null_space(&a, &d, 1e-10).ncols(), 0);
        assert!(matches!(
            reduce_doubly_singular(&a, &d, 1e-10),
            Err(CanonicalError::SingularPencil(3))
        ));
    }

    #[test]
    fn planted_joint_null_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a0 = diag(&[1.0, -1.0, 0.5, 0.0, 0.0]);
        let d0 = diag(&[0.3, 2.0, -1.0, 0.0, 0.0]);
        let t = Matrix::from_fn(5, 5, |i, j| if i == j { 2.0 } else { rng.random_range(-0.5..0.5) });
        let a = t.transpose() * &a0 * &t;
        let d = t.transpose() * &d0 * &t;
        let r = reduce_doubly_singular(&a, &d, 1e-10).unwrap();
        assert_eq!(r.zero_count, 2);
        assert!((&a * &r.null_basis).norm() < 1e-9);
        assert!((&d * &r.null_basis).norm() < 1e-9);
        // Q = [basis, null_basis] is orthogonal and block-diagonalizes both.
        let mut q = Matrix::zeros(5, 5);
        q.view_mut((0, 0), (5, 3)).copy_from(&r.basis);
        q.view_mut((0, 3), (5, 2)).copy_from(&r.null_basis);
        let mut rebuilt = Matrix::zeros(5, 5);
        rebuilt.view_mut((0, 0), (3, 3)).copy_from(&r.a_reduced);
        assert!((q.transpose() * &a * &q - rebuilt).norm() < 1e-9);
    }
}
