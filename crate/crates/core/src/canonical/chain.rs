//! Canonical form of one real eigenvalue cluster whose Jordan blocks have
//! size at most two.
//!
//! With `N = A^{-1} D - lambda I` nilpotent of index two, the top right
//! singular vectors `w_j` of `N` start the Jordan pairs `(N w_j, w_j)`, and the
//! rest of `null(N)` carries the 1x1 part. In that basis the Gram matrix of
//! `A` already has zero blocks where the Jordan structure forces them. Three
//! congruence sweeps finish the job: clear the coupling between the pairs and
//! the 1x1 part, clear the `w`-`w` block, then diagonalize the pair pairing
//! and the 1x1 part spectrally and scale everything to unit magnitude.

use alloc::vec::Vec;

use super::CanonicalError;
use crate::linalg::{right_singular_sorted, select_columns, sym_eig_unchecked, symmetrize, Matrix};
use crate::math::{sign, sqrt};
use crate::problem::Tolerances;

/// Output of [`chain_canonical`].
#[derive(Debug, Clone)]
pub struct ChainForm {
    /// `diag(tau_1 E, ..., tau_k E, eps_1, ..., eps_r)`
    pub a_check: Matrix,
    /// `a_check` times `diag(J(lambda, 2), ..., lambda, ...)`
    pub d_check: Matrix,
    /// Congruence with `U^T A_i U = a_check`.
    pub u: Matrix,
    pub taus: Vec<f64>,
    pub epsilons: Vec<f64>,
}

/// Canonical form of a single chain `(A_i, D_i)` at eigenvalue `lambda`.
///
/// `sizes` lists the Jordan block sizes; only 1 and 2 are accepted.
pub fn chain_canonical(
    a_i: &Matrix,
    d_i: &Matrix,
    lambda: f64,
    sizes: &[usize],
    _tol: &Tolerances,
) -> Result<ChainForm, CanonicalError> {
    if let Some(&s) = sizes.iter().find(|&&s| s > 2 || s == 0) {
        return Err(CanonicalError::ChainTooComplex(s));
    }
    let m = a_i.nrows();
    let total: usize = sizes.iter().sum();
    if total != m || a_i.ncols() != m || d_i.shape() != (m, m) {
        return Err(CanonicalError::DimensionMismatch {
            expected: m,
            found: total,
        });
    }
    let k = sizes.iter().filter(|&&s| s == 2).count();
    let r = m - 2 * k;
    let a_inv = a_i
        .clone()
        .try_inverse()
        .ok_or(CanonicalError::SingularA)?;
    let nil = &a_inv * d_i - Matrix::identity(m, m) * lambda;

    let (_, right) = right_singular_sorted(&nil);
    let mut w = select_columns(&right, &(0..k).collect::<Vec<_>>());
    for mut col in w.column_iter_mut() {
        let (imax, _) = col.iter().enumerate().fold((0, 0.0f64), |best, (i, v)| {
            if v.abs() > best.1 {
                (i, v.abs())
            } else {
                best
            }
        });
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    let u = &nil * &w;
    let z = select_columns(&right, &(k..m).collect::<Vec<_>>());

    // The 1x1 part: directions of null(N) orthogonal to span(U).
    let v0 = if r == 0 {
        Matrix::zeros(m, 0)
    } else if k == 0 {
        z.clone()
    } else {
        let (_, rz) = right_singular_sorted(&(u.transpose() * &z));
        let coeff = select_columns(&rz, &(k..(m - k)).collect::<Vec<_>>());
        &z * coeff
    };

    let mut pairs_u = u;
    let mut pairs_w = w;
    let mut singles = v0;
    if k > 0 {
        let p = pairs_u.transpose() * a_i * &pairs_w;
        let p_inv = p.clone().try_inverse().ok_or(CanonicalError::NumericalBreakdown(
            "Jordan pairs are degenerate under A",
        ))?;
        if r > 0 {
            // Clear the coupling between the pairs and the 1x1 part.
            let rr = pairs_w.transpose() * a_i * &singles;
            singles -= &pairs_u * (p_inv.transpose() * rr);
        }
        // Clear the w-w block.
        let q = symmetrize(&(pairs_w.transpose() * a_i * &pairs_w));
        pairs_w -= &pairs_u * (p_inv.transpose() * q * 0.5);

        // Diagonalize the u-w pairing.
        let p = symmetrize(&(pairs_u.transpose() * a_i * &pairs_w));
        let eig = sym_eig_unchecked(&p);
        pairs_w = &pairs_w * &eig.eigenvectors;
        pairs_u = &pairs_u * &eig.eigenvectors;
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() <= f64::MIN_POSITIVE {
                return Err(CanonicalError::NumericalBreakdown("zero pairing in a Jordan pair"));
            }
            let s = 1.0 / sqrt(l.abs());
            pairs_u.column_mut(j).scale_mut(s);
            pairs_w.column_mut(j).scale_mut(s);
        }
    }

    let mut eps_signs = Vec::with_capacity(r);
    if r > 0 {
        let t = symmetrize(&(singles.transpose() * a_i * &singles));
        let eig = sym_eig_unchecked(&t);
        singles = &singles * &eig.eigenvectors;
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() <= f64::MIN_POSITIVE {
                return Err(CanonicalError::NumericalBreakdown("1x1 part is singular under A"));
            }
            singles.column_mut(j).scale_mut(1.0 / sqrt(l.abs()));
            eps_signs.push(sign(l));
        }
    }

    let mut basis = Matrix::zeros(m, m);
    let mut taus = Vec::with_capacity(k);
    for j in 0..k {
        basis.set_column(2 * j, &pairs_u.column(j));
        basis.set_column(2 * j + 1, &pairs_w.column(j));
        let pairing = pairs_u.column(j).dot(&(a_i * pairs_w.column(j)));
        taus.push(sign(pairing));
    }
    for j in 0..r {
        basis.set_column(2 * k + j, &singles.column(j));
    }

    let mut a_check = Matrix::zeros(m, m);
    let mut d_check = Matrix::zeros(m, m);
    for (j, &tau) in taus.iter().enumerate() {
        let o = 2 * j;
        a_check[(o, o + 1)] = tau;
        a_check[(o + 1, o)] = tau;
        d_check[(o, o + 1)] = tau * lambda;
        d_check[(o + 1, o)] = tau * lambda;
        d_check[(o + 1, o + 1)] = tau;
    }
    for (j, &eps) in eps_signs.iter().enumerate() {
        let o = 2 * k + j;
        a_check[(o, o)] = eps;
        d_check[(o, o)] = eps * lambda;
    }
    Ok(ChainForm {
        a_check,
        d_check,
        u: basis,
        taus,
        epsilons: eps_signs,
    })
}
