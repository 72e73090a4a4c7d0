//! Dense symmetric linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra` that fixes the conventions
//! the rest of the solver relies on: eigenvalues come back in ascending order,
//! numerical rank is decided against `tol * max(1, largest magnitude)`, and
//! symmetry is checked before any symmetric kernel runs.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::sqrt;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Spectral decomposition `M = Q diag(eigenvalues) Q^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, matching `eigenvalues`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn reconstruct(&self) -> Matrix {
        let q = &self.eigenvectors;
        let lambda = Matrix::from_diagonal(&Vector::from_vec(self.eigenvalues.clone()));
        q * lambda * q.transpose()
    }

    /// Number of eigenvalues with magnitude above `tol * max(1, spectral radius)`.
    pub fn rank(&self, tol: f64) -> usize {
        let thresh = rank_threshold(self.spectral_radius(), tol);
        self.eigenvalues.iter().filter(|l| l.abs() > thresh).count()
    }

    /// Orthonormal basis of the eigenvectors whose eigenvalues are numerically zero.
    pub fn null_basis(&self, tol: f64) -> Matrix {
        let thresh = rank_threshold(self.spectral_radius(), tol);
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| self.eigenvalues[i].abs() <= thresh)
            .collect();
        select_columns(&self.eigenvectors, &idx)
    }

    /// The `count` eigenvectors whose eigenvalues are smallest in magnitude.
    pub fn smallest_magnitude_basis(&self, count: usize) -> Matrix {
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&i, &j| {
            self.eigenvalues[i]
                .abs()
                .partial_cmp(&self.eigenvalues[j].abs())
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        idx.truncate(count);
        idx.sort_unstable();
        select_columns(&self.eigenvectors, &idx)
    }
}

pub(crate) fn rank_threshold(largest: f64, tol: f64) -> f64 {
    tol * largest.max(1.0)
}

pub fn select_columns(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.norm()
}

/// Largest entrywise gap `|m_ij - m_ji|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn check_symmetric(m: &Matrix, tol_sym: f64) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > tol_sym * (1.0 + frobenius(m)) {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eig(m: &Matrix, tol_sym: f64) -> Result<EigenDecomposition, LinalgError> {
    check_symmetric(m, tol_sym)?;
    Ok(sym_eig_unchecked(m))
}

pub(crate) fn sym_eig_unchecked(m: &Matrix) -> EigenDecomposition {
    let n = m.nrows();
    if n == 0 {
        return EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    EigenDecomposition {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: select_columns(&eig.eigenvectors, &order),
    }
}

/// Moore-Penrose pseudoinverse of a symmetric matrix.
pub fn pseudoinverse(m: &Matrix, tol: f64) -> Matrix {
    let eig = sym_eig_unchecked(m);
    let thresh = rank_threshold(eig.spectral_radius(), tol);
    let n = m.nrows();
    let mut out = Matrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > thresh {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    out
}

/// Singular values and a full set of right singular vectors.
fn full_right_svd(m: &Matrix) -> (Vec<f64>, Matrix) {
    let cols = m.ncols();
    // nalgebra only returns min(rows, cols) right vectors, so pad short matrices.
    let padded = if m.nrows() < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let cap = 200 * cols.max(10);
    if let Some(svd) = SVD::try_new(padded.clone(), false, true, f64::EPSILON, cap) {
        if let Some(v_t) = svd.v_t {
            return (svd.singular_values.iter().copied().collect(), v_t.transpose());
        }
    }
    // The bidiagonal iteration stalled: fall back to the Gram matrix, which
    // loses accuracy on tiny singular values but always terminates.
    let eig = sym_eig_unchecked(&(padded.transpose() * &padded));
    let sv = eig.eigenvalues.iter().map(|l| sqrt(l.max(0.0))).collect();
    (sv, eig.eigenvectors)
}

/// Singular values in descending order with the matching right singular vectors.
pub(crate) fn right_singular_sorted(m: &Matrix) -> (Vec<f64>, Matrix) {
    let (sv, v) = full_right_svd(m);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(core::cmp::Ordering::Equal));
    (order.iter().map(|&i| sv[i]).collect(), select_columns(&v, &order))
}

/// Orthonormal basis of `{x : M x = 0}` where singular values at or below
/// `tol * max(1, sigma_max)` count as zero.
pub fn null_space_basis(m: &Matrix, tol: f64) -> Matrix {
    let cols = m.ncols();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return Matrix::identity(cols, cols);
    }
    let (sv, v) = full_right_svd(m);
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let thresh = rank_threshold(largest, tol);
    let idx: Vec<usize> = (0..cols).filter(|&i| sv[i] <= thresh).collect();
    select_columns(&v, &idx)
}

/// Numerical rank from singular values.
pub fn numerical_rank(m: &Matrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (sv, _) = full_right_svd(m);
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let thresh = rank_threshold(largest, tol);
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Orthonormal basis of the orthogonal complement of `range(basis)`.
pub fn orthogonal_complement(basis: &Matrix, n: usize, tol: f64) -> Matrix {
    if basis.ncols() == 0 {
        return Matrix::identity(n, n);
    }
    null_space_basis(&basis.transpose(), tol)
}

/// Reciprocal condition number `min |lambda| / max |lambda|` of a symmetric matrix.
pub fn rcond_sym(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = sym_eig_unchecked(m);
    let big = eig.spectral_radius();
    if big == 0.0 {
        return 0.0;
    }
    let small = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min);
    small / big
}

/// Whether `v` lies in the range of the symmetric matrix `m` (least-squares residual test).
pub fn in_range(m: &Matrix, v: &Vector, tol: f64) -> bool {
    let p = pseudoinverse(m, tol);
    let resid = m * (&p * v) - v;
    resid.norm() <= 1e3 * tol * (1.0 + v.norm())
}

/// Real Schur decomposition `M = Q T Q^T` with `T` quasi upper triangular.
///
/// Every 2x2 diagonal block of `T` has a complex conjugate pair; blocks with
/// real eigenvalues are split by a rotation.
///
/// The QR iteration can stall on some structured inputs (a multiple of the
/// identity plus rounding noise never meets a machine-epsilon deflation
/// test), so it runs with an iteration cap and is retried after random
/// orthogonal similarities with a looser deflation threshold each time.
/// `None` when every attempt stalls.
pub fn real_schur(m: &Matrix) -> Option<(Matrix, Matrix)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Matrix::zeros(0, 0), Matrix::zeros(0, 0)));
    }
    let cap = 200 * n.max(10);
    let mut rng = ChaCha8Rng::seed_from_u64(0x7363_6875);
    let mut work = m.clone();
    let mut sim = Matrix::identity(n, n);
    for eps in [f64::EPSILON, 1e-14, 1e-13, 1e-12] {
        if let Some(schur) = Schur::try_new(work.clone(), eps, cap) {
            let (q, mut t) = schur.unpack();
            let mut q = &sim * q;
            split_real_blocks(&mut q, &mut t);
            if t.iter().all(|x| x.is_finite()) {
                return Some((q, t));
            }
        }
        sim = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
        work = sim.transpose() * m * &sim;
    }
    None
}

/// Triangularize the 2x2 diagonal blocks of `t` whose eigenvalues are real.
fn split_real_blocks(q: &mut Matrix, t: &mut Matrix) {
    let n = t.nrows();
    let mut i = 0;
    while i + 1 < n {
        if t[(i + 1, i)] == 0.0 {
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let half = 0.5 * (a - d);
        let disc = half * half + b * c;
        if disc < 0.0 {
            i += 2;
            continue;
        }
        // Eigenvector of the larger-magnitude root, as a rotation.
        let root = 0.5 * (a + d) + if half >= 0.0 { sqrt(disc) } else { -sqrt(disc) };
        let (v0, v1) = if (root - d).abs() >= c.abs() { (root - d, c) } else { (b, root - a) };
        let r = libm::hypot(v0, v1);
        let (cs, sn) = (v0 / r, v1 / r);
        for k in 0..n {
            let (x, y) = (t[(i, k)], t[(i + 1, k)]);
            t[(i, k)] = cs * x + sn * y;
            t[(i + 1, k)] = -sn * x + cs * y;
        }
        for k in 0..n {
            let (x, y) = (t[(k, i)], t[(k, i + 1)]);
            t[(k, i)] = cs * x + sn * y;
            t[(k, i + 1)] = -sn * x + cs * y;
            let (x, y) = (q[(k, i)], q[(k, i + 1)]);
            q[(k, i)] = cs * x + sn * y;
            q[(k, i + 1)] = -sn * x + cs * y;
        }
        t[(i + 1, i)] = 0.0;
        i += 2;
    }
}

/// Eigenvalues of a general square matrix, in the diagonal order of
/// [`real_schur`]. `None` when the QR iteration stalls.
pub fn general_eigenvalues(m: &Matrix) -> Option<Vec<Complex<f64>>> {
    real_schur(m).map(|(_, t)| quasi_triangular_eigenvalues(&t))
}

/// Eigenvalues of a real quasi-triangular Schur factor.
///
/// The 2x2 diagonal blocks are solved here rather than through nalgebra,
/// which returns a NaN imaginary part when the discriminant is a tiny
/// negative number (a nearly defective real pair).
pub fn quasi_triangular_eigenvalues(t: &Matrix) -> Vec<Complex<f64>> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = half * half + b * c;
            if disc >= 0.0 {
                let r = sqrt(disc);
                out.push(Complex::new(mid + r, 0.0));
                out.push(Complex::new(mid - r, 0.0));
            } else {
                let r = sqrt(-disc);
                out.push(Complex::new(mid, r));
                out.push(Complex::new(mid, -r));
            }
            i += 2;
        } else {
            out.push(Complex::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Rcond below which a pencil member counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-10;

/// Finds `mu` such that `A + mu D` is nonsingular.
///
/// Probes `0, ±1, ±2, …, ±n` and a few seeded random draws, returning the
/// candidate with the best reciprocal condition number (`0` wins whenever `A`
/// alone is comfortably conditioned). `None` means every probe was singular,
/// which for `2n + 1 > n` distinct points means `det(A + mu D)` vanishes
/// identically.
pub fn nonsingular_shift(a: &Matrix, d: &Matrix) -> Option<f64> {
    let n = a.nrows();
    if n == 0 {
        return Some(0.0);
    }
    let rc0 = rcond_sym(a);
    if rc0 >= 1e-3 {
        return Some(0.0);
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(2 * n + 5);
    for k in 1..=n.max(2) {
        candidates.push(k as f64);
        candidates.push(-(k as f64));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6774_7273);
    for _ in 0..4 {
        candidates.push(rng.random_range(-3.0..3.0));
    }
    // Measure against the members' scale, not the shifted matrix's own norm:
    // cancellation can leave a matrix of pure rounding noise with rcond near 1.
    let (na, nd) = (a.norm(), d.norm());
    let rel = |mu: f64| {
        let eig = sym_eig_unchecked(&(a + d * mu));
        let small = eig.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        let scale = na + mu.abs() * nd;
        if scale == 0.0 {
            0.0
        } else {
            small / scale
        }
    };
    let mut best = (0.0, rc0.min(rel(0.0)));
    for mu in candidates {
        let rc = rel(mu);
        if rc > best.1 {
            best = (mu, rc);
        }
    }
    if best.1 > SINGULAR_RCOND {
        Some(best.0)
    } else {
        None
    }
}

/// Minimum of `1/2 x^T H x + g^T x + k` over all `x`, or `None` when unbounded.
pub fn minimize_quadratic(h: &Matrix, g: &Vector, k: f64, tol: f64) -> Option<(f64, Vector)> {
    let n = h.nrows();
    if n == 0 {
        return Some((k, Vector::zeros(0)));
    }
    let eig = sym_eig_unchecked(h);
    let scale = eig.spectral_radius().max(g.norm()).max(1.0);
    if eig.min() < -tol * scale {
        return None;
    }
    let hp = pseudoinverse(h, tol);
    let x = -(&hp * g);
    let resid = h * &x + g;
    if resid.norm() > 1e3 * tol * scale * (1.0 + x.norm()) {
        return None;
    }
    let value = 0.5 * x.dot(&(h * &x)) + g.dot(&x) + k;
    Some((value, x))
}

#[allow(dead_code)]
pub(crate) fn norm_vec(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}
