//! Congruent canonical form of a symmetric pair `(A, D)`.
//!
//! An invertible `S` makes `S^T A S` and `S^T D S` simultaneously block
//! diagonal with blocks from a short list:
//!
//! * 1x1 pairs `(alpha, delta)` with `alpha = ±1` (the diagonalizable part),
//! * 1x1 pairs `(0, ±1)`, where `A` is singular but `D` is not,
//! * 2x2 pairs `(tau E, tau E J(kappa, 2))` with `E = [[0,1],[1,0]]`,
//!   i.e. `A`-part `tau [[0,1],[1,0]]` and `D`-part `tau [[0,kappa],[kappa,1]]`,
//! * zero pairs `(0, 0)` spanning the joint null space.
//!
//! Anything else (complex eigenvalues, real Jordan blocks of size three or
//! more, `A`-singular blocks of size two or more, singular pencils) comes back
//! as an [`EarlyDiagnostic`]. Every one of those structures makes the
//! optimization problem unbounded below, so the blocks are never assembled.
//!
//! Routing: the pair is scaled to unit Frobenius norms, a shift `mu` with
//! `C = A + mu D` nonsingular is chosen (`mu = 0` when `A` is nonsingular), the
//! Jordan structure of `C^{-1} D` is analysed cluster by cluster, and each
//! cluster is brought to canonical form. A shift maps an eigenvalue `lambda`
//! of `C^{-1} D` to `kappa = lambda / (1 - mu lambda)` of `A^{-1} D`; the
//! points with `mu lambda = 1` are exactly the `A`-singular blocks. When no
//! shift exists the joint null space is split off first.

mod chain;
mod jordan;
mod singular;

use alloc::vec;
use alloc::vec::Vec;

pub use chain::{chain_canonical, ChainForm};
pub use jordan::{jordan_structure, Chain, Eigenvalue, JordanData};
pub use singular::{joint_null_space, reduce_doubly_singular, DoublySingularReduction};

use jordan::{analyze_pencil, ClusterIssue};

use crate::linalg::{check_symmetric, nonsingular_shift, right_singular_sorted, Matrix};
use crate::math::{sign, sqrt};
use crate::problem::Tolerances;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CanonicalError {
    #[error("A is singular")]
    SingularA,
    #[error("chain contains a block of size {0}, only sizes 1 and 2 are supported")]
    ChainTooComplex(usize),
    #[error("a nonsingular pencil member exists, reduction does not apply")]
    PreconditionViolated,
    #[error("pencil of size {0} is singular without a common null vector")]
    SingularPencil(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
}

/// Structures that rule out a finite optimal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagnosticKind {
    /// Real Jordan block of `A^{-1} D` with the given size (at least 3).
    JordanTooLarge(usize),
    /// Complex eigenvalue pair `a ± ib` of `A^{-1} D`.
    ComplexPair(f64, f64),
    /// `A`-singular block pair of the given size (at least 2).
    TypeBLarge(usize),
    /// The reduced pencil of the given size is singular for every shift.
    SingularPencil(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockPair {
    /// `(alpha, delta)` with `alpha` in `{-1, 0, 1}`. `alpha = 0` is the
    /// `A`-singular 1x1 pair, which then has `delta = ±1`.
    OneByOne { alpha: f64, delta: f64 },
    /// `(tau E, tau E J(kappa, 2))`
    TwoByTwo { tau: f64, kappa: f64 },
    Zero,
    Diagnostic(DiagnosticKind),
}

impl BlockPair {
    pub fn size(&self) -> usize {
        match self {
            BlockPair::OneByOne { .. } | BlockPair::Zero => 1,
            BlockPair::TwoByTwo { .. } => 2,
            BlockPair::Diagnostic(_) => 0,
        }
    }

    /// `(A-part, D-part)` of the block.
    pub fn parts(&self) -> (Matrix, Matrix) {
        match *self {
            BlockPair::OneByOne { alpha, delta } => {
                (Matrix::from_element(1, 1, alpha), Matrix::from_element(1, 1, delta))
            }
            BlockPair::TwoByTwo { tau, kappa } => (
                Matrix::from_row_slice(2, 2, &[0.0, tau, tau, 0.0]),
                Matrix::from_row_slice(2, 2, &[0.0, tau * kappa, tau * kappa, tau]),
            ),
            BlockPair::Zero => (Matrix::zeros(1, 1), Matrix::zeros(1, 1)),
            BlockPair::Diagnostic(_) => (Matrix::zeros(0, 0), Matrix::zeros(0, 0)),
        }
    }
}

/// Block-diagonal `(A-hat, D-hat)` from a block list.
pub fn assemble(blocks: &[BlockPair]) -> (Matrix, Matrix) {
    let n: usize = blocks.iter().map(BlockPair::size).sum();
    let mut a = Matrix::zeros(n, n);
    let mut d = Matrix::zeros(n, n);
    let mut at = 0;
    for blk in blocks {
        let (pa, pd) = blk.parts();
        let s = blk.size();
        a.view_mut((at, at), (s, s)).copy_from(&pa);
        d.view_mut((at, at), (s, s)).copy_from(&pd);
        at += s;
    }
    (a, d)
}

/// A verified canonical form.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Columns ordered like `blocks`: 1x1 pairs, then 2x2 pairs, then zeros.
    pub s: Matrix,
    pub blocks: Vec<BlockPair>,
    pub zero_count: usize,
    /// `permutation[k]` is the column of the unsorted construction that became
    /// column `k` of `s`.
    pub permutation: Vec<usize>,
    /// Shift used to reach a nonsingular pencil member.
    pub mu: f64,
    /// Ratio of extreme singular values of `s`.
    pub condition: f64,
    /// `condition` exceeded `1e10`.
    pub ill_conditioned: bool,
    /// Distinct eigenvalues that carry 2x2 blocks. More than one of them
    /// means the problem is unbounded whenever those blocks have `tau = +1`.
    pub two_by_two_chains: usize,
    /// `max(|S^T A S - A-hat|_F, |S^T D S - D-hat|_F)` against the assembled blocks.
    pub residual: f64,
}

impl CanonicalForm {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn assembled(&self) -> (Matrix, Matrix) {
        assemble(&self.blocks)
    }

    /// Index of the first column of each block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            out.push(at);
            at += b.size();
        }
        out
    }

    pub fn one_by_one_count(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b, BlockPair::OneByOne { .. }))
            .count()
    }

    pub fn two_by_two_count(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b, BlockPair::TwoByTwo { .. }))
            .count()
    }

    /// Round-trip residual against arbitrary `(A, D)`.
    pub fn residual_against(&self, a: &Matrix, d: &Matrix) -> f64 {
        let (ha, hd) = self.assembled();
        let s = &self.s;
        (s.transpose() * a * s - ha).norm() + (s.transpose() * d * s - hd).norm()
    }
}

/// Offending structure found before assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyDiagnostic {
    pub issues: Vec<DiagnosticKind>,
    pub zero_count: usize,
}

#[derive(Debug, Clone)]
pub enum Canonicalization {
    Form(CanonicalForm),
    Diagnostic(EarlyDiagnostic),
}

impl Canonicalization {
    pub fn form(&self) -> Option<&CanonicalForm> {
        match self {
            Canonicalization::Form(f) => Some(f),
            Canonicalization::Diagnostic(_) => None,
        }
    }
}

pub(crate) fn check_pair(a: &Matrix, d: &Matrix, tol: &Tolerances) -> Result<(), CanonicalError> {
    if a.shape() != d.shape() {
        return Err(CanonicalError::DimensionMismatch {
            expected: a.nrows(),
            found: d.nrows(),
        });
    }
    for m in [a, d] {
        check_symmetric(m, tol.sym).map_err(|e| match e {
            crate::linalg::LinalgError::NotSymmetric { asymmetry } => {
                CanonicalError::NotSymmetric(asymmetry)
            }
            _ => CanonicalError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            },
        })?;
    }
    Ok(())
}

/// Block kinds before the final scaling pass.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Proto {
    TypeA,
    TypeB,
    Pair,
    Zero,
}

/// Relative round-trip residual above which a computed form is rejected.
const BREAKDOWN_RESIDUAL: f64 = 1e-6;

/// Relative tolerance for `mu lambda = 1`.
const TYPE_B_TOL: f64 = 1e-6;

/// Canonical form of `(A, D)`, or a diagnostic when the pair has a structure
/// that is never bounded.
pub fn canonicalize(a: &Matrix, d: &Matrix, tol: &Tolerances) -> Result<Canonicalization, CanonicalError> {
    check_pair(a, d, tol)?;
    let n = a.nrows();
    let na = a.norm();
    let nd = d.norm();
    let a_s = if na > 0.0 { a / na } else { a.clone() };
    let d_s = if nd > 0.0 { d / nd } else { d.clone() };

    // Split off the joint null space when every pencil member is singular.
    let (basis, null_basis, a_r, d_r, mu) = match nonsingular_shift(&a_s, &d_s) {
        Some(mu) => (Matrix::identity(n, n), Matrix::zeros(n, 0), a_s, d_s, mu),
        None => match reduce_doubly_singular(&a_s, &d_s, tol.eig * 10.0) {
            Ok(r) => (r.basis, r.null_basis, r.a_reduced, r.d_reduced, r.mu),
            Err(CanonicalError::SingularPencil(size)) => {
                let zero_count = joint_null_space(&a_s, &d_s, tol.eig * 10.0).ncols();
                return Ok(Canonicalization::Diagnostic(EarlyDiagnostic {
                    issues: vec![DiagnosticKind::SingularPencil(size)],
                    zero_count,
                }));
            }
            Err(e) => return Err(e),
        },
    };
    let zero_count = null_basis.ncols();
    let r = a_r.nrows();
    let c = &a_r + &d_r * mu;
    let analysis = analyze_pencil(&c, &d_r, mu, tol)?;
    let is_type_b = |lambda: f64| mu != 0.0 && (1.0 - mu * lambda).abs() <= TYPE_B_TOL * (1.0 + (mu * lambda).abs());

    let mut issues = Vec::new();
    for issue in &analysis.issues {
        match *issue {
            ClusterIssue::Complex { re, im, .. } => {
                // kappa = lambda / (1 - mu lambda) in complex arithmetic.
                let (nr, ni) = (1.0 - mu * re, -mu * im);
                let den = nr * nr + ni * ni;
                let kr = (re * nr + im * ni) / den;
                let ki = (im * nr - re * ni) / den;
                issues.push(DiagnosticKind::ComplexPair(kr * nd / na.max(f64::MIN_POSITIVE), ki.abs() * nd / na.max(f64::MIN_POSITIVE)));
            }
            ClusterIssue::Large { lambda, size, .. } => {
                if is_type_b(lambda) {
                    issues.push(DiagnosticKind::TypeBLarge(size));
                } else {
                    issues.push(DiagnosticKind::JordanTooLarge(size));
                }
            }
        }
    }
    for rc in &analysis.real {
        if rc.twos > 0 && is_type_b(rc.lambda) {
            issues.push(DiagnosticKind::TypeBLarge(2));
        }
    }
    if !issues.is_empty() {
        return Ok(Canonicalization::Diagnostic(EarlyDiagnostic { issues, zero_count }));
    }

    // Canonical basis of (C, D) cluster by cluster.
    let mut s_r = Matrix::zeros(r, r);
    let mut protos: Vec<Proto> = Vec::with_capacity(n);
    let mut at = 0;
    let mut chains_with_pairs = 0;
    for rc in &analysis.real {
        let ci = rc.basis.transpose() * &c * &rc.basis;
        let di = rc.basis.transpose() * &d_r * &rc.basis;
        let form = chain_canonical(&ci, &di, rc.lambda, &rc.sizes(), tol)?;
        let cols = &rc.basis * &form.u;
        s_r.view_mut((0, at), (r, rc.multiplicity)).copy_from(&cols);
        at += rc.multiplicity;
        if rc.twos > 0 {
            chains_with_pairs += 1;
        }
        for _ in 0..rc.twos {
            protos.push(Proto::Pair);
            protos.push(Proto::Pair);
        }
        let single = if is_type_b(rc.lambda) { Proto::TypeB } else { Proto::TypeA };
        protos.extend(core::iter::repeat_n(single, rc.multiplicity - 2 * rc.twos));
    }
    if at != r {
        return Err(CanonicalError::NumericalBreakdown("clusters do not cover the space"));
    }
    let mut s = Matrix::zeros(n, n);
    s.view_mut((0, 0), (n, r)).copy_from(&(&basis * s_r));
    s.view_mut((0, r), (n, zero_count)).copy_from(&null_basis);
    protos.extend(core::iter::repeat_n(Proto::Zero, zero_count));

    let form = finish(a, d, s, &protos, mu, chains_with_pairs);
    // A wrong block structure cannot be repaired downstream.
    if form.residual.is_nan() || form.residual > BREAKDOWN_RESIDUAL * (1.0 + na + nd) {
        return Err(CanonicalError::NumericalBreakdown("canonical form does not reproduce the pair"));
    }
    Ok(Canonicalization::Form(form))
}

/// Rescale the columns of each unit against the original (unscaled) pair.
fn normalize(a: &Matrix, d: &Matrix, s: &mut Matrix, units: &[(usize, Proto)]) {
    for &(j, kind) in units {
        match kind {
            Proto::TypeA => {
                let cj = s.column(j).into_owned();
                let aj = cj.dot(&(a * &cj));
                s.column_mut(j).scale_mut(1.0 / sqrt(aj.abs()));
            }
            Proto::TypeB => {
                let cj = s.column(j).into_owned();
                let dj = cj.dot(&(d * &cj));
                s.column_mut(j).scale_mut(1.0 / sqrt(dj.abs()));
            }
            Proto::Pair => {
                let (c0, c1) = (s.column(j).into_owned(), s.column(j + 1).into_owned());
                let s01 = c0.dot(&(a * &c1));
                let m11 = c1.dot(&(a * &c1));
                // Clear the (2,2) entry of the A-part.
                let t = -m11 / (2.0 * s01);
                let c1 = &c1 + &c0 * t;
                let s01 = c0.dot(&(a * &c1));
                let q = c1.dot(&(d * &c1));
                let tau = sign(q);
                let bscale = 1.0 / sqrt(q.abs());
                let ascale = tau / (s01 * bscale);
                s.set_column(j, &(&c0 * ascale));
                s.set_column(j + 1, &(&c1 * bscale));
            }
            Proto::Zero => {}
        }
    }
}

/// Block parameters read off `S^T A S` and `S^T D S`, one per unit.
fn read_blocks(a: &Matrix, d: &Matrix, s: &Matrix, units: &[(usize, Proto)]) -> Vec<BlockPair> {
    let ha = s.transpose() * a * s;
    let hd = s.transpose() * d * s;
    units
        .iter()
        .map(|&(j, kind)| match kind {
            Proto::TypeA => BlockPair::OneByOne {
                alpha: sign(ha[(j, j)]),
                delta: hd[(j, j)],
            },
            Proto::TypeB => BlockPair::OneByOne {
                alpha: 0.0,
                delta: sign(hd[(j, j)]),
            },
            Proto::Pair => {
                let tau = sign(hd[(j + 1, j + 1)]);
                BlockPair::TwoByTwo {
                    tau,
                    kappa: tau * 0.5 * (hd[(j, j + 1)] + hd[(j + 1, j)]),
                }
            }
            Proto::Zero => BlockPair::Zero,
        })
        .collect()
}

/// Newton sweeps `S <- S (I + X)` that cancel the coupling between blocks.
///
/// Cluster bases for nearby eigenvalues leak into each other by roughly
/// rounding error over the eigenvalue gap, which shows up as off-diagonal
/// blocks in `S^T A S` and `S^T D S`. For blocks `i != j` the first-order
/// conditions `A_i X_ij + X_ji^T A_j = -E^A_ij` (and the same for `D`) form a
/// small square system. Pairs inside one cluster make it singular and are
/// left alone; they are decoupled exactly by construction.
fn decouple(a: &Matrix, d: &Matrix, s: &mut Matrix, units: &[(usize, Proto)], blocks: &[BlockPair]) {
    let n = s.ncols();
    let (ha, hd) = assemble(blocks);
    let residual = |s: &Matrix| {
        let ea = s.transpose() * a * s - &ha;
        let ed = s.transpose() * d * s - &hd;
        (ea, ed)
    };
    let (mut ea, mut ed) = residual(s);
    let mut best = ea.norm().max(ed.norm());
    for _ in 0..3 {
        let mut x = Matrix::zeros(n, n);
        for (ui, &(i, pi)) in units.iter().enumerate() {
            for (uj, &(j, pj)) in units.iter().enumerate().skip(ui + 1) {
                if pi == Proto::Zero || pj == Proto::Zero {
                    continue;
                }
                let (ni, nj) = (blocks[ui].size(), blocks[uj].size());
                let (ai, di) = blocks[ui].parts();
                let (aj, dj) = blocks[uj].parts();
                let (eai, edi) = (ea.view((i, j), (ni, nj)), ed.view((i, j), (ni, nj)));
                // Unknowns: X_ij (ni x nj) then Y = X_ji^T (ni x nj), row-major.
                let k = ni * nj;
                let mut sys = Matrix::zeros(2 * k, 2 * k);
                let mut rhs = crate::linalg::Vector::zeros(2 * k);
                for (blk, (mi, mj, e)) in [(&ai, &aj, &eai), (&di, &dj, &edi)].into_iter().enumerate() {
                    for r in 0..ni {
                        for c in 0..nj {
                            let row = blk * k + r * nj + c;
                            rhs[row] = -e[(r, c)];
                            for q in 0..ni {
                                sys[(row, q * nj + c)] += mi[(r, q)];
                            }
                            for q in 0..nj {
                                sys[(row, k + r * nj + q)] += mj[(q, c)];
                            }
                        }
                    }
                }
                let Some(sol) = sys.lu().solve(&rhs) else { continue };
                if !sol.iter().all(|v| v.is_finite()) || sol.norm() > 1e-3 {
                    continue;
                }
                for r in 0..ni {
                    for c in 0..nj {
                        x[(i + r, j + c)] = sol[r * nj + c];
                        x[(j + c, i + r)] = sol[k + r * nj + c];
                    }
                }
            }
        }
        let trial = &*s + &*s * x;
        let (ta, td) = residual(&trial);
        let res = ta.norm().max(td.norm());
        if res.is_nan() || res >= best {
            break;
        }
        *s = trial;
        best = res;
        ea = ta;
        ed = td;
    }
}

/// Normalize the columns, read the block parameters, decouple the blocks,
/// and sort them.
fn finish(a: &Matrix, d: &Matrix, mut s: Matrix, protos: &[Proto], mu: f64, chains: usize) -> CanonicalForm {
    let n = a.nrows();
    // Units: (start column, kind).
    let mut units: Vec<(usize, Proto)> = Vec::new();
    let mut j = 0;
    while j < n {
        units.push((j, protos[j]));
        j += if protos[j] == Proto::Pair { 2 } else { 1 };
    }
    normalize(a, d, &mut s, &units);
    let first = read_blocks(a, d, &s, &units);
    decouple(a, d, &mut s, &units, &first);
    normalize(a, d, &mut s, &units);
    let mut keyed: Vec<(u8, usize, BlockPair)> = units
        .iter()
        .zip(read_blocks(a, d, &s, &units))
        .map(|(&(j, kind), blk)| {
            let rank = match kind {
                Proto::TypeA | Proto::TypeB => 0,
                Proto::Pair => 1,
                Proto::Zero => 2,
            };
            (rank, j, blk)
        })
        .collect();
    keyed.sort_by_key(|&(rank, j, _)| (rank, j));
    let mut permutation = Vec::with_capacity(n);
    let mut blocks = Vec::with_capacity(keyed.len());
    for &(_, j, blk) in &keyed {
        for k in 0..blk.size() {
            permutation.push(j + k);
        }
        blocks.push(blk);
    }
    let s = Matrix::from_fn(n, n, |r, k| s[(r, permutation[k])]);
    let (sv, _) = right_singular_sorted(&s);
    let condition = if n == 0 {
        1.0
    } else {
        sv[0] / sv[n - 1].max(f64::MIN_POSITIVE)
    };
    let ill_conditioned = condition > 1e10;
    if ill_conditioned {
        log::warn!("canonical congruence is ill-conditioned (cond {condition:e})");
    }
    let (ha, hd) = assemble(&blocks);
    let residual = (s.transpose() * a * &s - ha)
        .norm()
        .max((s.transpose() * d * &s - hd).norm());
    let zero_count = blocks.iter().filter(|b| matches!(b, BlockPair::Zero)).count();
    CanonicalForm {
        s,
        blocks,
        zero_count,
        permutation,
        mu,
        condition,
        ill_conditioned,
        two_by_two_chains: chains,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(v))
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn form(a: &Matrix, d: &Matrix) -> CanonicalForm {
        match canonicalize(a, d, &tol()).unwrap() {
            Canonicalization::Form(f) => f,
            Canonicalization::Diagnostic(g) => panic!("unexpected diagnostic {g:?}"),
        }
    }

    fn diagnostic(a: &Matrix, d: &Matrix) -> EarlyDiagnostic {
        match canonicalize(a, d, &tol()).unwrap() {
            Canonicalization::Diagnostic(g) => g,
            Canonicalization::Form(f) => panic!("unexpected form {:?}", f.blocks),
        }
    }

    pub(crate) fn worked_example_pair() -> (Matrix, Matrix) {
        let a = Matrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 2., 0., 0., 0., 0., 1.5],
        );
        let d = Matrix::from_row_slice(
            4,
            4,
            &[0., -1., 0., 0., -1., 1., 0., 0., 0., 0., -2., 0., 0., 0., 0., 2.],
        );
        (a, d)
    }

    #[test]
    fn worked_example_form() {
        let (a, d) = worked_example_pair();
        let f = form(&a, &d);
        assert!(f.residual_against(&a, &d) < 1e-8 * (1.0 + a.norm() + d.norm()));
        assert_eq!(f.one_by_one_count(), 2);
        assert_eq!(f.two_by_two_count(), 1);
        assert_eq!(f.zero_count, 0);
        let mut deltas: Vec<f64> = f
            .blocks
            .iter()
            .filter_map(|b| match *b {
                BlockPair::OneByOne { alpha, delta } => {
                    assert_eq!(alpha, 1.0);
                    Some(delta)
                }
                _ => None,
            })
            .collect();
        deltas.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((deltas[0] + 1.0).abs() < 1e-8);
        assert!((deltas[1] - 4.0 / 3.0).abs() < 1e-8);
        match f.blocks[2] {
            BlockPair::TwoByTwo { tau, kappa } => {
                assert_eq!(tau, 1.0);
                assert!((kappa + 1.0).abs() < 1e-8);
            }
            other => panic!("expected a 2x2 block, got {other:?}"),
        }
    }

    #[test]
    fn identity_and_swap() {
        let a = Matrix::identity(2, 2);
        let d = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = form(&a, &d);
        assert!(f.residual < 1e-10);
        let mut deltas: Vec<f64> = f
            .blocks
            .iter()
            .map(|b| match *b {
                BlockPair::OneByOne { alpha, delta } => {
                    assert_eq!(alpha, 1.0);
                    delta
                }
                _ => panic!("expected 1x1"),
            })
            .collect();
        deltas.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((deltas[0] + 1.0).abs() < 1e-12 && (deltas[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_a_with_swap_d_is_two_type_b_pairs() {
        let a = Matrix::zeros(2, 2);
        let d = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = form(&a, &d);
        assert!(f.residual < 1e-10);
        let mut deltas: Vec<f64> = f
            .blocks
            .iter()
            .map(|b| match *b {
                BlockPair::OneByOne { alpha, delta } => {
                    assert_eq!(alpha, 0.0);
                    delta
                }
                _ => panic!("expected 1x1"),
            })
            .collect();
        deltas.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(deltas, vec![-1.0, 1.0]);
    }

    #[test]
    fn striped_a_with_swap_d_is_type_b_large() {
        let a = diag(&[0.0, 1.0]);
        let d = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g = diagnostic(&a, &d);
        assert_eq!(g.issues, vec![DiagnosticKind::TypeBLarge(2)]);
    }

    #[test]
    fn diagonal_pairs_have_no_two_by_two_blocks() {
        let a = diag(&[1.0, -2.0, 0.0, 3.0]);
        let d = diag(&[2.0, 1.0, -1.0, 0.0]);
        let f = form(&a, &d);
        assert_eq!(f.two_by_two_count(), 0);
        assert!(f.residual < 1e-10);
    }

    #[test]
    fn zero_pairs_match_joint_null_space() {
        let a = diag(&[1.0, 0.0, 0.0]);
        let d = diag(&[2.0, 0.0, 0.0]);
        let f = form(&a, &d);
        assert_eq!(f.zero_count, 2);
        assert!(f.residual < 1e-10);
        assert!(matches!(f.blocks[2], BlockPair::Zero));
    }

    #[test]
    fn diagnostics() {
        let g = diagnostic(&diag(&[1.0, -1.0]), &Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        match g.issues[0] {
            DiagnosticKind::ComplexPair(re, im) => {
                // A^{-1} D = [[1,2],[-2,-1]] has eigenvalues ±i sqrt(3).
                assert!(re.abs() < 1e-8);
                assert!((im - 3f64.sqrt()).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
        let e3 = Matrix::from_row_slice(3, 3, &[0., 0., 1., 0., 1., 0., 1., 0., 0.]);
        let j = Matrix::from_row_slice(3, 3, &[2., 1., 0., 0., 2., 1., 0., 0., 2.]);
        let g = diagnostic(&e3, &(&e3 * j));
        assert_eq!(g.issues, vec![DiagnosticKind::JordanTooLarge(3)]);

        let a = Matrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.]);
        let d = Matrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., 1., 0., 0.]);
        let g = diagnostic(&a, &d);
        assert_eq!(g.issues, vec![DiagnosticKind::SingularPencil(3)]);
    }

    #[test]
    fn two_chains_are_flagged() {
        let mut a = Matrix::zeros(4, 4);
        let mut d = Matrix::zeros(4, 4);
        for (o, kappa) in [(0usize, -1.0), (2, -2.0)] {
            a[(o, o + 1)] = 1.0;
            a[(o + 1, o)] = 1.0;
            d[(o, o + 1)] = kappa;
            d[(o + 1, o)] = kappa;
            d[(o + 1, o + 1)] = 1.0;
        }
        let f = form(&a, &d);
        assert_eq!(f.two_by_two_chains, 2);
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn close_two_by_two_blocks_are_decoupled() {
        // Two Jordan pairs 1.5e-3 apart, scrambled by a fixed congruence.
        let mut ha = Matrix::zeros(4, 4);
        let mut hd = Matrix::zeros(4, 4);
        for (o, kappa) in [(0usize, -2.9496), (2, -2.9511)] {
            ha[(o, o + 1)] = 1.0;
            ha[(o + 1, o)] = 1.0;
            hd[(o, o + 1)] = kappa;
            hd[(o + 1, o)] = kappa;
            hd[(o + 1, o + 1)] = 1.0;
        }
        let t = Matrix::from_row_slice(
            4,
            4,
            &[1.2, -0.3, 0.5, 0.1, 0.4, 0.9, -0.7, 0.2, -0.6, 0.3, 1.1, -0.4, 0.2, 0.8, 0.3, 1.3],
        );
        let a = t.transpose() * ha * &t;
        let d = t.transpose() * hd * &t;
        let (a, d) = ((&a + a.transpose()) * 0.5, (&d + d.transpose()) * 0.5);
        let f = form(&a, &d);
        assert_eq!(f.two_by_two_count(), 2);
        assert!(f.residual < 1e-12 * (1.0 + a.norm() + d.norm()), "residual {:e}", f.residual);
    }
}
