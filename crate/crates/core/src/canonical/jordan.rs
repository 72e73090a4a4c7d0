//! Jordan structure of `C^{-1} D` for a nonsingular symmetric `C`.
//!
//! Eigenvalues are clustered, and the invariant subspace of each real
//! cluster is taken from the real Schur form. On that subspace the pencil is
//! analysed through the symmetric matrices `K = D - lambda C` and
//! `K C^{-1} K`. Their null spaces are the eigenspace and the order-two
//! generalized eigenspace of the cluster, so block sizes up to two are read
//! off from two rank computations. Larger blocks and complex clusters are
//! only detected, never expanded.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;

use super::chain::chain_canonical;
use super::CanonicalError;
use crate::linalg::{quasi_triangular_eigenvalues, real_schur, rcond_sym, sym_eig_unchecked, symmetrize, Matrix, SINGULAR_RCOND};
use crate::math::cabs;
use crate::problem::Tolerances;

/// Relative cutoff used for the rank tests on `K` and `K C^{-1} K`.
pub(crate) const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalue {
    Real(f64),
    /// `re ± i im`, reported once with `im > 0`.
    Complex { re: f64, im: f64 },
}

/// One eigenvalue together with the sizes of its Jordan blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub eigenvalue: Eigenvalue,
    /// Nonincreasing. Entries above 2 are lower bounds only: we stop at the
    /// first power whose null space exhausts the multiplicity and do not split
    /// the remaining multiplicity further.
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct JordanData {
    /// Jordan basis `V` with `V^{-1} (A^{-1} D) V = J`. Present only when every
    /// eigenvalue is real with blocks of size at most two.
    pub transform: Option<Matrix>,
    pub chains: Vec<Chain>,
    pub has_complex: bool,
    pub max_block: usize,
    /// Number of chains that contain a 2x2 block.
    pub two_by_two_chains: usize,
}

impl JordanData {
    /// `J` assembled from the chain list, in the column order of `transform`.
    pub fn jordan_matrix(&self) -> Matrix {
        let n: usize = self.chains.iter().map(|c| c.sizes.iter().sum::<usize>()).sum();
        let mut j = Matrix::zeros(n, n);
        let mut at = 0;
        for chain in &self.chains {
            let lambda = match chain.eigenvalue {
                Eigenvalue::Real(l) => l,
                Eigenvalue::Complex { re, .. } => re,
            };
            for &s in &chain.sizes {
                for k in 0..s {
                    j[(at + k, at + k)] = lambda;
                    if k + 1 < s {
                        j[(at + k, at + k + 1)] = 1.0;
                    }
                }
                at += s;
            }
        }
        j
    }
}

/// A real cluster whose blocks all have size one or two.
#[derive(Debug, Clone)]
pub(crate) struct RealCluster {
    pub lambda: f64,
    pub multiplicity: usize,
    pub twos: usize,
    /// Orthonormal basis of the generalized eigenspace (n x multiplicity).
    pub basis: Matrix,
}

impl RealCluster {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![2; self.twos];
        s.extend(core::iter::repeat_n(1, self.multiplicity - 2 * self.twos));
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ClusterIssue {
    Complex { re: f64, im: f64, multiplicity: usize },
    Large { lambda: f64, size: usize, multiplicity: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct PencilAnalysis {
    pub real: Vec<RealCluster>,
    pub issues: Vec<ClusterIssue>,
}

/// Chordal distance between eigenvalues `z1`, `z2` of `C^{-1} D` with
/// `C = A + mu D`, measured on the pencil `(A, D)`: the eigenvalue `z`
/// stands for the pair `(1 - mu z, z)`. The distance does not depend on the
/// shift, so a shift that compresses part of the spectrum cannot merge
/// eigenvalues that are well apart for `(A, D)`.
fn chordal(mu: f64, z1: Complex<f64>, z2: Complex<f64>) -> f64 {
    let norm = |z: Complex<f64>| {
        let w = Complex::new(1.0, 0.0) - z * mu;
        libm::hypot(cabs(w), cabs(z))
    };
    cabs(z1 - z2) / (norm(z1) * norm(z2))
}

/// Single-linkage clustering under the chordal distance.
fn cluster(values: &[Complex<f64>], mu: f64, tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if chordal(mu, values[i], values[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Null dimension of a symmetric matrix under an absolute threshold.
fn null_dim(m: &Matrix, thresh: f64) -> usize {
    sym_eig_unchecked(m)
        .eigenvalues
        .iter()
        .filter(|l| l.abs() <= thresh)
        .count()
}

/// Diagonal blocks (start, size) of a quasi-triangular matrix.
fn diagonal_blocks(t: &Matrix) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let size = if i + 1 < n && t[(i + 1, i)] != 0.0 { 2 } else { 1 };
        out.push((i, size));
        i += size;
    }
    out
}

/// Solve `A X - X B = R` for small blocks (sizes 1 or 2) by vectorization.
fn small_sylvester(a: &Matrix, b: &Matrix, r: &Matrix) -> Option<Matrix> {
    let (p, q) = r.shape();
    let k = p * q;
    let mut sys = Matrix::zeros(k, k);
    let mut rhs = crate::linalg::Vector::zeros(k);
    for i in 0..p {
        for j in 0..q {
            let row = i * q + j;
            rhs[row] = r[(i, j)];
            for l in 0..p {
                sys[(row, l * q + j)] += a[(i, l)];
            }
            for l in 0..q {
                sys[(row, i * q + l)] -= b[(l, j)];
            }
        }
    }
    let x = sys.lu().solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then(|| Matrix::from_fn(p, q, |i, j| x[i * q + j]))
}

/// Orthonormal basis of the invariant subspace of `M = Q T Q^T` that belongs
/// to the diagonal blocks in `member`.
///
/// `X` with `T X = X R` is built column block by column block: its rows on
/// the cluster are the identity and the other rows follow by back
/// substitution. Every division is by a difference between eigenvalues of
/// different clusters, so nearby clusters never leak into each other the
/// way they do in rank tests on the full space.
fn cluster_subspace(q: &Matrix, t: &Matrix, blocks: &[(usize, usize)], member: &[bool]) -> Option<Matrix> {
    let n = t.nrows();
    let cols: Vec<usize> = (0..blocks.len()).filter(|&b| member[b]).collect();
    let m: usize = cols.iter().map(|&b| blocks[b].1).sum();
    let mut x = Matrix::zeros(n, m);
    // R restricted to the cluster, indexed by global block rows.
    let mut r = Matrix::zeros(n, m);
    let mut at = 0;
    for &jb in &cols {
        let (j0, js) = blocks[jb];
        x.view_mut((j0, at), (js, js)).fill_with_identity();
        r.view_mut((j0, at), (js, js)).copy_from(&t.view((j0, j0), (js, js)));
        let rjj = t.view((j0, j0), (js, js)).into_owned();
        for kb in (0..jb).rev() {
            let (k0, ks) = blocks[kb];
            // (T X_J) on the rows of block K, without the K-K term.
            let mut tx = Matrix::zeros(ks, js);
            for &(l0, ls) in &blocks[kb + 1..=jb] {
                tx += t.view((k0, l0), (ks, ls)) * x.view((l0, at), (ls, js));
            }
            if member[kb] {
                r.view_mut((k0, at), (ks, js)).copy_from(&tx);
                continue;
            }
            // T_KK X_KJ - X_KJ R_JJ = sum_{I in cluster, K < I < J} X_KI R_IJ - tx
            let mut rhs = -tx;
            let mut at_i = 0;
            for &ib in &cols {
                let (i0, is) = blocks[ib];
                if ib > kb && ib < jb {
                    rhs += x.view((k0, at_i), (ks, is)) * r.view((i0, at), (is, js));
                }
                at_i += is;
            }
            let tkk = t.view((k0, k0), (ks, ks)).into_owned();
            let sol = small_sylvester(&tkk, &rjj, &rhs)?;
            x.view_mut((k0, at), (ks, js)).copy_from(&sol);
        }
        at += js;
    }
    let v = q * x;
    v.iter().all(|z| z.is_finite()).then(|| v.qr().q())
}

enum ClusterOutcome {
    Real(RealCluster),
    Issue(ClusterIssue),
    Inconsistent,
}

fn analyze_real_cluster(c: &Matrix, d: &Matrix, w: Matrix, lambda: f64) -> ClusterOutcome {
    let m = w.ncols();
    let scale = d.norm() + lambda.abs() * c.norm();
    let k = symmetrize(&(d - c * lambda));
    // The pencil restricted to the cluster: only its own eigenvalues remain.
    let cw = symmetrize(&(w.transpose() * c * &w));
    let kw = symmetrize(&(w.transpose() * &k * &w));
    let Some(cw_inv) = cw.clone().try_inverse() else {
        return ClusterOutcome::Inconsistent;
    };
    let thresh1 = RANK_TOL * scale.max(f64::MIN_POSITIVE);
    let g = null_dim(&kw, thresh1);
    if g == 0 {
        return ClusterOutcome::Inconsistent;
    }
    if g == m {
        return ClusterOutcome::Real(RealCluster {
            lambda,
            multiplicity: m,
            twos: 0,
            basis: w,
        });
    }
    let kinv = &cw_inv * &kw;
    let norm_inv = cw_inv.norm();
    let thresh2 = RANK_TOL * (scale * scale * norm_inv).max(f64::MIN_POSITIVE);
    let k2 = symmetrize(&(&kw * &kinv));
    let d2 = null_dim(&k2, thresh2);
    if d2 < g {
        return ClusterOutcome::Inconsistent;
    }
    if d2 == m {
        if 2 * (m - g) > m {
            return ClusterOutcome::Inconsistent;
        }
        return ClusterOutcome::Real(RealCluster {
            lambda,
            multiplicity: m,
            twos: m - g,
            basis: w,
        });
    }
    // Some block is larger than two: find the first power that exhausts m.
    let mut kp = k2;
    let mut thresh = thresh2;
    for p in 3..=m.max(3) {
        kp = symmetrize(&(&kp * &kinv));
        thresh *= scale * norm_inv;
        if null_dim(&kp, thresh.max(f64::MIN_POSITIVE)) >= m {
            return ClusterOutcome::Issue(ClusterIssue::Large {
                lambda,
                size: p,
                multiplicity: m,
            });
        }
    }
    ClusterOutcome::Issue(ClusterIssue::Large {
        lambda,
        size: m,
        multiplicity: m,
    })
}

/// Cluster the spectrum of `C^{-1} D`, `C = A + mu D`, and analyse every cluster.
pub(crate) fn analyze_pencil(
    c: &Matrix,
    d: &Matrix,
    mu: f64,
    tol: &Tolerances,
) -> Result<PencilAnalysis, CanonicalError> {
    let n = c.nrows();
    if n == 0 {
        return Ok(PencilAnalysis {
            real: Vec::new(),
            issues: Vec::new(),
        });
    }
    if rcond_sym(c) <= SINGULAR_RCOND {
        return Err(CanonicalError::SingularA);
    }
    let c_inv = c
        .clone()
        .try_inverse()
        .ok_or(CanonicalError::SingularA)?;
    let c_inv = symmetrize(&c_inv);
    let m = &c_inv * d;
    let (q, t) = real_schur(&m).ok_or(CanonicalError::NumericalBreakdown("eigenvalue iteration did not converge"))?;
    let eigs = quasi_triangular_eigenvalues(&t);
    let blocks = diagonal_blocks(&t);

    let mut radii = vec![tol.cluster, 1e-4, 1e-3, 1e-7, 1e-9];
    radii.dedup();
    'radius: for radius in radii {
        let groups = cluster(&eigs, mu, radius);
        let mut real = Vec::new();
        let mut issues = Vec::new();
        for g in &groups {
            let mult = g.len();
            let mean = g.iter().map(|&i| eigs[i]).sum::<Complex<f64>>() / mult as f64;
            if chordal(mu, mean, mean.conj()) > radius {
                if mean.im > 0.0 {
                    issues.push(ClusterIssue::Complex {
                        re: mean.re,
                        im: mean.im,
                        multiplicity: mult,
                    });
                }
                continue;
            }
            let member: Vec<bool> = blocks.iter().map(|&(i, _)| g.contains(&i)).collect();
            let covered: usize = blocks.iter().zip(&member).filter(|(_, &m)| m).map(|(b, _)| b.1).sum();
            let subspace = if covered == mult { cluster_subspace(&q, &t, &blocks, &member) } else { None };
            let Some(w) = subspace else {
                log::debug!("no invariant subspace for the cluster at lambda = {} (radius {radius:e})", mean.re);
                continue 'radius;
            };
            match analyze_real_cluster(c, d, w, mean.re) {
                ClusterOutcome::Real(rc) => real.push(rc),
                ClusterOutcome::Issue(i) => issues.push(i),
                ClusterOutcome::Inconsistent => {
                    log::debug!("inconsistent cluster at lambda = {} (radius {radius:e})", mean.re);
                    continue 'radius;
                }
            }
        }
        real.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(core::cmp::Ordering::Equal));
        return Ok(PencilAnalysis { real, issues });
    }
    Err(CanonicalError::NumericalBreakdown("eigenvalue clusters are inconsistent at every radius"))
}

/// Jordan structure of `A^{-1} D` for nonsingular `A`.
pub fn jordan_structure(a: &Matrix, d: &Matrix, tol: &Tolerances) -> Result<JordanData, CanonicalError> {
    super::check_pair(a, d, tol)?;
    let analysis = analyze_pencil(a, d, 0.0, tol)?;
    let mut chains = Vec::new();
    let mut has_complex = false;
    let mut max_block = 0;
    for rc in &analysis.real {
        let sizes = rc.sizes();
        max_block = max_block.max(sizes[0]);
        chains.push(Chain {
            eigenvalue: Eigenvalue::Real(rc.lambda),
            sizes,
        });
    }
    for issue in &analysis.issues {
        match *issue {
            ClusterIssue::Complex { re, im, multiplicity } => {
                has_complex = true;
                max_block = max_block.max(1);
                chains.push(Chain {
                    eigenvalue: Eigenvalue::Complex { re, im },
                    sizes: vec![1; multiplicity],
                });
            }
            ClusterIssue::Large {
                lambda,
                size,
                multiplicity,
            } => {
                max_block = max_block.max(size);
                let mut sizes = vec![size];
                let mut rest = multiplicity.saturating_sub(size);
                while rest > 0 {
                    let s = rest.min(size);
                    sizes.push(s);
                    rest -= s;
                }
                chains.push(Chain {
                    eigenvalue: Eigenvalue::Real(lambda),
                    sizes,
                });
            }
        }
    }
    let two_by_two_chains = chains.iter().filter(|c| c.sizes.contains(&2)).count();
    let transform = if analysis.issues.is_empty() {
        let n = a.nrows();
        let mut v = Matrix::zeros(n, n);
        let mut at = 0;
        for rc in &analysis.real {
            let ai = rc.basis.transpose() * a * &rc.basis;
            let di = rc.basis.transpose() * d * &rc.basis;
            let form = chain_canonical(&ai, &di, rc.lambda, &rc.sizes(), tol)?;
            let cols = &rc.basis * &form.u;
            v.view_mut((0, at), (n, rc.multiplicity)).copy_from(&cols);
            at += rc.multiplicity;
        }
        Some(v)
    } else {
        None
    };
    Ok(JordanData {
        transform,
        chains,
        has_complex,
        max_block,
        two_by_two_chains,
    })
}
