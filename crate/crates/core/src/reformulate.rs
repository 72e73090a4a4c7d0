//! From the canonical form to the cone program and back.
//!
//! In canonical coordinates `u` (with `x = S u`) the objective and constraint
//! split over the blocks. A 2x2 block with `A`-part `tau E` carries a linear
//! term `b_odd u_1 + b_even u_2` that a translation removes, after which
//! `z = tau u_1 u_2` is the only thing the constraint sees. Minimizing the
//! block's objective over `u_2` for fixed `z` leaves `zeta z - e_even^2 / 2`
//! when `tau = 1` and the odd linear term vanishes. The 1x1 blocks become
//! rotated cones `x_i^2 / 2 <= y_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::canonical::{BlockPair, CanonicalForm};
use crate::classify::block_unattained;
use crate::dual::DualSpec;
use crate::linalg::{minimize_quadratic, pseudoinverse, sym_eig_unchecked, Matrix, Vector};
use crate::math::sqrt;
use crate::problem::{ConstraintKind, GtrsProblem, Tolerances};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReformulateError {
    #[error("2x2 block {block} has a nonzero odd linear term {value:e}")]
    OddLinearTermNonzero { block: usize, value: f64 },
    #[error("2x2 block {block} has tau = -1")]
    NegativeTau { block: usize },
    #[error("no sign pattern lifts the cone slack without breaking feasibility")]
    LiftingFailed,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Restriction of the problem to an affine set `x0 + basis w`.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub x0: Vector,
    pub basis: Matrix,
    pub d_red: Matrix,
    pub e_red: Vector,
    /// Objective value at `x0`.
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub enum ReducedOutcome {
    Optimal { value: f64, x: Vector },
    /// `x0 + M direction` drives the objective to minus infinity.
    Unbounded { x0: Vector, direction: Vector },
}

impl Reduced {
    pub fn new(p: &GtrsProblem, x0: Vector, basis: Matrix) -> Self {
        let d_red = basis.transpose() * &p.d * &basis;
        let e_red = basis.transpose() * (&p.d * &x0 + &p.e);
        let offset = p.objective(&x0);
        Self {
            x0,
            basis,
            d_red,
            e_red,
            offset,
        }
    }

    pub fn solve(&self, tol: f64) -> ReducedOutcome {
        if let Some((value, w)) = minimize_quadratic(&self.d_red, &self.e_red, self.offset, tol) {
            return ReducedOutcome::Optimal {
                value,
                x: &self.x0 + &self.basis * w,
            };
        }
        let eig = sym_eig_unchecked(&self.d_red);
        let scale = eig.spectral_radius().max(self.e_red.norm()).max(1.0);
        let dir_w = if eig.min() < -tol * scale {
            let mut v = eig.eigenvectors.column(0).into_owned();
            if v.dot(&self.e_red) > 0.0 {
                v.neg_mut();
            }
            v
        } else {
            // Linear term outside the range of the reduced Hessian.
            let null = eig.null_basis(tol * scale);
            -(&null * (null.transpose() * &self.e_red))
        };
        ReducedOutcome::Unbounded {
            x0: self.x0.clone(),
            direction: &self.basis * dir_w,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Preprocessed {
    Proceed,
    Infeasible,
    ReducedUnconstrained(Reduced),
}

/// Slater check for the inequality form.
///
/// With `A` positive semidefinite and `b` in its range,
/// `h(x) = 1/2 (x + A^+ b)^T A (x + A^+ b) + k` with `k = c - b^T A^+ b / 2`.
/// A positive `k` leaves nothing feasible, `k = 0` leaves the affine set
/// `-A^+ b + null(A)`, and anything else has a strictly feasible point.
pub fn preprocess(p: &GtrsProblem, tol: &Tolerances) -> Preprocessed {
    let (c, _, _) = p.constraint.bounds();
    let eig = sym_eig_unchecked(&p.a);
    let scale = eig.spectral_radius().max(1.0);
    if eig.min() < -tol.eig * scale {
        return Preprocessed::Proceed;
    }
    let rank_tol = tol.eig * scale;
    let a_pinv = pseudoinverse(&p.a, rank_tol);
    let x0 = -(&a_pinv * &p.b);
    let resid = &p.a * &x0 + &p.b;
    if resid.norm() > 1e-8 * (1.0 + p.b.norm()) {
        return Preprocessed::Proceed;
    }
    let k = c + 0.5 * p.b.dot(&x0);
    let k_tol = 1e-9 * (1.0 + c.abs() + p.b.dot(&x0).abs());
    if k > k_tol {
        Preprocessed::Infeasible
    } else if k >= -k_tol {
        let basis = eig.null_basis(rank_tol);
        Preprocessed::ReducedUnconstrained(Reduced::new(p, x0, basis))
    } else {
        Preprocessed::Proceed
    }
}

/// Effect of translating one 2x2 block so its `b`-part vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResult {
    pub e_odd: f64,
    pub e_even: f64,
    /// Added to the constraint constant.
    pub dc: f64,
    /// Added to the objective.
    pub d0: f64,
    /// `u' = u + shift`
    pub shift: (f64, f64),
}

/// Translate `u' = u + tau (b_even, b_odd)` on a block `(tau E, tau E J(kappa, 2))`.
pub fn shift_cross_b(tau: f64, kappa: f64, b: (f64, f64), e: (f64, f64)) -> ShiftResult {
    let (b1, b2) = b;
    let (e1, e2) = e;
    ShiftResult {
        e_odd: e1 - kappa * b1,
        e_even: e2 - b1 - kappa * b2,
        dc: -tau * b1 * b2,
        d0: -e1 * tau * b2 - e2 * tau * b1 + tau * kappa * b1 * b2 + 0.5 * tau * b1 * b1,
        shift: (tau * b2, tau * b1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairData {
    pub tau: f64,
    pub kappa: f64,
    pub b_odd: f64,
    pub b_even: f64,
    /// Linear objective terms after the shift.
    pub e_odd: f64,
    pub e_even: f64,
    pub shift: (f64, f64),
    /// Column of `u_1` in `S`.
    pub col: usize,
}

impl PairData {
    /// Cost coefficient of `z = tau u_1 u_2` in the reduced problem.
    pub fn zeta(&self) -> f64 {
        self.kappa
    }
}

/// Zero pairs whose constraint coefficients do not vanish: the constraint
/// sees them only through `v = b_Z^T w`, which acts like one more `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVar {
    pub zeta: f64,
    pub b_zero: Vector,
}

/// Objective and constraint expressed block by block in canonical coordinates.
#[derive(Debug, Clone)]
pub struct CanonicalProblem {
    pub kind: ConstraintKind,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub pairs: Vec<PairData>,
    pub linear: Option<LinearVar>,
    /// Constraint constant after the shifts.
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    /// `-sum(e_even^2) / 2`
    pub c0: f64,
    /// Sum of the shift offsets `d0`.
    pub obj_offset: f64,
    pub s: Matrix,
    pub one_cols: Vec<usize>,
    pub zero_cols: Vec<usize>,
    /// A direction (in original coordinates) that leaves the constraint
    /// unchanged and lowers the objective linearly, if the zero pairs have one.
    pub free_direction: Option<Vector>,
    /// Scale for the coefficient zero tests.
    pub zero_tol: f64,
}

impl CanonicalProblem {
    pub fn new(p: &GtrsProblem, cf: &CanonicalForm, tol: &Tolerances) -> Result<Self, ReformulateError> {
        let n = p.dim();
        if cf.s.nrows() != n || cf.dim() != n {
            return Err(ReformulateError::DimensionMismatch {
                expected: n,
                found: cf.dim(),
            });
        }
        let e_hat = cf.s.transpose() * &p.e;
        let b_hat = cf.s.transpose() * &p.b;
        let (offset, lower, upper) = p.constraint.bounds();
        let zero_tol = tol.zero * (1.0 + e_hat.amax() + b_hat.amax());
        let mut cp = CanonicalProblem {
            kind: p.kind(),
            alpha: Vec::new(),
            delta: Vec::new(),
            b: Vec::new(),
            e: Vec::new(),
            pairs: Vec::new(),
            linear: None,
            c: offset,
            lower,
            upper,
            c0: 0.0,
            obj_offset: 0.0,
            s: cf.s.clone(),
            one_cols: Vec::new(),
            zero_cols: Vec::new(),
            free_direction: None,
            zero_tol,
        };
        for (blk, at) in cf.blocks.iter().zip(cf.offsets()) {
            match *blk {
                BlockPair::OneByOne { alpha, delta } => {
                    cp.alpha.push(alpha);
                    cp.delta.push(delta);
                    cp.b.push(b_hat[at]);
                    cp.e.push(e_hat[at]);
                    cp.one_cols.push(at);
                }
                BlockPair::TwoByTwo { tau, kappa } => {
                    let bb = (b_hat[at], b_hat[at + 1]);
                    let sh = shift_cross_b(tau, kappa, bb, (e_hat[at], e_hat[at + 1]));
                    cp.c += sh.dc;
                    cp.obj_offset += sh.d0;
                    cp.pairs.push(PairData {
                        tau,
                        kappa,
                        b_odd: bb.0,
                        b_even: bb.1,
                        e_odd: sh.e_odd,
                        e_even: sh.e_even,
                        shift: sh.shift,
                        col: at,
                    });
                }
                BlockPair::Zero => cp.zero_cols.push(at),
                BlockPair::Diagnostic(_) => {}
            }
        }
        cp.c0 = cp.pairs.iter().map(|q| -0.5 * q.e_even * q.e_even).sum();

        if !cp.zero_cols.is_empty() {
            let bz = Vector::from_iterator(cp.zero_cols.len(), cp.zero_cols.iter().map(|&j| b_hat[j]));
            let ez = Vector::from_iterator(cp.zero_cols.len(), cp.zero_cols.iter().map(|&j| e_hat[j]));
            let residual = if bz.norm() <= zero_tol {
                ez
            } else {
                let zeta = ez.dot(&bz) / bz.norm_squared();
                let r = &ez - &bz * zeta;
                cp.linear = Some(LinearVar { zeta, b_zero: bz });
                r
            };
            if residual.norm() > zero_tol {
                let mut u = Vector::zeros(n);
                for (k, &j) in cp.zero_cols.iter().enumerate() {
                    u[j] = -residual[k];
                }
                cp.free_direction = Some(&cp.s * u);
            }
        }
        Ok(cp)
    }

    pub fn l(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_zero(&self, v: f64) -> bool {
        v.abs() <= self.zero_tol
    }

    /// `zeta` entries of the cone program: the pairs, then the linear variable.
    pub fn zetas(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.pairs.iter().map(PairData::zeta).collect();
        if let Some(lin) = &self.linear {
            z.push(lin.zeta);
        }
        z
    }

    /// Even linear terms per `z` entry; the linear variable counts as nonzero.
    pub fn e_evens(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pairs.iter().map(|p| p.e_even).collect();
        if self.linear.is_some() {
            v.push(f64::INFINITY);
        }
        v
    }

    /// Canonical coordinates of an original point.
    pub fn to_canonical(&self, x: &Vector) -> Option<Vector> {
        self.s.clone().lu().solve(x)
    }
}

/// The cone program in the variables `(x, y, z)`:
///
/// ```text
/// minimize   delta^T y + e^T x + zeta^T z + c0 + obj_offset
/// subject to lower <= alpha^T y + b^T x + 1^T z + c <= upper
///            x_i^2 / 2 <= y_i
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SocpProblem {
    pub kind: ConstraintKind,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub zeta: Vec<f64>,
    pub e_even: Vec<f64>,
    pub z_attainable: Vec<bool>,
    pub c: f64,
    pub c0: f64,
    pub obj_offset: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SocpProblem {
    pub fn l(&self) -> usize {
        self.alpha.len()
    }

    pub fn point(&self, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> PrimalPoint {
        PrimalPoint::evaluate(&DualSpec::from_socp(self), x, y, z)
    }
}

pub fn build_socp(cp: &CanonicalProblem) -> Result<SocpProblem, ReformulateError> {
    for (j, q) in cp.pairs.iter().enumerate() {
        if q.tau < 0.0 {
            return Err(ReformulateError::NegativeTau { block: j });
        }
        if !cp.is_zero(q.e_odd) {
            return Err(ReformulateError::OddLinearTermNonzero {
                block: j,
                value: q.e_odd,
            });
        }
    }
    let e_even = cp.e_evens();
    let z_attainable = e_even.iter().map(|&v| !cp.is_zero(v)).collect();
    let (lower, upper) = match cp.kind {
        ConstraintKind::Inequality => (f64::NEG_INFINITY, 0.0),
        ConstraintKind::Equality => (0.0, 0.0),
        ConstraintKind::Interval => (cp.lower, cp.upper),
    };
    Ok(SocpProblem {
        kind: cp.kind,
        alpha: cp.alpha.clone(),
        delta: cp.delta.clone(),
        b: cp.b.clone(),
        e: cp.e.clone(),
        zeta: cp.zetas(),
        e_even,
        z_attainable,
        c: cp.c,
        c0: cp.pairs.iter().map(|q| -0.5 * q.e_even * q.e_even).sum(),
        obj_offset: cp.obj_offset,
        lower,
        upper,
    })
}

/// A point of the cone program with its objective and constraint value.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    /// `alpha^T y + b^T x + 1^T z + c`
    pub constraint: f64,
}

impl PrimalPoint {
    pub fn evaluate(spec: &DualSpec, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Self {
        let mut objective = spec.c0;
        let mut constraint = spec.c;
        for i in 0..x.len() {
            objective += spec.delta[i] * y[i] + spec.e[i] * x[i];
            constraint += spec.alpha[i] * y[i] + spec.b[i] * x[i];
        }
        for (j, zj) in z.iter().enumerate() {
            objective += spec.zeta[j] * zj;
            constraint += zj;
        }
        Self {
            x,
            y,
            z,
            objective,
            constraint,
        }
    }

    /// Largest cone violation `x_i^2 / 2 - y_i`, clipped at zero.
    pub fn cone_violation(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| 0.5 * x * x - y)
            .fold(0.0, f64::max)
    }
}

/// Original-space point built from a cone solution.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub x: Vector,
    pub attained: bool,
    /// Indices into the `z` entries whose infimum is not attained.
    pub unattained: Vec<usize>,
    /// Magnitude used on the unattained blocks.
    pub m: Option<f64>,
}

/// Replace every slack cone `y_i > x_i^2 / 2` by `x_i = ±sqrt(2 y_i)`. Only
/// the `b x` and `e x` terms move; the sign pattern is chosen to keep the
/// linear constraint satisfied without raising the objective.
fn lift(point: &PrimalPoint, socp: &SocpProblem) -> Result<PrimalPoint, ReformulateError> {
    let slack: Vec<usize> = (0..point.x.len())
        .filter(|&i| point.y[i] > 0.5 * point.x[i] * point.x[i] + 1e-12 * (1.0 + point.y[i].abs()))
        .collect();
    if slack.is_empty() {
        return Ok(point.clone());
    }
    let spec = DualSpec::from_socp(socp);
    let feas_tol = 1e-8 * (1.0 + point.constraint.abs() + socp.c.abs());
    let obj_tol = 1e-9 * (1.0 + point.objective.abs());
    let try_pattern = |signs: &dyn Fn(usize) -> f64| -> PrimalPoint {
        let mut x = point.x.clone();
        for (k, &i) in slack.iter().enumerate() {
            x[i] = signs(k) * sqrt(2.0 * point.y[i]);
        }
        let y = x.iter().map(|v| 0.5 * v * v).collect();
        PrimalPoint::evaluate(&spec, x, y, point.z.clone())
    };
    let ok = |p: &PrimalPoint| {
        p.constraint <= socp.upper + feas_tol
            && p.constraint >= socp.lower - feas_tol
            && p.objective <= point.objective + obj_tol
    };
    let s = slack.len();
    if s <= 20 {
        let mut best: Option<PrimalPoint> = None;
        for mask in 0u32..(1u32 << s) {
            let cand = try_pattern(&|k| if mask >> k & 1 == 0 { 1.0 } else { -1.0 });
            if ok(&cand) {
                let better = best.as_ref().is_none_or(|b| cand.objective < b.objective);
                if better {
                    best = Some(cand);
                }
            }
        }
        best.ok_or(ReformulateError::LiftingFailed)
    } else {
        // Greedy: each sign opposes the running change in the constraint.
        let mut signs = vec![1.0; s];
        let mut drift = 0.0;
        for (k, &i) in slack.iter().enumerate() {
            let r = sqrt(2.0 * point.y[i]);
            let plus = socp.b[i] * (r - point.x[i]);
            let minus = socp.b[i] * (-r - point.x[i]);
            if (drift + minus).abs() < (drift + plus).abs() {
                signs[k] = -1.0;
                drift += minus;
            } else {
                drift += plus;
            }
        }
        let cand = try_pattern(&|k| signs[k]);
        if ok(&cand) {
            Ok(cand)
        } else {
            Err(ReformulateError::LiftingFailed)
        }
    }
}

/// Map a cone solution to the original coordinates.
///
/// Attained 2x2 blocks use `u_2' = -e_even`, `u_1' = z / u_2'`. Blocks whose
/// infimum is not attained get `u_2' = 1/M`, `u_1' = z M` with
/// `M = sqrt(1/eps')`, which costs `eps' / 2` in the objective, where `eps'`
/// splits `eps` evenly over those blocks.
pub fn recover_x(
    point: &PrimalPoint,
    cp: &CanonicalProblem,
    socp: &SocpProblem,
    eps: f64,
) -> Result<Recovered, ReformulateError> {
    let l = cp.l();
    if point.x.len() != l || point.z.len() != socp.zeta.len() {
        return Err(ReformulateError::DimensionMismatch {
            expected: l,
            found: point.x.len(),
        });
    }
    let lifted = lift(point, socp)?;
    let n = cp.s.nrows();
    let mut u = Vector::zeros(n);
    for (i, &col) in cp.one_cols.iter().enumerate() {
        u[col] = lifted.x[i];
    }
    let unattained: Vec<usize> = (0..cp.pairs.len())
        .filter(|&j| {
            block_unattained(
                cp.kind,
                socp.zeta[j],
                socp.e_even[j],
                lifted.z[j],
                cp.zero_tol,
            )
        })
        .collect();
    let m = if unattained.is_empty() {
        None
    } else {
        let eps_each = eps / unattained.len() as f64;
        Some(sqrt(1.0 / eps_each))
    };
    for (j, q) in cp.pairs.iter().enumerate() {
        let z = lifted.z[j];
        let (odd, even) = if unattained.contains(&j) {
            let m = m.unwrap_or(1.0);
            (z * m, 1.0 / m)
        } else if !cp.is_zero(q.e_even) {
            let even = -q.e_even;
            (z / even, even)
        } else {
            // Attained with z = 0 (or z dropped where only the sign matters).
            (0.0, 0.0)
        };
        u[q.col] = odd - q.shift.0;
        u[q.col + 1] = even - q.shift.1;
    }
    if let Some(lin) = &cp.linear {
        let v = lifted.z[cp.pairs.len()];
        let w = &lin.b_zero * (v / lin.b_zero.norm_squared());
        for (k, &col) in cp.zero_cols.iter().enumerate() {
            u[col] = w[k];
        }
    }
    Ok(Recovered {
        x: &cp.s * u,
        attained: unattained.is_empty(),
        unattained,
        m,
    })
}
