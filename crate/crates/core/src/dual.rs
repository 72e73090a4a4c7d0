//! The one-dimensional concave dual of the cone reformulation.
//!
//! For a multiplier `t` on the linear constraint `lo <= H <= hi`, with
//! `H = sum(alpha_i y_i + b_i x_i) + sum(z_j) + c`, the dual function is
//!
//! ```text
//! rho(t) = t c - sigma(t) + c0 + sum_i h_i(t) + g(t)
//! h_i(t) = -(e_i + t b_i)^2 / (2 (delta_i + t alpha_i))
//! g(t)   = 0 if zeta_j + t = 0 for every j, -inf otherwise
//! ```
//!
//! where `sigma(t) = t hi` for `t >= 0` and `t lo` for `t < 0`. An inequality
//! constraint has `lo = -inf` (so `t >= 0`), an equality has `lo = hi = 0`,
//! and an interval keeps both bounds; `t > 0` prices the upper bound and
//! `t < 0` the lower one, so `t` stands for the pair `(max(-t, 0), max(t, 0))`.

use alloc::vec;
use alloc::vec::Vec;

use crate::problem::ConstraintKind;
use crate::reformulate::{PrimalPoint, SocpProblem};

/// Where the multiplier lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierDomain {
    /// `t >= 0`, constraint `H <= 0`.
    NonNegative,
    /// `t` free, constraint `H = 0`.
    Free,
    /// `t` free, constraint `lower <= H <= upper`.
    Interval { lower: f64, upper: f64 },
}

impl MultiplierDomain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            MultiplierDomain::NonNegative => (f64::NEG_INFINITY, 0.0),
            MultiplierDomain::Free => (0.0, 0.0),
            MultiplierDomain::Interval { lower, upper } => (lower, upper),
        }
    }

    pub fn for_kind(kind: ConstraintKind, lower: f64, upper: f64) -> Self {
        match kind {
            ConstraintKind::Inequality => MultiplierDomain::NonNegative,
            ConstraintKind::Equality => MultiplierDomain::Free,
            ConstraintKind::Interval => MultiplierDomain::Interval { lower, upper },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSpec {
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Whether moving `z_j` keeps the primal infimum attained. Residual
    /// allocation in [`primal_from_dual`] prefers these.
    pub z_attainable: Vec<bool>,
    pub c: f64,
    pub c0: f64,
    pub domain: MultiplierDomain,
}

impl DualSpec {
    pub fn from_socp(socp: &SocpProblem) -> Self {
        Self {
            alpha: socp.alpha.clone(),
            delta: socp.delta.clone(),
            b: socp.b.clone(),
            e: socp.e.clone(),
            zeta: socp.zeta.clone(),
            z_attainable: socp.z_attainable.clone(),
            c: socp.c,
            c0: socp.c0 + socp.obj_offset,
            domain: MultiplierDomain::for_kind(socp.kind, socp.lower, socp.upper),
        }
    }

    /// Spec without 2x2 blocks, convenient for small hand-built duals.
    pub fn diagonal(alpha: &[f64], delta: &[f64], b: &[f64], e: &[f64], c: f64, domain: MultiplierDomain) -> Self {
        Self {
            alpha: alpha.to_vec(),
            delta: delta.to_vec(),
            b: b.to_vec(),
            e: e.to_vec(),
            zeta: Vec::new(),
            z_attainable: Vec::new(),
            c,
            c0: 0.0,
            domain,
        }
    }

    fn l(&self) -> usize {
        self.alpha.len()
    }

    fn q_tol(&self, i: usize) -> f64 {
        1e-9 * (1.0 + self.alpha[i].abs() + self.delta[i].abs())
    }

    fn p_tol(&self, i: usize, t: f64) -> f64 {
        1e-9 * (1.0 + self.e[i].abs() + t.abs() * self.b[i].abs())
    }

    /// Common value of the `zeta` entries, or `None` when they differ.
    pub fn common_zeta(&self) -> Option<Option<f64>> {
        if self.zeta.is_empty() {
            return Some(None);
        }
        let mean = self.zeta.iter().sum::<f64>() / self.zeta.len() as f64;
        let ok = self
            .zeta
            .iter()
            .all(|z| (z - mean).abs() <= 1e-7 * (1.0 + mean.abs()));
        if ok {
            Some(Some(mean))
        } else {
            None
        }
    }
}

/// `rho(t)` including the `-inf` cases.
pub fn dual_value(spec: &DualSpec, t: f64) -> f64 {
    if matches!(spec.domain, MultiplierDomain::NonNegative) && t < 0.0 {
        return f64::NEG_INFINITY;
    }
    match spec.common_zeta() {
        None => return f64::NEG_INFINITY,
        Some(Some(z)) if (z + t).abs() > 1e-7 * (1.0 + z.abs()) => return f64::NEG_INFINITY,
        _ => {}
    }
    let (lo, hi) = spec.domain.bounds();
    let sigma = if t >= 0.0 { t * hi } else { t * lo };
    let mut v = t * spec.c - sigma + spec.c0;
    for i in 0..spec.l() {
        let q = spec.delta[i] + t * spec.alpha[i];
        let p = spec.e[i] + t * spec.b[i];
        if q > spec.q_tol(i) {
            v -= p * p / (2.0 * q);
        } else if q >= -spec.q_tol(i) && p.abs() <= spec.p_tol(i, t) {
            // free coordinate, contributes nothing
        } else {
            return f64::NEG_INFINITY;
        }
    }
    v
}

/// `rho'(t)` in the open domain, without the `g` term.
fn dual_slope(spec: &DualSpec, t: f64, side_slope: f64) -> f64 {
    let mut g = side_slope;
    for i in 0..spec.l() {
        let q = spec.delta[i] + t * spec.alpha[i];
        let p = spec.e[i] + t * spec.b[i];
        if q > 0.0 {
            g += -p * spec.b[i] / q + spec.alpha[i] * p * p / (2.0 * q * q);
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStatus {
    Finite,
    /// Two `zeta` entries differ: the primal is unbounded.
    UnequalZetas,
    /// No multiplier gives a finite value: the primal is unbounded.
    EmptyDomain,
    /// The dual grows without bound: the primal is infeasible.
    UnboundedAbove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    pub status: DualStatus,
    /// Maximizer `t*` (see the module docs for the interval reading).
    pub nu: f64,
    pub value: f64,
    /// Closed hull of `{t : rho(t) > -inf}` before the `g` restriction.
    pub domain: (f64, f64),
    pub iterations: usize,
    /// Blocks with `delta_i + t* alpha_i = 0`.
    pub active: Vec<bool>,
}

impl DualResult {
    fn infeasible(status: DualStatus, domain: (f64, f64), l: usize) -> Self {
        Self {
            status,
            nu: f64::NAN,
            value: if status == DualStatus::UnboundedAbove {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            domain,
            iterations: 0,
            active: vec![false; l],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.status == DualStatus::Finite
    }

    /// Multipliers `(nu_1, nu_2)` of the lower and upper bounds.
    pub fn nu_pair(&self) -> (f64, f64) {
        ((-self.nu).max(0.0), self.nu.max(0.0))
    }
}

/// Interval of `t` on which every `delta_i + t alpha_i >= 0`, with flags for
/// whether each endpoint can be included (the numerator has to vanish there).
fn feasible_interval(spec: &DualSpec) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..spec.l() {
        let (a, d) = (spec.alpha[i], spec.delta[i]);
        let tol = spec.q_tol(i);
        if a.abs() <= tol {
            if d < -tol {
                return None;
            }
            if d.abs() <= tol {
                // Both zero: e_i + t b_i must vanish.
                let (e, b) = (spec.e[i], spec.b[i]);
                if b.abs() > 1e-12 {
                    let t = -e / b;
                    lo = lo.max(t);
                    hi = hi.min(t);
                } else if e.abs() > 1e-9 {
                    return None;
                }
            }
        } else if a > 0.0 {
            lo = lo.max(-d / a);
        } else {
            hi = hi.min(-d / a);
        }
    }
    if matches!(spec.domain, MultiplierDomain::NonNegative) {
        lo = lo.max(0.0);
    }
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()).min(1e300));
    if lo > hi + slack {
        None
    } else {
        Some((lo, hi.max(lo)))
    }
}

/// Largest `t` accepted before declaring the dual unbounded above.
const T_CAP: f64 = 1e12;

struct SideResult {
    t: f64,
    value: f64,
    iterations: usize,
    unbounded: bool,
}

/// Maximize the concave `rho` on `[lo, hi]` using the given linear slope.
fn maximize_side(spec: &DualSpec, lo: f64, hi: f64, side_slope: f64, rel_tol: f64) -> Option<SideResult> {
    let eval = |t: f64| dual_value(spec, t);
    let slope = |t: f64| dual_slope(spec, t, side_slope);
    if lo.is_finite() && hi - lo <= 1e-14 * (1.0 + lo.abs()) {
        let v = eval(lo);
        return v.is_finite().then_some(SideResult {
            t: lo,
            value: v,
            iterations: 0,
            unbounded: false,
        });
    }
    let width = hi - lo;
    let step = |t: f64| (1e-7 * (1.0 + t.abs())).min(width / 4.0);
    let mut iterations = 0;

    // Left bracket: a point with positive slope, or the left endpoint itself.
    let mut a;
    if lo.is_finite() {
        a = lo;
        let probe = lo + step(lo);
        if slope(probe) <= 0.0 {
            let v = eval(lo);
            if v.is_finite() {
                return Some(SideResult {
                    t: lo,
                    value: v,
                    iterations,
                    unbounded: false,
                });
            }
            a = probe;
        }
    } else {
        let mut t = if hi.is_finite() { hi - 1.0 } else { 0.0 };
        let mut span = 1.0;
        loop {
            iterations += 1;
            if slope(t) > 0.0 {
                break;
            }
            if t.abs() > T_CAP {
                return Some(SideResult {
                    t,
                    value: f64::INFINITY,
                    iterations,
                    unbounded: true,
                });
            }
            span *= 2.0;
            t = if hi.is_finite() { hi - span } else { -span };
        }
        a = t;
    }
    // Right bracket: a point with negative slope, or the right endpoint.
    let mut b;
    if hi.is_finite() {
        b = hi;
        let probe = hi - step(hi);
        if slope(probe) >= 0.0 {
            let v = eval(hi);
            if v.is_finite() {
                return Some(SideResult {
                    t: hi,
                    value: v,
                    iterations,
                    unbounded: false,
                });
            }
            b = probe;
        }
    } else {
        let mut t = a.max(0.0) + 1.0;
        let mut span = 1.0;
        loop {
            iterations += 1;
            if slope(t) < 0.0 {
                break;
            }
            if t.abs() > T_CAP {
                return Some(SideResult {
                    t,
                    value: f64::INFINITY,
                    iterations,
                    unbounded: true,
                });
            }
            span *= 2.0;
            t = a.max(0.0) + span;
        }
        b = t;
    }
    // Bisection on the sign of the slope.
    for _ in 0..200 {
        if b - a <= rel_tol * (1.0 + a.abs() + b.abs()) {
            break;
        }
        iterations += 1;
        let m = 0.5 * (a + b);
        if slope(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let t = 0.5 * (a + b);
    let v = eval(t);
    v.is_finite().then_some(SideResult {
        t,
        value: v,
        iterations,
        unbounded: false,
    })
}

fn active_flags(spec: &DualSpec, t: f64) -> Vec<bool> {
    (0..spec.l())
        .map(|i| (spec.delta[i] + t * spec.alpha[i]).abs() <= spec.q_tol(i))
        .collect()
}

/// Maximize `rho` over its domain.
pub fn maximize_dual(spec: &DualSpec) -> DualResult {
    maximize_dual_with_tol(spec, 1e-10)
}

pub fn maximize_dual_with_tol(spec: &DualSpec, rel_tol: f64) -> DualResult {
    let l = spec.l();
    let Some((lo, hi)) = feasible_interval(spec) else {
        return DualResult::infeasible(DualStatus::EmptyDomain, (f64::NAN, f64::NAN), l);
    };
    let zeta = match spec.common_zeta() {
        None => return DualResult::infeasible(DualStatus::UnequalZetas, (lo, hi), l),
        Some(z) => z,
    };
    if let Some(z) = zeta {
        let mut t = -z;
        if matches!(spec.domain, MultiplierDomain::NonNegative) && t < 0.0 && t > -1e-7 * (1.0 + z.abs()) {
            t = 0.0;
        }
        let v = dual_value(spec, t);
        if !v.is_finite() {
            return DualResult::infeasible(DualStatus::EmptyDomain, (lo, hi), l);
        }
        return DualResult {
            status: DualStatus::Finite,
            nu: t,
            value: v,
            domain: (lo, hi),
            iterations: 0,
            active: active_flags(spec, t),
        };
    }

    let (dlo, dhi) = spec.domain.bounds();
    let mut sides: Vec<(f64, f64, f64)> = Vec::with_capacity(2);
    match spec.domain {
        MultiplierDomain::NonNegative => sides.push((lo.max(0.0), hi, spec.c - dhi)),
        MultiplierDomain::Free => sides.push((lo, hi, spec.c)),
        MultiplierDomain::Interval { .. } => {
            if hi >= 0.0 {
                sides.push((lo.max(0.0), hi, spec.c - dhi));
            }
            if lo <= 0.0 {
                sides.push((lo, hi.min(0.0), spec.c - dlo));
            }
        }
    }
    let mut best: Option<SideResult> = None;
    let mut iterations = 0;
    for (a, b, s) in sides {
        if a > b {
            continue;
        }
        if let Some(r) = maximize_side(spec, a, b, s, rel_tol) {
            iterations += r.iterations;
            let better = match &best {
                None => true,
                Some(cur) => {
                    r.unbounded && !cur.unbounded
                        || (!cur.unbounded && r.value > cur.value + 1e-14 * (1.0 + cur.value.abs()))
                }
            };
            if better {
                best = Some(r);
            }
        }
    }
    match best {
        None => DualResult::infeasible(DualStatus::EmptyDomain, (lo, hi), l),
        Some(r) if r.unbounded => {
            let mut out = DualResult::infeasible(DualStatus::UnboundedAbove, (lo, hi), l);
            out.nu = r.t;
            out.iterations = iterations;
            out
        }
        Some(r) => DualResult {
            status: DualStatus::Finite,
            nu: r.t,
            value: r.value,
            domain: (lo, hi),
            iterations,
            active: active_flags(spec, r.t),
        },
    }
}

/// Same as [`maximize_dual`] for an interval spec; kept as a separate entry
/// point because the two one-sided problems are what the theory states.
pub fn maximize_interval_dual(spec: &DualSpec) -> DualResult {
    debug_assert!(matches!(spec.domain, MultiplierDomain::Interval { .. }));
    maximize_dual(spec)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoveryError {
    #[error("dual is not finite, no primal point to recover")]
    NotFinite,
    #[error("recovered point is inconsistent (objective gap {gap:e}, violation {violation:e})")]
    RecoveryInconsistent { gap: f64, violation: f64 },
}

/// Root of the nonincreasing `g` near `t` inside `domain`, by bracketing and
/// bisection. `None` when no sign change is found close by.
fn polish_multiplier(t: f64, domain: (f64, f64), g: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    let g0 = g(t)?;
    if g0 == 0.0 {
        return None;
    }
    let dir = if g0 > 0.0 { 1.0 } else { -1.0 };
    let mut w = 1e-14 * (1.0 + t.abs());
    let (mut a, mut b) = (t, t);
    for _ in 0..60 {
        let s = (t + dir * w).clamp(domain.0, domain.1);
        match g(s) {
            Some(v) if v * g0 <= 0.0 => {
                b = s;
                break;
            }
            Some(_) => a = s,
            None => return None,
        }
        if s == domain.0 || s == domain.1 {
            return None;
        }
        w *= 4.0;
    }
    if b == t {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        match g(m) {
            Some(v) if v * g0 > 0.0 => a = m,
            Some(_) => b = m,
            None => break,
        }
    }
    let (ga, gb) = (g(a)?.abs(), g(b)?.abs());
    Some(if ga <= gb { a } else { b })
}

/// Primal point of the cone problem from the dual maximizer: stationarity
/// fixes the coordinates with positive curvature, and the residual of the
/// linear constraint is spread over the free ones (complementary slackness).
pub fn primal_from_dual(spec: &DualSpec, dual: &DualResult) -> Result<PrimalPoint, RecoveryError> {
    if !dual.is_finite() {
        return Err(RecoveryError::NotFinite);
    }
    let l = spec.l();
    // Stationary point of the Lagrangian at `t`, plus the coordinates left free.
    let stationary = |t: f64| {
        let mut x = vec![0.0; l];
        let mut free = Vec::new();
        for (i, xi) in x.iter_mut().enumerate() {
            let q = spec.delta[i] + t * spec.alpha[i];
            let p = spec.e[i] + t * spec.b[i];
            if q > spec.q_tol(i) {
                *xi = -p / q;
            } else {
                free.push(i);
            }
        }
        (x, free)
    };
    let h_of = |x: &[f64], z: &[f64]| -> f64 {
        let mut h = spec.c + z.iter().sum::<f64>();
        for (i, xi) in x.iter().enumerate() {
            h += 0.5 * spec.alpha[i] * xi * xi + spec.b[i] * xi;
        }
        h
    };
    let (lo, hi) = spec.domain.bounds();
    let t_tol = 1e-12;
    let mut t = dual.nu;
    let (mut x, mut free) = stationary(t);
    let mut z = vec![0.0; spec.zeta.len()];
    let h0 = h_of(&x, &z);
    let target = if t > t_tol {
        hi
    } else if t < -t_tol {
        lo
    } else {
        h0.clamp(lo, hi)
    };
    if free.is_empty() && z.is_empty() && target.is_finite() {
        // Nothing can absorb a residual, so sharpen the multiplier itself:
        // h(x(t)) is nonincreasing in t and crosses the target near nu.
        if let Some(tp) = polish_multiplier(t, dual.domain, |s| {
            let (xs, fs) = stationary(s);
            fs.is_empty().then(|| h_of(&xs, &[]) - target)
        }) {
            t = tp;
            (x, free) = stationary(t);
        }
    }
    let h0 = h_of(&x, &z);
    let mut r = target - h0;
    let scale = 1.0 + target.abs() + h0.abs();
    let done = |r: f64| r.abs() <= 1e-13 * scale;

    // 1. z entries whose blocks stay attained.
    if !done(r) {
        if let Some(j) = (0..z.len()).find(|&j| spec.z_attainable.get(j).copied().unwrap_or(true)) {
            z[j] += r;
            r = 0.0;
        }
    }
    // 2. Free 1x1 coordinates, each moved as far as its quadratic allows.
    for &i in &free {
        if done(r) {
            break;
        }
        let (a, b) = (spec.alpha[i], spec.b[i]);
        if a.abs() <= spec.q_tol(i) {
            if b.abs() > 1e-12 {
                x[i] = r / b;
                r = 0.0;
            }
            continue;
        }
        let disc = b * b + 2.0 * a * r;
        if disc >= 0.0 {
            let sq = crate::math::sqrt(disc);
            let r1 = (-b + sq) / a;
            let r2 = (-b - sq) / a;
            x[i] = if r1.abs() <= r2.abs() { r1 } else { r2 };
            r = 0.0;
        } else {
            x[i] = -b / a;
            r -= -b * b / (2.0 * a);
        }
    }
    // 3. Any remaining z entry.
    if !done(r) && !z.is_empty() {
        z[0] += r;
    }
    let y: Vec<f64> = x.iter().map(|v| 0.5 * v * v).collect();
    let point = PrimalPoint::evaluate(spec, x, y, z);
    let gap = (point.objective - dual.value).abs();
    let violation = (point.constraint - hi).max(lo - point.constraint).max(0.0);
    let scale_v = 1.0 + dual.value.abs();
    if gap > 1e-7 * scale_v || violation > 1e-8 * (1.0 + lo.abs().min(1e300).max(hi.abs())) {
        return Err(RecoveryError::RecoveryInconsistent { gap, violation });
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Worked example in canonical coordinates, with unscaled
    /// 1x1 coefficients: alpha = (2, 1.5), delta = (-2, 2), e = (0, -1),
    /// one 2x2 block with zeta = -1 and e_even = 2.
    fn worked() -> DualSpec {
        DualSpec {
            alpha: vec![2.0, 1.5],
            delta: vec![-2.0, 2.0],
            b: vec![0.0, 0.0],
            e: vec![0.0, -1.0],
            zeta: vec![-1.0],
            z_attainable: vec![true],
            c: -1.25,
            c0: -2.0,
            domain: MultiplierDomain::NonNegative,
        }
    }

    const WORKED_VALUE: f64 = -1.25 - 2.0 - 1.0 / 7.0;

    #[test]
    fn worked_example_value_and_maximizer() {
        let s = worked();
        assert!((dual_value(&s, 1.0) - WORKED_VALUE).abs() < 1e-14);
        assert!((WORKED_VALUE - (-3.3929)).abs() < 1e-4);
        let r = maximize_dual(&s);
        assert_eq!(r.status, DualStatus::Finite);
        assert_eq!(r.nu, 1.0);
        assert!((r.value - WORKED_VALUE).abs() < 1e-12);
        assert_eq!(r.active, vec![true, false]);
    }

    #[test]
    fn worked_example_primal() {
        let s = worked();
        let r = maximize_dual(&s);
        let p = primal_from_dual(&s, &r).unwrap();
        assert!((p.x[1] - 1.0 / 3.5).abs() < 1e-12);
        assert_eq!(p.x[0], 0.0);
        assert!((p.objective - WORKED_VALUE).abs() < 1e-12);
        assert!(p.constraint.abs() < 1e-12);
    }

    #[test]
    fn unequal_zetas_gate() {
        let mut s = worked();
        s.zeta = vec![-1.0, -2.0];
        s.z_attainable = vec![true, true];
        for t in [-3.0, 0.0, 1.0, 2.0, 10.0] {
            assert_eq!(dual_value(&s, t), f64::NEG_INFINITY);
        }
        assert_eq!(maximize_dual(&s).status, DualStatus::UnequalZetas);
    }

    #[test]
    fn concave_ball_problem() {
        // f = -x^2/2, h = x^2/2 - 1/2: domain t >= 1, rho = -t/2.
        let s = DualSpec::diagonal(&[1.0], &[-1.0], &[0.0], &[0.0], -0.5, MultiplierDomain::NonNegative);
        assert!((dual_value(&s, 1.0) + 0.5).abs() < 1e-15);
        let r = maximize_dual(&s);
        assert!((r.nu - 1.0).abs() < 1e-12);
        assert!((r.value + 0.5).abs() < 1e-12);
        let p = primal_from_dual(&s, &r).unwrap();
        assert!((p.x[0].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inactive_constraint() {
        // f = x^2/2 - x, h = x^2/2 - 2.
        let s = DualSpec::diagonal(&[1.0], &[1.0], &[0.0], &[-1.0], -2.0, MultiplierDomain::NonNegative);
        let r = maximize_dual(&s);
        assert_eq!(r.nu, 0.0);
        assert!((r.value + 0.5).abs() < 1e-12);
        let p = primal_from_dual(&s, &r).unwrap();
        assert!((p.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_domain() {
        // f = -x^2/2 with a linear constraint: no multiplier helps.
        let s = DualSpec::diagonal(&[0.0], &[-1.0], &[1.0], &[0.0], 0.0, MultiplierDomain::NonNegative);
        assert_eq!(maximize_dual(&s).status, DualStatus::EmptyDomain);
    }

    #[test]
    fn interval_sides() {
        // f = x^2/2 (D = I, e = 0) with 1 <= x^2/2 <= 2: optimum 1 on the inner shell.
        let s = DualSpec::diagonal(&[1.0], &[1.0], &[0.0], &[0.0], 0.0, MultiplierDomain::Interval { lower: 1.0, upper: 2.0 });
        let r = maximize_interval_dual(&s);
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(r.nu < 0.0);
        let (n1, n2) = r.nu_pair();
        assert!((n1 - 1.0).abs() < 1e-6 && n2 == 0.0);
        // Collapsed interval equals the equality dual.
        let eq = DualSpec::diagonal(&[1.0], &[-1.0], &[0.3], &[0.2], -1.0, MultiplierDomain::Free);
        let mut iv = eq.clone();
        iv.c = 0.0;
        iv.domain = MultiplierDomain::Interval { lower: 1.0, upper: 1.0 };
        let (a, b) = (maximize_dual(&eq), maximize_dual(&iv));
        assert!((a.value - b.value).abs() < 1e-9);
    }

    fn arb_spec() -> impl Strategy<Value = DualSpec> {
        (1usize..5).prop_flat_map(|l| {
            (
                prop::collection::vec(prop::sample::select(vec![-1.0, 1.0, 1.0, 0.0]), l),
                prop::collection::vec(-1.0f64..2.0, l),
                prop::collection::vec(-1.0f64..1.0, l),
                prop::collection::vec(-1.0f64..1.0, l),
                -2.0f64..0.5,
                0usize..3,
            )
                .prop_map(|(alpha, delta, b, e, c, kind)| DualSpec {
                    alpha,
                    delta,
                    b,
                    e,
                    zeta: vec![],
                    z_attainable: vec![],
                    c,
                    c0: 0.0,
                    domain: match kind {
                        0 => MultiplierDomain::NonNegative,
                        1 => MultiplierDomain::Free,
                        _ => MultiplierDomain::Interval { lower: c - 1.0, upper: c + 0.5 },
                    },
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 1000, max_global_rejects: 100_000, ..ProptestConfig::default() })]
        #[test]
        fn concavity(spec in arb_spec(), sa in 0.0f64..1.0, sb in 0.0f64..1.0, w in 0.0f64..1.0) {
            let Some((lo, hi)) = feasible_interval(&spec) else { return Ok(()) };
            let (lo, hi) = (lo.max(-5.0), hi.min(5.0));
            prop_assume!(lo < hi);
            let (ta, tb) = (lo + sa * (hi - lo), lo + sb * (hi - lo));
            let (va, vb) = (dual_value(&spec, ta), dual_value(&spec, tb));
            prop_assume!(va.is_finite() && vb.is_finite());
            let vm = dual_value(&spec, w * ta + (1.0 - w) * tb);
            prop_assert!(vm >= w * va + (1.0 - w) * vb - 1e-9 * (1.0 + va.abs() + vb.abs()));
        }

        #[test]
        fn maximizer_beats_samples(spec in arb_spec(), probes in prop::collection::vec(-20.0f64..20.0, 8)) {
            let r = maximize_dual(&spec);
            prop_assume!(r.is_finite());
            for t in probes {
                let v = dual_value(&spec, t);
                prop_assert!(v <= r.value + 1e-7 * (1.0 + r.value.abs()), "rho({}) = {} > {}", t, v, r.value);
            }
        }
    }
}
