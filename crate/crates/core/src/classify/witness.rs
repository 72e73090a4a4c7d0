//! Explicit feasible points with very negative objective.
//!
//! A witness family is a map `M -> x(M)` whose objective falls without bound
//! while the constraint stays satisfied. The families used here keep the
//! constraint exact where the block structure allows it (moving `z = u_1 u_2`
//! along a hyperbola, trading one `z` against another) and otherwise push
//! along a direction and pull the point back onto the constraint by a scalar
//! step along a pivot direction.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::{Reason, Rule};
use crate::linalg::{sym_eig_unchecked, Matrix, Vector};
use crate::math::sqrt;
use crate::problem::{ConstraintKind, GtrsProblem};
use crate::reformulate::CanonicalProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessConfig {
    /// Required objective level (relative to `1 + |f(base)|`).
    pub level: f64,
    /// Relative feasibility tolerance, scaled by the term magnitudes.
    pub feas: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self { level: -1e7, feas: 1e-9 }
    }
}

/// Value of `q(x) = 1/2 x^T A x + b^T x` a feasible point should sit at, or
/// `None` when the constraint is an inequality (any `q <= -offset` works).
fn target_for(p: &GtrsProblem) -> Option<f64> {
    let (off, lo, hi) = p.constraint.bounds();
    match p.kind() {
        ConstraintKind::Inequality => None,
        ConstraintKind::Equality => Some(-off),
        ConstraintKind::Interval => Some(0.5 * (lo + hi)),
    }
}

/// Points at which `q` tends to take extreme values in both directions.
fn probe_points(p: &GtrsProblem) -> Vec<Vector> {
    let n = p.dim();
    let eig = sym_eig_unchecked(&p.a);
    let mut pts = Vec::new();
    pts.push(Vector::zeros(n));
    if let Some(x) = crate::linalg::minimize_quadratic(&p.a, &p.b, 0.0, 1e-10).map(|r| r.1) {
        pts.push(x);
    }
    let bn = p.b.norm();
    for t in [1.0, 10.0, 100.0, 1e3, 1e4] {
        for k in [0, n - 1] {
            let v = eig.eigenvectors.column(k).into_owned();
            pts.push(&v * t);
            pts.push(&v * -t);
        }
        if bn > 0.0 {
            pts.push(&p.b * (t / bn));
            pts.push(&p.b * (-t / bn));
        }
    }
    pts
}

/// Roots `s` of `q(x + s d) = target`, smallest magnitude first.
fn line_roots(p: &GtrsProblem, x: &Vector, d: &Vector, target: f64) -> Vec<f64> {
    let qa = 0.5 * d.dot(&(&p.a * d));
    let qb = (&p.a * x + &p.b).dot(d);
    let qc = p.quadratic_part(x) - target;
    let mut roots = Vec::new();
    let scale = qa.abs().max(qb.abs()).max(1e-300);
    if qa.abs() <= 1e-14 * scale {
        if qb.abs() > 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = sqrt(disc);
            // Stable pair of roots.
            let q = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(core::cmp::Ordering::Equal));
    roots
}

/// A feasible point, strictly inside the constraint when one is easy to find.
pub fn feasible_point(p: &GtrsProblem) -> Option<Vector> {
    let pts = probe_points(p);
    let (off, lo, hi) = p.constraint.bounds();
    let values: Vec<f64> = pts.iter().map(|x| p.quadratic_part(x) + off).collect();
    match p.kind() {
        ConstraintKind::Inequality => {
            let mut best: Option<usize> = None;
            for (i, &v) in values.iter().enumerate() {
                if v < 0.0 {
                    return Some(pts[i].clone());
                }
                if v <= 0.0 && best.is_none() {
                    best = Some(i);
                }
            }
            best.map(|i| pts[i].clone())
        }
        _ => {
            let mut target = target_for(p)? + off;
            if p.kind() == ConstraintKind::Interval {
                let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                target = target.clamp(lo.max(vmin), hi.min(vmax).max(lo.max(vmin)));
                if let Some(i) = values.iter().position(|&v| v >= lo && v <= hi) {
                    if (values[i] - target).abs() <= 0.25 * (hi - lo) {
                        return Some(pts[i].clone());
                    }
                }
            }
            let below = values.iter().position(|&v| v <= target)?;
            let above = values.iter().position(|&v| v >= target)?;
            let (xl, xh) = (&pts[below], &pts[above]);
            if values[below] == target {
                return Some(xl.clone());
            }
            let d = xh - xl;
            let s = line_roots(p, xl, &d, target - off)
                .into_iter()
                .find(|s| (-1e-12..=1.0 + 1e-12).contains(s))?;
            Some(xl + d * s)
        }
    }
}

struct Context<'a> {
    p: &'a GtrsProblem,
    pivots: Vec<Vector>,
    /// Value of `q` to retract onto.
    target: f64,
    cfg: WitnessConfig,
    level: f64,
}

impl Context<'_> {
    fn feasible(&self, x: &Vector) -> bool {
        self.p.is_feasible_scaled(x, self.cfg.feas)
    }

    /// Pull `x` back onto the constraint along the pivot that gives the lowest
    /// objective.
    fn retract(&self, x: Vector) -> Option<Vector> {
        if self.feasible(&x) {
            return Some(x);
        }
        let grad = &self.p.a * &x + &self.p.b;
        let mut best: Option<(f64, Vector)> = None;
        for d in core::iter::once(&grad).chain(self.pivots.iter()) {
            for s in line_roots(self.p, &x, d, self.target) {
                let y = &x + d * s;
                if !self.feasible(&y) {
                    continue;
                }
                let f = self.p.objective(&y);
                if best.as_ref().is_none_or(|b| f < b.0) {
                    best = Some((f, y));
                }
            }
        }
        best.map(|b| b.1)
    }

    fn try_family(&self, family: &dyn Fn(f64) -> Vector) -> Option<Vector> {
        let mut m = 10.0;
        while m <= 1e12 {
            let x = family(m);
            if x.iter().all(|v| v.is_finite()) {
                if let Some(y) = self.retract(x) {
                    if self.p.objective(&y) < self.level {
                        return Some(y);
                    }
                }
            }
            m *= 10.0;
        }
        None
    }
}

type Family<'a> = Box<dyn Fn(f64) -> Vector + 'a>;

/// Pair coordinates after the shift, `(v_1, v_2)`, at the base point.
fn pair_values(cp: &CanonicalProblem, u0: &Vector, j: usize) -> (f64, f64) {
    let q = &cp.pairs[j];
    (u0[q.col] + q.shift.0, u0[q.col + 1] + q.shift.1)
}

fn set_pair(cp: &CanonicalProblem, u: &mut Vector, j: usize, v1: f64, v2: f64) {
    let q = &cp.pairs[j];
    u[q.col] = v1 - q.shift.0;
    u[q.col + 1] = v2 - q.shift.1;
}

/// Change `z_j` by `dz` keeping the block's objective otherwise fixed.
fn move_z(cp: &CanonicalProblem, u0: &Vector, u: &mut Vector, j: usize, dz: f64) {
    if j < cp.pairs.len() {
        let (a1, a2) = pair_values(cp, u0, j);
        let tau = cp.pairs[j].tau;
        let v2 = if a2.abs() > 1e-3 { a2 } else { 1.0 };
        let z = tau * a1 * a2 + dz;
        set_pair(cp, u, j, z / (tau * v2), v2);
    } else if let Some(lin) = &cp.linear {
        let w = &lin.b_zero * (dz / lin.b_zero.norm_squared());
        for (k, &col) in cp.zero_cols.iter().enumerate() {
            u[col] += w[k];
        }
    }
}

fn canonical_families<'a>(cp: &'a CanonicalProblem, u0: &'a Vector, reasons: &[Reason]) -> Vec<Family<'a>> {
    let mut out: Vec<Family<'a>> = Vec::new();
    let s = &cp.s;
    for r in reasons {
        match (r.rule, r.block) {
            (Rule::TwoByTwoCase3, Some(j)) if j < cp.pairs.len() => {
                let q = cp.pairs[j];
                let (a1, a2) = pair_values(cp, u0, j);
                if q.tau < 0.0 {
                    // Hold u_1 u_2 fixed while u_2 grows.
                    out.push(Box::new(move |m| {
                        let mut u = u0.clone();
                        set_pair(cp, &mut u, j, a1 * a2 / m, m);
                        s * u
                    }));
                } else {
                    // Positive eigenvalue: let z decrease.
                    for sgn in [1.0, -1.0] {
                        out.push(Box::new(move |m| {
                            let mut u = u0.clone();
                            let v2 = if a2.abs() > 1e-3 { a2 } else { sgn };
                            set_pair(cp, &mut u, j, (a1 * a2 - m) / v2, v2);
                            s * u
                        }));
                    }
                }
            }
            (Rule::OddLinearTermNonzero, Some(j)) if j < cp.pairs.len() => {
                let q = cp.pairs[j];
                let (a1, a2) = pair_values(cp, u0, j);
                let sg = if q.e_odd > 0.0 { -1.0 } else { 1.0 };
                out.push(Box::new(move |m| {
                    let mut u = u0.clone();
                    let v1 = sg * m;
                    set_pair(cp, &mut u, j, v1, a1 * a2 / v1);
                    s * u
                }));
            }
            (Rule::UnequalZetas, _) => {
                let zetas = cp.zetas();
                for i in 0..zetas.len() {
                    for k in (i + 1)..zetas.len() {
                        let diff = zetas[i] - zetas[k];
                        if diff.abs() <= 1e-7 * (1.0 + zetas[i].abs()) {
                            continue;
                        }
                        let sg = if diff > 0.0 { -1.0 } else { 1.0 };
                        out.push(Box::new(move |m| {
                            let mut u = u0.clone();
                            move_z(cp, u0, &mut u, i, sg * m);
                            move_z(cp, u0, &mut u, k, -sg * m);
                            s * u
                        }));
                    }
                }
            }
            (Rule::FreeDirection, _) => {
                if let Some(dir) = &cp.free_direction {
                    let base = s * u0;
                    out.push(Box::new(move |m| &base + dir * m));
                }
            }
            (Rule::DualInfeasible, _) => {
                // A 1x1 coordinate with the constraint change absorbed by a z.
                let nz = cp.zetas().len();
                for i in 0..cp.l() {
                    let col = cp.one_cols[i];
                    let (al, bl) = (cp.alpha[i], cp.b[i]);
                    for sg in [1.0, -1.0] {
                        for j in 0..nz {
                            out.push(Box::new(move |m| {
                                let mut u = u0.clone();
                                let x_old = u0[col];
                                let x_new = x_old + sg * m;
                                u[col] = x_new;
                                let dh = 0.5 * al * (x_new * x_new - x_old * x_old) + bl * (x_new - x_old);
                                move_z(cp, u0, &mut u, j, -dh);
                                s * u
                            }));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Bottom eigenvector of `D + t A` at the maximizer of the concave function
/// `t -> lambda_min(D + t A)` over `t >= 0`, when that maximum is negative.
/// At an interior maximizer the eigenvector has `d^T A d = 0` and negative
/// `D`-curvature. A second candidate is tilted towards the most negative
/// eigenvector of `A`, so that `d^T A d < 0` and the ray stays strictly
/// inside an inequality constraint.
fn pencil_directions(p: &GtrsProblem) -> Vec<Vector> {
    let lmin = |t: f64| sym_eig_unchecked(&(&p.d + &p.a * t));
    let na = p.a.norm();
    if na == 0.0 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (0.0, 1e3 * (1.0 + p.d.norm() / na));
    let phi = 0.5 * (sqrt(5.0) - 1.0);
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if lmin(m1).min() < lmin(m2).min() {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let eig = lmin(0.5 * (lo + hi));
    if eig.min() >= 0.0 {
        return Vec::new();
    }
    let v = eig.eigenvectors.column(0).into_owned();
    let mut out = vec![v.clone()];
    let ea = sym_eig_unchecked(&p.a);
    if ea.min() < 0.0 {
        let w = ea.eigenvectors.column(0).into_owned();
        for sigma in [1e-3, -1e-3, 1e-2, -1e-2, 0.1, -0.1, 1.0, -1.0] {
            let d = &v + &w * sigma;
            if d.dot(&(&p.a * &d)) < 0.0 && d.dot(&(&p.d * &d)) < 0.0 {
                out.push(d);
                break;
            }
        }
    }
    out
}

/// Directions along which the objective can fall: coordinate axes, the
/// canonical basis, eigenvectors of `D`, `A` and of `D + mu A` for a few
/// `mu`, and pairwise mixtures with `d^T A d = 0`.
fn generic_directions(p: &GtrsProblem, cp: Option<&CanonicalProblem>) -> Vec<Vector> {
    let n = p.dim();
    let mut dirs: Vec<Vector> = Vec::new();
    if let Some(cp) = cp {
        if let Some(d) = &cp.free_direction {
            dirs.push(d.clone());
        }
        for j in 0..n {
            dirs.push(cp.s.column(j).into_owned());
        }
    }
    dirs.extend(pencil_directions(p));
    let mut negative: Vec<Vector> = Vec::new();
    for mu in [0.0, 0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 10.0, -10.0] {
        let m: Matrix = &p.d + &p.a * mu;
        let eig = sym_eig_unchecked(&m);
        for k in 0..n {
            if eig.eigenvalues[k] < 0.0 {
                negative.push(eig.eigenvectors.column(k).into_owned());
            }
        }
    }
    let ea = sym_eig_unchecked(&p.a);
    let ed = sym_eig_unchecked(&p.d);
    for k in 0..n {
        dirs.push(ed.eigenvectors.column(k).into_owned());
        dirs.push(ea.eigenvectors.column(k).into_owned());
    }
    // Mixtures v1 + s v2 with (v1 + s v2)^T A (v1 + s v2) = 0 and negative D-curvature.
    let pool: Vec<Vector> = negative
        .iter()
        .take(3 * n)
        .cloned()
        .chain((0..n).map(|k| ea.eigenvectors.column(k).into_owned()))
        .collect();
    let mut mixed: Vec<(f64, Vector)> = Vec::new();
    for i in 0..pool.len() {
        for k in (i + 1)..pool.len() {
            let (v1, v2) = (&pool[i], &pool[k]);
            let a11 = v1.dot(&(&p.a * v1));
            let a12 = v1.dot(&(&p.a * v2));
            let a22 = v2.dot(&(&p.a * v2));
            // a22 s^2 + 2 a12 s + a11 = 0
            let disc = a12 * a12 - a11 * a22;
            if disc < 0.0 || a22.abs() < 1e-14 {
                continue;
            }
            for sgn in [1.0, -1.0] {
                let s = (-a12 + sgn * sqrt(disc)) / a22;
                let d = v1 + v2 * s;
                let nd = d.norm();
                if nd < 1e-12 {
                    continue;
                }
                let d = d / nd;
                let curv = d.dot(&(&p.d * &d));
                if curv < -1e-10 {
                    mixed.push((curv, d));
                }
            }
        }
    }
    mixed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    negative.truncate(2 * n);
    dirs.extend(negative);
    dirs.extend(mixed.into_iter().take(4 * n).map(|m| m.1));
    for k in 0..n {
        let mut v = Vector::zeros(n);
        v[k] = 1.0;
        dirs.push(v);
    }
    dirs
}

/// Search for a feasible `x` with objective below `cfg.level (1 + |f(base)|)`.
///
/// `cp` enables the block-level families for the listed reasons; without it
/// only the generic direction search runs.
pub fn unbounded_witness(
    p: &GtrsProblem,
    cp: Option<&CanonicalProblem>,
    reasons: &[Reason],
    cfg: WitnessConfig,
) -> Option<Vector> {
    let base = feasible_point(p)?;
    let f0 = p.objective(&base);
    let level = cfg.level * (1.0 + f0.abs());
    let target = match target_for(p) {
        Some(t) => t,
        None => {
            let (off, _, _) = p.constraint.bounds();
            // Stay at the base level of h, which is feasible.
            p.quadratic_part(&base).min(-off)
        }
    };
    let mut pivots: Vec<Vector> = Vec::new();
    if let Some(cp) = cp {
        for j in 0..p.dim() {
            pivots.push(cp.s.column(j).into_owned());
        }
    }
    let ea = sym_eig_unchecked(&p.a);
    for k in 0..p.dim() {
        pivots.push(ea.eigenvectors.column(k).into_owned());
    }
    for k in 0..p.dim() {
        let mut v = Vector::zeros(p.dim());
        v[k] = 1.0;
        pivots.push(v);
    }
    let ctx = Context {
        p,
        pivots,
        target,
        cfg,
        level,
    };
    if let Some(cp) = cp {
        if let Some(u0) = cp.to_canonical(&base) {
            for fam in canonical_families(cp, &u0, reasons) {
                if let Some(x) = ctx.try_family(&*fam) {
                    return Some(x);
                }
            }
        }
    }
    for d in generic_directions(p, cp) {
        for sg in [1.0, -1.0] {
            let fam = |m: f64| &base + &d * (sg * m);
            if let Some(x) = ctx.try_family(&fam) {
                return Some(x);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Constraint;

    fn check(p: &GtrsProblem, x: &Vector) {
        assert!(p.objective(x) < -1e6, "objective {}", p.objective(x));
        assert!(p.is_feasible_scaled(x, 1e-9), "violation {}", p.violation(x));
    }

    #[test]
    fn feasible_points() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., 1.], &[0., 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Equality { c: -2.0 })
            .unwrap();
        let x = feasible_point(&p).unwrap();
        assert!(p.violation(&x) < 1e-9);
        let p = p.with_constraint(Constraint::Interval { lower: 3.0, upper: 4.0 });
        let x = feasible_point(&p).unwrap();
        assert!(p.violation(&x) < 1e-9);
        let p = p.with_constraint(Constraint::Inequality { c: 1.0 });
        assert!(feasible_point(&p).is_none());
    }

    #[test]
    fn generic_concave_direction() {
        // min -x1^2 subject to x1^2 - x2^2 <= 1 is unbounded along (1, 1).
        let p = GtrsProblem::from_slices(2, &[-2., 0., 0., 0.], &[0., 0.], &[2., 0., 0., -2.], &[0., 0.], Constraint::Inequality { c: -1.0 })
            .unwrap();
        let x = unbounded_witness(&p, None, &[], WitnessConfig::default()).unwrap();
        check(&p, &x);
        let p = p.with_constraint(Constraint::Equality { c: -1.0 });
        let x = unbounded_witness(&p, None, &[], WitnessConfig::default()).unwrap();
        check(&p, &x);
    }

    #[test]
    fn no_witness_for_bounded_problem() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., 1.], &[0., 0.], &[1., 0., 0., -1.], &[0., 0.], Constraint::Inequality { c: -1.0 })
            .unwrap();
        assert!(unbounded_witness(&p, None, &[], WitnessConfig::default()).is_none());
    }

    #[test]
    fn complex_pencil_direction() {
        // A^{-1} D has the eigenvalues -1.315 ± 0.117i; none of the coordinate,
        // eigenvector or fixed-shift directions reach the level.
        let a = [
            0.4619317037786579, 0.2731111512263418, -0.30014646433596814, 0.22511385914056237,
            0.2731111512263418, 0.9656253332897138, 0.3808906668010654, -0.444689938854149,
            -0.30014646433596814, 0.3808906668010654, 0.5414105653560459, 0.03395614786227341,
            0.22511385914056237, -0.444689938854149, 0.03395614786227341, -0.2622624337782602,
        ];
        let d = [
            0.3941996663848526, -0.04242366870684311, 0.1807647752992887, -0.8286488240071477,
            -0.04242366870684311, -0.08853188448332006, -0.31892726741868427, 0.2460103842146002,
            0.1807647752992887, -0.31892726741868427, 0.978546794421566, -0.053459219608913644,
            -0.8286488240071477, 0.2460103842146002, -0.053459219608913644, 0.6548680422789022,
        ];
        let p = GtrsProblem::from_slices(4, &d, &[0.; 4], &a, &[0.; 4], Constraint::Inequality { c: -1.9 }).unwrap();
        let dirs = pencil_directions(&p);
        assert_eq!(dirs.len(), 2);
        let t = &dirs[1];
        assert!(t.dot(&(&p.a * t)) < 0.0 && t.dot(&(&p.d * t)) < 0.0);
        let x = unbounded_witness(&p, None, &[], WitnessConfig::default()).unwrap();
        check(&p, &x);
    }
}
