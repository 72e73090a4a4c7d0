//! Equality and interval constraints.
//!
//! Both run the same pipeline as the inequality form after their own checks:
//! a linear equality (`A = 0`) is eliminated by substitution, a constraint
//! that only touches the extreme level set of `q` is reduced to that affine
//! set, and an interval whose unconstrained minimizer sits strictly inside
//! is answered directly.

use crate::linalg::{null_space_basis, pseudoinverse, sym_eig_unchecked, Matrix, Vector};
use crate::problem::{Constraint, EqualityStrategy, GtrsProblem, SolverOptions, Tolerances};
use crate::reformulate::Reduced;
use crate::solver::{run_pipeline, solve_reduced, Action, AssumptionReport, Solution, SolveError, Status};

pub type VariantAssumptionReport = AssumptionReport;

/// Infimum and supremum of `q(x) = 1/2 x^T A x + b^T x`, with the stationary
/// point `-A^+ b` when it is attained.
#[derive(Debug, Clone)]
pub struct QRange {
    pub min: f64,
    pub max: f64,
    pub stationary: Option<Vector>,
}

pub fn q_range(p: &GtrsProblem, tol: &Tolerances) -> QRange {
    let eig = sym_eig_unchecked(&p.a);
    let scale = eig.spectral_radius().max(1.0);
    let rank_tol = tol.eig * scale;
    let x0 = -(pseudoinverse(&p.a, rank_tol) * &p.b);
    let in_range = (&p.a * &x0 + &p.b).norm() <= 1e-8 * (1.0 + p.b.norm());
    let psd = eig.min() >= -rank_tol;
    let nsd = eig.max() <= rank_tol;
    let extreme = 0.5 * p.b.dot(&x0);
    QRange {
        min: if psd && in_range { extreme } else { f64::NEG_INFINITY },
        max: if nsd && in_range { extreme } else { f64::INFINITY },
        stationary: in_range.then_some(x0),
    }
}

fn level_tol(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs() + b.abs())
}

/// Affine set `-A^+ b + null(A)` on which `q` takes its extreme value.
fn level_set(p: &GtrsProblem, range: &QRange, tol: &Tolerances) -> Reduced {
    let eig = sym_eig_unchecked(&p.a);
    let basis = eig.null_basis(tol.eig * eig.spectral_radius().max(1.0));
    let x0 = range.stationary.clone().unwrap_or_else(|| Vector::zeros(p.dim()));
    Reduced::new(p, x0, basis)
}

/// Minimize with `1/2 x^T A x + b^T x + c = 0`.
pub fn solve_eq(p: &GtrsProblem, opts: &SolverOptions) -> Result<Solution, SolveError> {
    let tol = &opts.tol;
    let (off, _, _) = p.constraint.bounds();
    let target = -off;
    let mut report = AssumptionReport {
        a_is_zero: p.a.amax() <= tol.zero,
        ..AssumptionReport::default()
    };
    if report.a_is_zero {
        let bn = p.b.norm();
        if bn <= tol.zero {
            if off.abs() > tol.zero {
                return Ok(Solution::infeasible(report));
            }
            report.feasible = true;
            report.degenerate = true;
            report.action = Action::NullSpaceReduction;
            let n = p.dim();
            let r = Reduced::new(p, Vector::zeros(n), Matrix::identity(n, n));
            return Ok(solve_reduced(p, &r, opts, report));
        }
        report.feasible = true;
        report.slater = true;
        return match opts.equality_strategy {
            EqualityStrategy::NullSpace => {
                report.action = Action::NullSpaceReduction;
                let x0 = &p.b * (target / (bn * bn));
                let row = Matrix::from_row_slice(1, p.dim(), p.b.as_slice());
                let basis = null_space_basis(&row, tol.eig);
                let r = Reduced::new(p, x0, basis);
                Ok(solve_reduced(p, &r, opts, report))
            }
            EqualityStrategy::Squaring => {
                // (b^T x + c)^2 = 0 written as 1/2 x^T (2 b b^T) x + 2c b^T x + c^2 = 0.
                let a2 = &p.b * p.b.transpose() * 2.0;
                let b2 = &p.b * (2.0 * off);
                let sq = GtrsProblem::new(p.d.clone(), p.e.clone(), a2, b2, Constraint::Equality { c: off * off })?;
                let mut s = solve_eq(&sq, opts)?;
                s.certificate.assumptions.a_is_zero = true;
                s.certificate.assumptions.action = Action::Squaring;
                Ok(s)
            }
        };
    }
    let range = q_range(p, tol);
    let lt = level_tol(target, range.min.clamp(-1e300, 1e300));
    if target < range.min - lt || target > range.max + level_tol(target, range.max.min(1e300)) {
        return Ok(Solution::infeasible(report));
    }
    report.feasible = true;
    let at_min = range.min.is_finite() && (target - range.min).abs() <= lt;
    let at_max = range.max.is_finite() && (target - range.max).abs() <= level_tol(target, range.max);
    if at_min || at_max {
        report.degenerate = true;
        report.action = Action::NullSpaceReduction;
        let r = level_set(p, &range, tol);
        return Ok(solve_reduced(p, &r, opts, report));
    }
    report.slater = true;
    run_pipeline(p, opts, report)
}

/// `(f(x), x)` for `x = -D^+ e` when `D` is positive semidefinite, `e` is in
/// its range and `x` lies strictly inside the interval.
pub fn interior_candidate(p: &GtrsProblem, tol: &Tolerances) -> Option<(f64, Vector)> {
    let Constraint::Interval { lower, upper } = p.constraint else {
        return None;
    };
    let eig = sym_eig_unchecked(&p.d);
    let rank_tol = tol.eig * eig.spectral_radius().max(1.0);
    if eig.min() < -rank_tol {
        return None;
    }
    let x = -(pseudoinverse(&p.d, rank_tol) * &p.e);
    if (&p.d * &x + &p.e).norm() > 1e-8 * (1.0 + p.e.norm()) {
        return None;
    }
    let q = p.quadratic_part(&x);
    let margin = 1e-12 * (1.0 + q.abs());
    (q > lower + margin && q < upper - margin).then(|| (p.objective(&x), x))
}

fn with_report(mut s: Solution, report: AssumptionReport) -> Solution {
    s.certificate.assumptions = report;
    s
}

/// Minimize with `lower <= 1/2 x^T A x + b^T x <= upper`.
pub fn solve_interval(p: &GtrsProblem, opts: &SolverOptions) -> Result<Solution, SolveError> {
    let tol = &opts.tol;
    let Constraint::Interval { lower, upper } = p.constraint else {
        return crate::solver::solve(p, opts);
    };
    if lower > upper {
        return Err(SolveError::EmptyInterval { lower, upper });
    }
    if lower == upper {
        return solve_eq(&p.with_constraint(Constraint::Equality { c: -lower }), opts);
    }
    let mut report = AssumptionReport {
        a_is_zero: p.a.amax() <= tol.zero,
        ..AssumptionReport::default()
    };
    let range = q_range(p, tol);
    if upper < range.min - level_tol(upper, range.min) || lower > range.max + level_tol(lower, range.max) {
        return Ok(Solution::infeasible(report));
    }
    report.feasible = true;
    let near = |c: f64, v: f64| v.is_finite() && (c - v).abs() <= level_tol(c, v);
    report.lower_degenerate = near(lower, range.min) || near(lower, range.max);
    report.upper_degenerate = near(upper, range.min) || near(upper, range.max);
    if near(upper, range.min) || near(lower, range.max) {
        // Only one level set is feasible.
        report.degenerate = true;
        report.action = Action::NullSpaceReduction;
        let r = level_set(p, &range, tol);
        return Ok(solve_reduced(p, &r, opts, report));
    }
    report.slater = true;
    if let Some((value, x)) = interior_candidate(p, tol) {
        report.action = Action::InteriorCandidate;
        let mut s = Solution::point(Status::Optimal, value, x, Default::default());
        s.certificate.assumptions = report;
        return Ok(s);
    }
    if report.a_is_zero {
        if p.b.norm() <= tol.zero {
            // q is identically zero and zero lies in the interval.
            report.action = Action::NullSpaceReduction;
            let n = p.dim();
            let r = Reduced::new(p, Vector::zeros(n), Matrix::identity(n, n));
            return Ok(solve_reduced(p, &r, opts, report));
        }
        report.action = Action::BoundaryEqualities;
        let lo = solve_eq(&p.with_constraint(Constraint::Equality { c: -lower }), opts)?;
        let hi = solve_eq(&p.with_constraint(Constraint::Equality { c: -upper }), opts)?;
        let best = if lo.value < hi.value { lo } else { hi };
        return Ok(with_report(best, report));
    }
    run_pipeline(p, opts, report)
}

/// Smaller of the two boundary equality values, the comparison point for the
/// interval dual whenever the interior candidate does not apply.
pub fn boundary_cross_check(p: &GtrsProblem, opts: &SolverOptions) -> Result<f64, SolveError> {
    let Constraint::Interval { lower, upper } = p.constraint else {
        return Ok(crate::solver::solve(p, opts)?.value);
    };
    let lo = solve_eq(&p.with_constraint(Constraint::Equality { c: -lower }), opts)?;
    let hi = solve_eq(&p.with_constraint(Constraint::Equality { c: -upper }), opts)?;
    Ok(lo.value.min(hi.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn linear_equality_counterexample() {
        // f = 2 x1^2 - x2^2 with x1 = x2: value 0 through substitution.
        let p = GtrsProblem::from_slices(2, &[4., 0., 0., -2.], &[0., 0.], &[0.; 4], &[1., -1.], Constraint::Equality { c: 0.0 }).unwrap();
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::ReducedUnconstrained);
        assert!(s.value.abs() < 1e-12);
        assert!(s.certificate.assumptions.a_is_zero);
        let mut o = opts();
        o.equality_strategy = EqualityStrategy::Squaring;
        let s2 = solve(&p, &o).unwrap();
        assert!(s2.value.abs() < 1e-10);
        assert_eq!(s2.certificate.assumptions.action, Action::Squaring);
    }

    #[test]
    fn sphere_equality() {
        let p = GtrsProblem::from_slices(1, &[1.0], &[0.0], &[1.0], &[0.0], Constraint::Equality { c: -0.5 }).unwrap();
        let s = solve(&p, &opts()).unwrap();
        assert!((s.value - 0.5).abs() < 1e-10);
        assert!((s.x.unwrap()[0].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn equality_infeasible_and_degenerate() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., 1.], &[1., 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Equality { c: 1.0 }).unwrap();
        assert_eq!(solve(&p, &opts()).unwrap().status, Status::Infeasible);
        let p = p.with_constraint(Constraint::Equality { c: 0.0 });
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::ReducedUnconstrained);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn interval_cases() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., 1.], &[0., 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Interval { lower: 1.0, upper: 2.0 }).unwrap();
        let s = solve(&p, &opts()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!(p.is_feasible(s.x.as_ref().unwrap(), 1e-8));
        assert!((boundary_cross_check(&p, &opts()).unwrap() - s.value).abs() < 1e-9);
        let p = p.with_constraint(Constraint::Interval { lower: -1.0, upper: 2.0 });
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.certificate.assumptions.action, Action::InteriorCandidate);
        assert_eq!(s.value, 0.0);
        let p = p.with_constraint(Constraint::Interval { lower: 3.0, upper: 2.0 });
        assert!(matches!(solve(&p, &opts()), Err(SolveError::EmptyInterval { .. })));
    }

    #[test]
    fn collapsed_interval_matches_equality() {
        let p = GtrsProblem::from_slices(2, &[1., 0.5, 0.5, -1.], &[0.3, -0.2], &[1., 0., 0., -0.5], &[0.1, 0.], Constraint::Interval { lower: 0.4, upper: 0.4 }).unwrap();
        let a = solve(&p, &opts()).unwrap();
        let b = solve(&p.with_constraint(Constraint::Equality { c: -0.4 }), &opts()).unwrap();
        assert_eq!(a.status, b.status);
        assert!((a.value - b.value).abs() < 1e-12 || a.value == b.value);
    }

    #[test]
    fn concave_on_shell() {
        // f = -|x|^2/2 on 1 <= |x|^2/2 <= 2: value -2 on the outer shell.
        let p = GtrsProblem::from_slices(2, &[-1., 0., 0., -1.], &[0., 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Interval { lower: 1.0, upper: 2.0 }).unwrap();
        let s = solve(&p, &opts()).unwrap();
        assert!((s.value + 2.0).abs() < 1e-9);
        assert!((boundary_cross_check(&p, &opts()).unwrap() + 2.0).abs() < 1e-9);
    }
}
