//! Decide whether `f(x) + v >= 0` on the whole feasible set.
//!
//! The answer is read off the optimal value: the implication holds exactly
//! when `inf f + v >= 0`. When it holds and a dual multiplier is available,
//! the certificate carries it together with the smallest eigenvalue of the
//! homogenized Lagrangian matrix, which is nonnegative for a valid multiplier.
//! When it fails, a feasible point with `f(x) + v < 0` is returned.

use alloc::string::String;

use crate::linalg::{sym_eig_unchecked, Matrix, Vector};
use crate::problem::{GtrsProblem, SolverOptions};
use crate::solver::{solve, SolveError, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct SLemmaQuery {
    /// Objective `f` and the constraint.
    pub problem: GtrsProblem,
    /// Constant added to `f`.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SLemmaCertificate {
    /// `f + v + t (q + offset) - sigma(t) >= 0` for all `x`.
    Multiplier { mu: f64, min_eig: f64 },
    /// Holds by value, but no multiplier exists in the pipeline that proved it.
    Value { value: f64 },
    /// Feasible `x` with `f(x) + v < 0`.
    Violation { x: Vector, f: f64, violation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SLemmaVerdict {
    pub holds: bool,
    /// `inf f + v` (`-inf` when unbounded, `+inf` when infeasible).
    pub value: f64,
    pub certificate: SLemmaCertificate,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SLemmaError {
    #[error("the S-lemma does not apply: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("the problem is unbounded but no violating point was found")]
    NoWitness,
}

/// `[[D + tA, e + tb], [(e + tb)^T, 2(v + t*offset - sigma(t))]]`.
pub fn lagrangian_matrix(p: &GtrsProblem, v: f64, t: f64) -> Matrix {
    let n = p.dim();
    let (off, lo, hi) = p.constraint.bounds();
    let sigma = if t >= 0.0 { t * hi } else { t * lo };
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(&p.d + &p.a * t));
    let g = &p.e + &p.b * t;
    m.view_mut((0, n), (n, 1)).copy_from(&g);
    m.view_mut((n, 0), (1, n)).copy_from(&g.transpose());
    m[(n, n)] = 2.0 * (v + t * off - sigma);
    m
}

pub fn s_lemma(q: &SLemmaQuery, opts: &SolverOptions) -> Result<SLemmaVerdict, SLemmaError> {
    let p = &q.problem;
    let sol = solve(p, opts)?;
    let a = &sol.certificate.assumptions;
    if sol.status == Status::Infeasible || !a.feasible {
        return Err(SLemmaError::NotApplicable("the feasible set is empty".into()));
    }
    if !a.slater {
        return Err(SLemmaError::NotApplicable("no strictly feasible point".into()));
    }
    let value = sol.value + q.v;
    let tol = 1e-9 * (1.0 + sol.value.abs() + q.v.abs());
    if sol.is_finite() && value >= -tol {
        let mu = match sol.status {
            Status::Optimal | Status::FiniteUnattained => sol.certificate.nu(),
            _ => None,
        };
        // Without a dual, an interior minimizer has multiplier zero.
        let mu = mu.or_else(|| (sol.certificate.dual.is_none() && a.action == crate::solver::Action::InteriorCandidate).then_some(0.0));
        let certificate = match mu {
            Some(mu) => {
                let eig = sym_eig_unchecked(&lagrangian_matrix(p, q.v, mu));
                SLemmaCertificate::Multiplier { mu, min_eig: eig.min() }
            }
            None => SLemmaCertificate::Value { value },
        };
        return Ok(SLemmaVerdict {
            holds: true,
            value,
            certificate,
        });
    }
    let x = if sol.status == Status::Unbounded {
        sol.x.clone().ok_or(SLemmaError::NoWitness)?
    } else {
        let eps = (0.5 * value.abs()).min(opts.eps).max(f64::MIN_POSITIVE);
        sol.epsilon_point(eps).ok_or(SLemmaError::NoWitness)?
    };
    let f = p.objective(&x) + q.v;
    Ok(SLemmaVerdict {
        holds: false,
        value: if sol.status == Status::Unbounded { f64::NEG_INFINITY } else { value },
        certificate: SLemmaCertificate::Violation {
            violation: p.violation(&x),
            x,
            f,
        },
    })
}
