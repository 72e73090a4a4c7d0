//! Problem data and the evaluation helpers shared by every solver path.

use crate::linalg::{asymmetry, frobenius, Matrix, Vector};

/// Which constraint a problem carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `1/2 x^T A x + b^T x + c <= 0`
    Inequality { c: f64 },
    /// `1/2 x^T A x + b^T x + c = 0`
    Equality { c: f64 },
    /// `lower <= 1/2 x^T A x + b^T x <= upper`
    Interval { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Inequality,
    Equality,
    Interval,
}

impl Constraint {
    pub fn kind(&self) -> ConstraintKind {
        match self {
            Constraint::Inequality { .. } => ConstraintKind::Inequality,
            Constraint::Equality { .. } => ConstraintKind::Equality,
            Constraint::Interval { .. } => ConstraintKind::Interval,
        }
    }

    /// The constraint written as `lo <= q(x) + offset <= hi` with
    /// `q(x) = 1/2 x^T A x + b^T x`. Returns `(offset, lo, hi)`.
    pub fn bounds(&self) -> (f64, f64, f64) {
        match *self {
            Constraint::Inequality { c } => (c, f64::NEG_INFINITY, 0.0),
            Constraint::Equality { c } => (c, 0.0, 0.0),
            Constraint::Interval { lower, upper } => (0.0, lower, upper),
        }
    }

    /// Magnitude used to scale feasibility tolerances.
    pub fn scale(&self) -> f64 {
        match *self {
            Constraint::Inequality { c } | Constraint::Equality { c } => c.abs(),
            Constraint::Interval { lower, upper } => lower.abs().max(upper.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix {which} is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { which: &'static str, asymmetry: f64 },
    #[error("problem data contains a non-finite value")]
    NonFinite,
    #[error("empty problem (n = 0)")]
    Empty,
    #[error("interval bounds are reversed ({lower} > {upper})")]
    EmptyInterval { lower: f64, upper: f64 },
}

/// A raw problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GtrsProblem {
    pub d: Matrix,
    pub e: Vector,
    pub a: Matrix,
    pub b: Vector,
    pub constraint: Constraint,
}

impl GtrsProblem {
    /// Validates shapes, finiteness and symmetry (relative tolerance `1e-10`).
    pub fn new(
        d: Matrix,
        e: Vector,
        a: Matrix,
        b: Vector,
        constraint: Constraint,
    ) -> Result<Self, ProblemError> {
        Self::with_symmetry_tol(d, e, a, b, constraint, Tolerances::default().sym)
    }

    pub fn with_symmetry_tol(
        d: Matrix,
        e: Vector,
        a: Matrix,
        b: Vector,
        constraint: Constraint,
        tol_sym: f64,
    ) -> Result<Self, ProblemError> {
        let n = d.nrows();
        if n == 0 {
            return Err(ProblemError::Empty);
        }
        let check = |what, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(ProblemError::DimensionMismatch {
                    what,
                    expected,
                    found,
                })
            }
        };
        check("D columns", n, d.ncols())?;
        check("A rows", n, a.nrows())?;
        check("A columns", n, a.ncols())?;
        check("e", n, e.len())?;
        check("b", n, b.len())?;
        let finite = d.iter().chain(a.iter()).chain(e.iter()).chain(b.iter()).all(|v| v.is_finite());
        let (off, lo, hi) = constraint.bounds();
        if !finite || !off.is_finite() || lo.is_nan() || hi.is_nan() {
            return Err(ProblemError::NonFinite);
        }
        if let Constraint::Interval { lower, upper } = constraint {
            if !lower.is_finite() || !upper.is_finite() {
                return Err(ProblemError::NonFinite);
            }
            if lower > upper {
                return Err(ProblemError::EmptyInterval { lower, upper });
            }
        }
        for (which, m) in [("D", &d), ("A", &a)] {
            let asym = asymmetry(m);
            if asym > tol_sym * (1.0 + frobenius(m)) {
                return Err(ProblemError::NotSymmetric {
                    which,
                    asymmetry: asym,
                });
            }
        }
        Ok(Self {
            d: crate::linalg::symmetrize(&d),
            e,
            a: crate::linalg::symmetrize(&a),
            b,
            constraint,
        })
    }

    /// Builds a problem from row-major slices. Convenient in tests and examples.
    pub fn from_slices(
        n: usize,
        d: &[f64],
        e: &[f64],
        a: &[f64],
        b: &[f64],
        constraint: Constraint,
    ) -> Result<Self, ProblemError> {
        if d.len() != n * n {
            return Err(ProblemError::DimensionMismatch {
                what: "D entries",
                expected: n * n,
                found: d.len(),
            });
        }
        if a.len() != n * n {
            return Err(ProblemError::DimensionMismatch {
                what: "A entries",
                expected: n * n,
                found: a.len(),
            });
        }
        Self::new(
            Matrix::from_row_slice(n, n, d),
            Vector::from_column_slice(e),
            Matrix::from_row_slice(n, n, a),
            Vector::from_column_slice(b),
            constraint,
        )
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn kind(&self) -> ConstraintKind {
        self.constraint.kind()
    }

    pub fn with_constraint(&self, constraint: Constraint) -> Self {
        Self {
            constraint,
            ..self.clone()
        }
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.d * x)) + self.e.dot(x)
    }

    /// `1/2 x^T A x + b^T x`, without any constant.
    pub fn quadratic_part(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x)
    }

    /// `h(x)` for the inequality and equality forms, `q(x)` for the interval form.
    pub fn constraint_value(&self, x: &Vector) -> f64 {
        let (off, _, _) = self.constraint.bounds();
        self.quadratic_part(x) + off
    }

    /// Amount by which `x` violates the constraint (zero when feasible).
    pub fn violation(&self, x: &Vector) -> f64 {
        let (off, lo, hi) = self.constraint.bounds();
        let v = self.quadratic_part(x) + off;
        (v - hi).max(lo - v).max(0.0)
    }

    /// Feasibility within `tol * (1 + constraint scale)`.
    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol * (1.0 + self.constraint.scale())
    }

    /// Feasibility tolerance that also scales with the size of the terms at `x`,
    /// which matters for far-away points such as unboundedness witnesses.
    pub fn is_feasible_scaled(&self, x: &Vector, tol: f64) -> bool {
        let terms = 0.5 * x.abs().dot(&(self.a.abs() * x.abs())) + self.b.abs().dot(&x.abs());
        self.violation(x) <= tol * (1.0 + self.constraint.scale() + terms)
    }
}

/// Numerical thresholds. Every decision in the crate reads from here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Symmetry check on inputs.
    pub sym: f64,
    /// Relative rank cutoff for eigenvalues and singular values.
    pub eig: f64,
    /// Eigenvalue clustering radius, as a chordal distance between eigenvalues
    /// of the pencil `(A, D)`.
    pub cluster: f64,
    /// Coefficient-level zero test (`e_odd = 0`, `alpha = 0`, ...).
    pub zero: f64,
    /// Relative accuracy for the dual maximization.
    pub dual: f64,
    /// Feasibility of recovered points.
    pub feas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym: 1e-10,
            eig: 1e-10,
            cluster: 1e-5,
            zero: 1e-9,
            dual: 1e-10,
            feas: 1e-8,
        }
    }
}

/// How equality constraints with `A = 0` are removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqualityStrategy {
    /// Substitute the null space of `b^T`.
    #[default]
    NullSpace,
    /// Replace `b^T x + c = 0` by `(b^T x + c)^2 = 0`.
    Squaring,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: Tolerances,
    /// Target gap for ε-optimal points when the infimum is not attained.
    pub eps: f64,
    pub seed: u64,
    pub equality_strategy: EqualityStrategy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            eps: 1e-6,
            seed: 0,
            equality_strategy: EqualityStrategy::NullSpace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> GtrsProblem {
        GtrsProblem::from_slices(
            2,
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0],
            Constraint::Inequality { c: -1.0 },
        )
        .unwrap()
    }

    #[test]
    fn evaluators() {
        let p = ball();
        let x = Vector::from_vec(alloc::vec![1.0, 1.0]);
        assert_eq!(p.objective(&x), 1.0);
        assert_eq!(p.constraint_value(&x), 0.0);
        assert!(p.is_feasible(&x, 1e-12));
        let y = Vector::from_vec(alloc::vec![2.0, 0.0]);
        assert_eq!(p.violation(&y), 1.0);
    }

    #[test]
    fn interval_bounds() {
        let p = ball().with_constraint(Constraint::Interval {
            lower: 1.0,
            upper: 2.0,
        });
        let x = Vector::from_vec(alloc::vec![0.0, 0.0]);
        assert_eq!(p.violation(&x), 1.0);
        assert_eq!(p.constraint.bounds(), (0.0, 1.0, 2.0));
    }

    #[test]
    fn rejects_bad_input() {
        let r = GtrsProblem::from_slices(
            2,
            &[1.0, 2.0, 0.0, 1.0],
            &[0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0],
            Constraint::Inequality { c: 0.0 },
        );
        assert!(matches!(r, Err(ProblemError::NotSymmetric { which: "D", .. })));
        let r = GtrsProblem::from_slices(
            2,
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0],
            Constraint::Inequality { c: 0.0 },
        );
        assert!(matches!(r, Err(ProblemError::DimensionMismatch { .. })));
        let r = GtrsProblem::from_slices(
            1,
            &[1.0],
            &[0.0],
            &[1.0],
            &[0.0],
            Constraint::Interval {
                lower: 2.0,
                upper: 1.0,
            },
        );
        assert!(matches!(r, Err(ProblemError::EmptyInterval { .. })));
    }
}
