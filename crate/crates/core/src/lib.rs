//! Solvers for the generalized trust region subproblem
//!
//! ```text
//! minimize   f(x) = 1/2 x^T D x + e^T x
//! subject to h(x) = 1/2 x^T A x + b^T x + c <= 0      (inequality)
//!            h(x) = 0                                  (equality)
//!            lower <= 1/2 x^T A x + b^T x <= upper     (interval)
//! ```
//!
//! The pair `(A, D)` is brought to a congruent block canonical form. The
//! block structure decides whether the problem can be bounded below, and when
//! it can, the problem is equivalent to a small second-order cone program
//! whose Lagrangian dual is a concave maximization in one variable. The dual
//! maximizer is mapped back to an optimal point, or to an ε-optimal point
//! when the infimum is not attained.
//!
//! The crate builds without `std` (it needs `alloc`). Disable default
//! features to use it that way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;

pub mod canonical;
pub mod classify;
pub mod dual;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod reformulate;
pub mod slemma;
pub mod solver;
pub mod variants;

pub use canonical::{canonicalize, BlockPair, CanonicalForm, Canonicalization, DiagnosticKind};
pub use classify::{BoundednessReport, CaseTag, Rule, Verdict};
pub use dual::{DualResult, DualSpec, MultiplierDomain};
pub use linalg::{Matrix, Vector};
pub use problem::{Constraint, ConstraintKind, GtrsProblem, ProblemError, SolverOptions, Tolerances};
pub use slemma::{s_lemma, SLemmaQuery, SLemmaVerdict};
pub use solver::{solve, Solution, SolveError, Status};
