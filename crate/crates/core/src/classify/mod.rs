//! Boundedness and attainability from the canonical form.
//!
//! Some block structures make the objective unbounded below no matter what
//! the data outside the pencil is: real Jordan blocks of size three or more,
//! complex eigenvalue pairs, `A`-singular blocks of size two or more, and a
//! 2x2 block with `tau = -1`. Others do so once the linear terms are known:
//! a nonzero odd linear term on a 2x2 block, a positive block eigenvalue
//! under an inequality, two 2x2 blocks with different eigenvalues, or a free
//! direction in the joint null space. Everything else is settled by the dual.

mod witness;

use alloc::vec::Vec;

pub use witness::{feasible_point, unbounded_witness, WitnessConfig};

use crate::canonical::{CanonicalForm, DiagnosticKind, EarlyDiagnostic};
use crate::problem::ConstraintKind;
use crate::reformulate::CanonicalProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    JordanTooLarge,
    ComplexPair,
    TypeBLarge,
    /// The pencil is singular for every shift.
    SingularPencil,
    TwoByTwoCase3,
    OddLinearTermNonzero,
    UnequalZetas,
    /// The joint null space of `A` and `D` carries objective-only slope.
    FreeDirection,
    /// No multiplier makes the dual finite.
    DualInfeasible,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::JordanTooLarge => "JordanTooLarge",
            Rule::ComplexPair => "ComplexPair",
            Rule::TypeBLarge => "TypeBLarge",
            Rule::SingularPencil => "SingularPencil",
            Rule::TwoByTwoCase3 => "TwoByTwoCase3",
            Rule::OddLinearTermNonzero => "OddLinearTermNonzero",
            Rule::UnequalZetas => "UnequalZetas",
            Rule::FreeDirection => "FreeDirection",
            Rule::DualInfeasible => "DualInfeasible",
        }
    }

    fn from_diagnostic(d: &DiagnosticKind) -> Self {
        match d {
            DiagnosticKind::JordanTooLarge(_) => Rule::JordanTooLarge,
            DiagnosticKind::ComplexPair(..) => Rule::ComplexPair,
            DiagnosticKind::TypeBLarge(_) => Rule::TypeBLarge,
            DiagnosticKind::SingularPencil(_) => Rule::SingularPencil,
        }
    }
}

/// Per 2x2 block outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Bounded and attained.
    Case1,
    /// Bounded, infimum not attained on this block.
    Case2,
    /// Unbounded below.
    Case3,
    /// Decided only once the optimal `z` is known.
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unbounded,
    PossiblyBounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reason {
    /// Block index in the canonical form (2x2 index for pair rules).
    pub block: Option<usize>,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub verdict: Verdict,
    pub reasons: Vec<Reason>,
    /// One tag per 2x2 block.
    pub case_tags: Vec<CaseTag>,
}

impl BoundednessReport {
    fn from_reasons(reasons: Vec<Reason>, case_tags: Vec<CaseTag>) -> Self {
        let verdict = if reasons.is_empty() {
            Verdict::PossiblyBounded
        } else {
            Verdict::Unbounded
        };
        Self {
            verdict,
            reasons,
            case_tags,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.verdict == Verdict::Unbounded
    }

    pub fn has_rule(&self, rule: Rule) -> bool {
        self.reasons.iter().any(|r| r.rule == rule)
    }

    pub fn add(&mut self, block: Option<usize>, rule: Rule) {
        self.reasons.push(Reason { block, rule });
        self.verdict = Verdict::Unbounded;
    }

    /// Turn deferred tags into `Case1` or `Case2` once the solve is done.
    pub fn resolve_deferred(&mut self, unattained: &[usize]) {
        for (j, tag) in self.case_tags.iter_mut().enumerate() {
            if *tag == CaseTag::Deferred {
                *tag = if unattained.contains(&j) {
                    CaseTag::Case2
                } else {
                    CaseTag::Case1
                };
            }
        }
    }
}

/// Reasons for a pair that never reached a full canonical form.
pub fn screen_diagnostic(diag: &EarlyDiagnostic) -> BoundednessReport {
    let reasons = diag
        .issues
        .iter()
        .map(|d| Reason {
            block: None,
            rule: Rule::from_diagnostic(d),
        })
        .collect();
    BoundednessReport::from_reasons(reasons, Vec::new())
}

/// Structural screen of a canonical form together with its linear terms.
pub fn screen_structure(cf: &CanonicalForm, cp: &CanonicalProblem) -> BoundednessReport {
    let mut reasons = Vec::new();
    for (i, blk) in cf.blocks.iter().enumerate() {
        if let crate::canonical::BlockPair::Diagnostic(d) = blk {
            reasons.push(Reason {
                block: Some(i),
                rule: Rule::from_diagnostic(d),
            });
        }
    }
    let mut tags = Vec::with_capacity(cp.pairs.len());
    for (j, q) in cp.pairs.iter().enumerate() {
        let odd = if cp.is_zero(q.e_odd) { 0.0 } else { q.e_odd };
        let even = if cp.is_zero(q.e_even) { 0.0 } else { q.e_even };
        let tag = analyze_2x2(q.tau, q.kappa, odd, even, cp.kind);
        if tag == CaseTag::Case3 {
            let rule = if q.tau > 0.0 && odd != 0.0 {
                Rule::OddLinearTermNonzero
            } else {
                Rule::TwoByTwoCase3
            };
            reasons.push(Reason { block: Some(j), rule });
        }
        tags.push(tag);
    }
    let zetas = cp.zetas();
    if let Some(&z0) = zetas.first() {
        if zetas.iter().any(|z| (z - z0).abs() > 1e-7 * (1.0 + z0.abs())) {
            reasons.push(Reason {
                block: None,
                rule: Rule::UnequalZetas,
            });
        }
    }
    if cp.free_direction.is_some() {
        reasons.push(Reason {
            block: None,
            rule: Rule::FreeDirection,
        });
    }
    BoundednessReport::from_reasons(reasons, tags)
}

/// Case of one 2x2 block with eigenvalue `lambda` after the shift.
pub fn analyze_2x2(tau: f64, lambda: f64, e_odd: f64, e_even: f64, kind: ConstraintKind) -> CaseTag {
    if tau < 0.0 || e_odd != 0.0 {
        return CaseTag::Case3;
    }
    if kind == ConstraintKind::Inequality && lambda > 0.0 {
        return CaseTag::Case3;
    }
    if e_even != 0.0 {
        CaseTag::Case1
    } else {
        CaseTag::Deferred
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attainment {
    Attained,
    Unattained,
}

/// Whether one block with cost `zeta`, even term `e_even` and optimal `z` is
/// approached only in the limit.
pub fn block_unattained(kind: ConstraintKind, zeta: f64, e_even: f64, z: f64, tol: f64) -> bool {
    if e_even.abs() > tol {
        return false;
    }
    let z_tol = tol.max(1e-12 * (1.0 + z.abs()));
    match kind {
        ConstraintKind::Inequality => {
            (zeta.abs() <= tol && z < -z_tol) || (zeta < -tol && z.abs() > z_tol)
        }
        ConstraintKind::Equality | ConstraintKind::Interval => z.abs() > z_tol,
    }
}

pub fn attainability(z: &[f64], zeta: &[f64], e_even: &[f64], kind: ConstraintKind, tol: f64) -> Attainment {
    let any = (0..z.len()).any(|j| block_unattained(kind, zeta[j], e_even[j], z[j], tol));
    if any {
        Attainment::Unattained
    } else {
        Attainment::Attained
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::linalg::Matrix;
    use crate::problem::Tolerances;

    #[test]
    fn case_tags() {
        use ConstraintKind::*;
        assert_eq!(analyze_2x2(1.0, 0.0, 0.0, 2.0, Inequality), CaseTag::Case1);
        assert_eq!(analyze_2x2(-1.0, -3.0, 0.0, 2.0, Inequality), CaseTag::Case3);
        assert_eq!(analyze_2x2(-1.0, 0.0, 0.0, 0.0, Equality), CaseTag::Case3);
        assert_eq!(analyze_2x2(1.0, -1.0, 0.0, 0.0, Inequality), CaseTag::Deferred);
        assert_eq!(analyze_2x2(1.0, 0.5, 0.0, 1.0, Inequality), CaseTag::Case3);
        assert_eq!(analyze_2x2(1.0, 0.5, 0.0, 1.0, Equality), CaseTag::Case1);
        assert_eq!(analyze_2x2(1.0, -0.5, 0.1, 1.0, Interval), CaseTag::Case3);
        assert_eq!(analyze_2x2(1.0, 0.5, 0.0, 0.0, Interval), CaseTag::Deferred);
    }

    #[test]
    fn attainability_rules() {
        use ConstraintKind::*;
        let t = 1e-9;
        assert_eq!(attainability(&[3.0], &[-1.0], &[2.0], Inequality, t), Attainment::Attained);
        assert_eq!(attainability(&[0.5], &[-1.0], &[0.0], Inequality, t), Attainment::Unattained);
        assert_eq!(attainability(&[], &[], &[], Inequality, t), Attainment::Attained);
        assert_eq!(attainability(&[0.5], &[0.0], &[0.0], Inequality, t), Attainment::Attained);
        assert_eq!(attainability(&[-0.5], &[0.0], &[0.0], Inequality, t), Attainment::Unattained);
        assert_eq!(attainability(&[0.0], &[-1.0], &[0.0], Inequality, t), Attainment::Attained);
        assert_eq!(attainability(&[0.5], &[2.0], &[0.0], Equality, t), Attainment::Unattained);
        assert_eq!(attainability(&[0.0], &[2.0], &[0.0], Interval, t), Attainment::Attained);
    }

    #[test]
    fn diagnostics_map_to_rules() {
        let tol = Tolerances::default();
        // Eigenvalues 1 ± 2i: A = I, D = [[1, 2], [-2, 1]] is not symmetric, so
        // use A = diag(1, -1), D = [[1, 2], [2, -1]], A^{-1} D = [[1, 2], [-2, 1]].
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let d = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        match canonicalize(&a, &d, &tol).unwrap() {
            crate::canonical::Canonicalization::Diagnostic(diag) => {
                let r = screen_diagnostic(&diag);
                assert!(r.is_unbounded());
                assert!(r.has_rule(Rule::ComplexPair));
            }
            _ => panic!("expected a diagnostic"),
        }
    }

    #[test]
    fn resolve_deferred_tags() {
        let mut r = BoundednessReport::from_reasons(Vec::new(), alloc::vec![CaseTag::Deferred, CaseTag::Case1, CaseTag::Deferred]);
        r.resolve_deferred(&[2]);
        assert_eq!(r.case_tags, alloc::vec![CaseTag::Case1, CaseTag::Case1, CaseTag::Case2]);
    }
}
