//! Solver entry point and the pipeline shared by all constraint kinds.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::canonical::{canonicalize, BlockPair, CanonicalError, Canonicalization, DiagnosticKind};
use crate::classify::{screen_diagnostic, screen_structure, unbounded_witness, BoundednessReport, Reason, Rule, WitnessConfig};
use crate::dual::{maximize_dual_with_tol, primal_from_dual, DualResult, DualSpec, DualStatus, RecoveryError};
use crate::linalg::Vector;
use crate::problem::{ConstraintKind, GtrsProblem, ProblemError, SolverOptions};
use crate::reformulate::{
    build_socp, preprocess, recover_x, CanonicalProblem, PrimalPoint, Preprocessed, Reduced, ReducedOutcome,
    ReformulateError, SocpProblem,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Reformulate(#[from] ReformulateError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error("pencil of size {0} is singular and no unbounded direction was found")]
    SingularPencil(usize),
    #[error("empty interval: lower {lower} > upper {upper}")]
    EmptyInterval { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// The infimum is finite but only approached; `x` is an ε-optimal point.
    FiniteUnattained,
    Unbounded,
    Infeasible,
    /// The feasible set is an affine subspace and the problem was solved there.
    ReducedUnconstrained,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FiniteUnattained => "finite_unattained",
            Status::Unbounded => "unbounded",
            Status::Infeasible => "infeasible",
            Status::ReducedUnconstrained => "reduced_unconstrained",
        }
    }
}

/// Preprocessing step that changed the problem before the main pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Action {
    #[default]
    None,
    NullSpaceReduction,
    Squaring,
    InteriorCandidate,
    BoundaryEqualities,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::None => "none",
            Action::NullSpaceReduction => "null_space_reduction",
            Action::Squaring => "squaring",
            Action::InteriorCandidate => "interior_candidate",
            Action::BoundaryEqualities => "boundary_equalities",
        }
    }
}

/// What was checked about the constraint before solving.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AssumptionReport {
    pub feasible: bool,
    /// Strict feasibility; for the equality form, `h` takes both signs.
    pub slater: bool,
    pub a_is_zero: bool,
    /// The feasible set collapsed to an affine subspace.
    pub degenerate: bool,
    /// Interval form: the set `{q = lower}` is a degenerate level set.
    pub lower_degenerate: bool,
    /// Interval form: the set `{q = upper}` is a degenerate level set.
    pub upper_degenerate: bool,
    pub action: Action,
}

#[derive(Debug, Clone, Default)]
pub struct Certificate {
    pub dual: Option<DualResult>,
    pub blocks: Vec<BlockPair>,
    pub diagnostics: Vec<DiagnosticKind>,
    pub classification: Option<BoundednessReport>,
    pub assumptions: AssumptionReport,
    /// Condition number of the congruence `S`.
    pub condition: Option<f64>,
    pub ill_conditioned: bool,
    pub canonical_residual: Option<f64>,
    /// `|f(x) - value|` at the returned point.
    pub recovery_gap: Option<f64>,
}

impl Certificate {
    pub fn nu(&self) -> Option<f64> {
        self.dual.as_ref().filter(|d| d.is_finite()).map(|d| d.nu)
    }

    pub fn nu_pair(&self) -> Option<(f64, f64)> {
        self.dual.as_ref().filter(|d| d.is_finite()).map(|d| d.nu_pair())
    }
}

#[derive(Debug, Clone)]
struct RecoveryState {
    cp: CanonicalProblem,
    socp: SocpProblem,
    point: PrimalPoint,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    /// Optimal value; `-inf` when unbounded, `+inf` when infeasible.
    pub value: f64,
    /// Optimal point, ε-optimal point, or unboundedness witness.
    pub x: Option<Vector>,
    /// Gap target used for `x` when the infimum is not attained.
    pub eps: Option<f64>,
    pub certificate: Certificate,
    recovery: Option<Box<RecoveryState>>,
}

impl Solution {
    pub(crate) fn infeasible(assumptions: AssumptionReport) -> Self {
        Self {
            status: Status::Infeasible,
            value: f64::INFINITY,
            x: None,
            eps: None,
            certificate: Certificate {
                assumptions,
                ..Certificate::default()
            },
            recovery: None,
        }
    }

    pub(crate) fn unbounded(witness: Option<Vector>, certificate: Certificate) -> Self {
        Self {
            status: Status::Unbounded,
            value: f64::NEG_INFINITY,
            x: witness,
            eps: None,
            certificate,
            recovery: None,
        }
    }

    pub(crate) fn point(status: Status, value: f64, x: Vector, certificate: Certificate) -> Self {
        Self {
            status,
            value,
            x: Some(x),
            eps: None,
            certificate,
            recovery: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self.status,
            Status::Optimal | Status::FiniteUnattained | Status::ReducedUnconstrained
        )
    }

    /// A feasible point within `eps` of the value. For attained problems this
    /// is the optimal point itself.
    pub fn epsilon_point(&self, eps: f64) -> Option<Vector> {
        match (&self.recovery, self.status) {
            (Some(r), Status::FiniteUnattained) => recover_x(&r.point, &r.cp, &r.socp, eps).ok().map(|r| r.x),
            _ if self.is_finite() => self.x.clone(),
            _ => None,
        }
    }
}

/// Minimize `f` subject to the problem's constraint.
pub fn solve(p: &GtrsProblem, opts: &SolverOptions) -> Result<Solution, SolveError> {
    match p.kind() {
        ConstraintKind::Inequality => solve_inequality(p, opts),
        ConstraintKind::Equality => crate::variants::solve_eq(p, opts),
        ConstraintKind::Interval => crate::variants::solve_interval(p, opts),
    }
}

fn solve_inequality(p: &GtrsProblem, opts: &SolverOptions) -> Result<Solution, SolveError> {
    let mut assumptions = AssumptionReport {
        a_is_zero: p.a.amax() == 0.0,
        ..AssumptionReport::default()
    };
    match preprocess(p, &opts.tol) {
        Preprocessed::Infeasible => Ok(Solution::infeasible(assumptions)),
        Preprocessed::ReducedUnconstrained(r) => {
            assumptions.feasible = true;
            assumptions.degenerate = true;
            assumptions.action = Action::NullSpaceReduction;
            Ok(solve_reduced(p, &r, opts, assumptions))
        }
        Preprocessed::Proceed => {
            assumptions.feasible = true;
            assumptions.slater = true;
            run_pipeline(p, opts, assumptions)
        }
    }
}

/// Solve on the affine set of a [`Reduced`] problem.
pub(crate) fn solve_reduced(p: &GtrsProblem, r: &Reduced, opts: &SolverOptions, assumptions: AssumptionReport) -> Solution {
    let certificate = Certificate {
        assumptions,
        ..Certificate::default()
    };
    match r.solve(opts.tol.eig) {
        ReducedOutcome::Optimal { value, x } => {
            let mut s = Solution::point(Status::ReducedUnconstrained, value, x, certificate);
            s.certificate.recovery_gap = s.x.as_ref().map(|x| (p.objective(x) - value).abs());
            s
        }
        ReducedOutcome::Unbounded { x0, direction } => {
            let f0 = p.objective(&x0);
            let level = WitnessConfig::default().level * (1.0 + f0.abs());
            let mut m = 10.0;
            let mut witness = None;
            while m <= 1e15 {
                let x = &x0 + &direction * m;
                if p.objective(&x) < level {
                    witness = Some(x);
                    break;
                }
                m *= 10.0;
            }
            Solution::unbounded(witness, certificate)
        }
    }
}

/// Canonical form, structural screen, dual, recovery.
pub(crate) fn run_pipeline(p: &GtrsProblem, opts: &SolverOptions, assumptions: AssumptionReport) -> Result<Solution, SolveError> {
    let tol = &opts.tol;
    let mut cert = Certificate {
        assumptions,
        ..Certificate::default()
    };
    let cf = match canonicalize(&p.a, &p.d, tol)? {
        Canonicalization::Diagnostic(diag) => {
            let report = screen_diagnostic(&diag);
            cert.diagnostics = diag.issues.clone();
            let witness = unbounded_witness(p, None, &report.reasons, WitnessConfig::default());
            if witness.is_none() {
                if let Some(DiagnosticKind::SingularPencil(k)) =
                    diag.issues.iter().find(|d| matches!(d, DiagnosticKind::SingularPencil(_)))
                {
                    return Err(SolveError::SingularPencil(*k));
                }
                log::warn!("no explicit unbounded witness found for {:?}", diag.issues);
            }
            cert.classification = Some(report);
            return Ok(Solution::unbounded(witness, cert));
        }
        Canonicalization::Form(cf) => cf,
    };
    if cf.ill_conditioned {
        log::warn!("canonical congruence is ill-conditioned (cond {:e})", cf.condition);
    }
    cert.blocks = cf.blocks.clone();
    cert.condition = Some(cf.condition);
    cert.ill_conditioned = cf.ill_conditioned;
    cert.canonical_residual = Some(cf.residual);
    let cp = CanonicalProblem::new(p, &cf, tol)?;
    let mut report = screen_structure(&cf, &cp);
    if report.is_unbounded() {
        let witness = unbounded_witness(p, Some(&cp), &report.reasons, WitnessConfig::default());
        if witness.is_none() {
            log::warn!("no explicit unbounded witness found for {:?}", report.reasons);
        }
        cert.classification = Some(report);
        return Ok(Solution::unbounded(witness, cert));
    }
    let socp = build_socp(&cp)?;
    let spec = DualSpec::from_socp(&socp);
    let dual = maximize_dual_with_tol(&spec, tol.dual);
    log::debug!("dual: {:?}", dual);
    match dual.status {
        DualStatus::UnboundedAbove => {
            cert.dual = Some(dual);
            cert.classification = Some(report);
            let mut s = Solution::infeasible(cert.assumptions);
            s.certificate = cert;
            return Ok(s);
        }
        DualStatus::EmptyDomain | DualStatus::UnequalZetas => {
            let rule = if dual.status == DualStatus::UnequalZetas {
                Rule::UnequalZetas
            } else {
                Rule::DualInfeasible
            };
            report.add(None, rule);
            let reasons: Vec<Reason> = report.reasons.clone();
            let witness = unbounded_witness(p, Some(&cp), &reasons, WitnessConfig::default());
            if witness.is_none() {
                log::warn!("dual is infeasible but no explicit witness was found");
            }
            cert.dual = Some(dual);
            cert.classification = Some(report);
            return Ok(Solution::unbounded(witness, cert));
        }
        DualStatus::Finite => {}
    }
    let point = primal_from_dual(&spec, &dual)?;
    let rec = recover_x(&point, &cp, &socp, opts.eps)?;
    report.resolve_deferred(&rec.unattained);
    let value = dual.value;
    let fx = p.objective(&rec.x);
    cert.recovery_gap = Some((fx - value).abs());
    if rec.attained && (fx - value).abs() > 1e-7 * (1.0 + value.abs()) {
        log::warn!("recovered point misses the dual value by {:e}", (fx - value).abs());
    }
    if !p.is_feasible(&rec.x, 1e-7) {
        log::warn!("recovered point violates the constraint by {:e}", p.violation(&rec.x));
    }
    cert.dual = Some(dual);
    cert.classification = Some(report);
    let status = if rec.attained {
        Status::Optimal
    } else {
        Status::FiniteUnattained
    };
    let mut sol = Solution::point(status, value, rec.x, cert);
    if !rec.attained {
        sol.eps = Some(opts.eps);
        sol.recovery = Some(Box::new(RecoveryState { cp, socp, point }));
    }
    Ok(sol)
}
