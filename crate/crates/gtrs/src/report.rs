//! JSON reports.
//!
//! Non-finite numbers (unbounded or infeasible values, open multiplier
//! domains) are written as the strings `"inf"`, `"-inf"` and `"nan"` since
//! JSON has no literal for them.

use gtrs_core::canonical::{CanonicalForm, EarlyDiagnostic};
use gtrs_core::classify::Reason;
use gtrs_core::dual::DualResult;
use gtrs_core::oracle::OracleResult;
use gtrs_core::slemma::SLemmaCertificate;
use gtrs_core::solver::AssumptionReport;
use gtrs_core::{BlockPair, BoundednessReport, DiagnosticKind, GtrsProblem, SLemmaVerdict, Solution, Status};
use serde::{Serialize, Serializer};

/// A float that survives JSON when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type")]
pub enum BlockSummary {
    #[serde(rename = "1x1")]
    OneByOne { size: usize, alpha: f64, delta: f64 },
    #[serde(rename = "2x2")]
    TwoByTwo { size: usize, tau: f64, kappa: f64 },
    #[serde(rename = "zero")]
    Zero { size: usize },
}

impl BlockSummary {
    fn from_block(b: &BlockPair) -> Option<Self> {
        match *b {
            BlockPair::OneByOne { alpha, delta } => Some(Self::OneByOne { size: 1, alpha, delta }),
            BlockPair::TwoByTwo { tau, kappa } => Some(Self::TwoByTwo { size: 2, tau, kappa }),
            BlockPair::Zero => Some(Self::Zero { size: 1 }),
            BlockPair::Diagnostic(_) => None,
        }
    }
}

pub fn blocks(bs: &[BlockPair]) -> Vec<BlockSummary> {
    bs.iter().filter_map(BlockSummary::from_block).collect()
}

pub fn diagnostic_name(d: &DiagnosticKind) -> String {
    match *d {
        DiagnosticKind::JordanTooLarge(k) => format!("JordanTooLarge(size {k})"),
        DiagnosticKind::ComplexPair(re, im) => format!("ComplexPair({re} ± {im}i)"),
        DiagnosticKind::TypeBLarge(k) => format!("TypeBLarge(size {k})"),
        DiagnosticKind::SingularPencil(k) => format!("SingularPencil(size {k})"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReasonReport {
    pub rule: &'static str,
    pub block: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: &'static str,
    pub reasons: Vec<ReasonReport>,
    pub case_tags: Vec<String>,
}

impl From<&BoundednessReport> for Classification {
    fn from(r: &BoundednessReport) -> Self {
        Self {
            verdict: if r.is_unbounded() { "unbounded" } else { "possibly_bounded" },
            reasons: r
                .reasons
                .iter()
                .map(|&Reason { block, rule }| ReasonReport { rule: rule.name(), block })
                .collect(),
            case_tags: r.case_tags.iter().map(|t| format!("{t:?}")).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub status: String,
    pub nu: Num,
    /// `(nu_lower, nu_upper)` for two-sided constraints.
    pub nu_pair: Option<(f64, f64)>,
    pub value: Num,
    pub domain: (Num, Num),
    pub iterations: usize,
    pub active: Vec<bool>,
}

impl From<&DualResult> for DualReport {
    fn from(d: &DualResult) -> Self {
        Self {
            status: format!("{:?}", d.status),
            nu: Num(d.nu),
            nu_pair: d.is_finite().then(|| d.nu_pair()),
            value: Num(d.value),
            domain: (Num(d.domain.0), Num(d.domain.1)),
            iterations: d.iterations,
            active: d.active.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assumptions {
    pub feasible: bool,
    pub slater: bool,
    pub a_is_zero: bool,
    pub degenerate: bool,
    pub lower_degenerate: bool,
    pub upper_degenerate: bool,
    pub action: &'static str,
}

impl From<&AssumptionReport> for Assumptions {
    fn from(a: &AssumptionReport) -> Self {
        Self {
            feasible: a.feasible,
            slater: a.slater,
            a_is_zero: a.a_is_zero,
            degenerate: a.degenerate,
            lower_degenerate: a.lower_degenerate,
            upper_degenerate: a.upper_degenerate,
            action: a.action.name(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub dual: Option<DualReport>,
    pub blocks: Vec<BlockSummary>,
    pub diagnostics: Vec<String>,
    pub classification: Option<Classification>,
    pub assumptions: Assumptions,
    pub condition: Option<f64>,
    pub canonical_residual: Option<f64>,
    pub recovery_gap: Option<f64>,
    pub condition_warnings: Vec<String>,
}

impl From<&Solution> for CertificateReport {
    fn from(s: &Solution) -> Self {
        let c = &s.certificate;
        let mut condition_warnings = Vec::new();
        if c.ill_conditioned {
            condition_warnings.push(format!(
                "canonical congruence is ill-conditioned (cond {:e})",
                c.condition.unwrap_or(f64::NAN)
            ));
        }
        Self {
            dual: c.dual.as_ref().map(DualReport::from),
            blocks: blocks(&c.blocks),
            diagnostics: c.diagnostics.iter().map(diagnostic_name).collect(),
            classification: c.classification.as_ref().map(Classification::from),
            assumptions: (&c.assumptions).into(),
            condition: c.condition,
            canonical_residual: c.canonical_residual,
            recovery_gap: c.recovery_gap,
            condition_warnings,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalReport {
    pub blocks: Vec<BlockSummary>,
    pub zero_count: usize,
    pub shift: Option<f64>,
    pub condition: Option<f64>,
    pub ill_conditioned: bool,
    pub residual: Option<f64>,
    /// Rows of the congruence `S`.
    pub s: Vec<Vec<f64>>,
    pub diagnostics: Vec<String>,
}

impl CanonicalReport {
    pub fn from_form(cf: &CanonicalForm) -> Self {
        Self {
            blocks: blocks(&cf.blocks),
            zero_count: cf.zero_count,
            shift: Some(cf.mu),
            condition: Some(cf.condition),
            ill_conditioned: cf.ill_conditioned,
            residual: Some(cf.residual),
            s: cf.s.row_iter().map(|r| r.iter().copied().collect()).collect(),
            diagnostics: Vec::new(),
        }
    }

    pub fn from_diagnostic(d: &EarlyDiagnostic) -> Self {
        Self {
            blocks: Vec::new(),
            zero_count: d.zero_count,
            shift: None,
            condition: None,
            ill_conditioned: false,
            residual: None,
            s: Vec::new(),
            diagnostics: d.issues.iter().map(diagnostic_name).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SLemmaCertificateReport {
    Multiplier { mu: f64, min_eig: f64 },
    Value { value: Num },
    Violation { x: Vec<f64>, f: f64, violation: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SLemmaReport {
    pub v: f64,
    pub certificate: SLemmaCertificateReport,
}

impl SLemmaReport {
    pub fn new(v: f64, r: &SLemmaVerdict) -> Self {
        let certificate = match &r.certificate {
            SLemmaCertificate::Multiplier { mu, min_eig } => SLemmaCertificateReport::Multiplier {
                mu: *mu,
                min_eig: *min_eig,
            },
            SLemmaCertificate::Value { value } => SLemmaCertificateReport::Value { value: Num(*value) },
            SLemmaCertificate::Violation { x, f, violation } => SLemmaCertificateReport::Violation {
                x: x.iter().copied().collect(),
                f: *f,
                violation: *violation,
            },
        };
        Self { v, certificate }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub resolution: usize,
    pub grid_points: usize,
    pub feasible_points: usize,
    pub seed: u64,
    /// Lowest value seen along long feasible rays and the point reaching it.
    pub unbounded_hint: Option<(f64, Vec<f64>)>,
}

impl OracleReport {
    pub fn new(o: &OracleResult, seed: u64) -> Self {
        Self {
            resolution: o.resolution,
            grid_points: o.grid_points,
            feasible_points: o.feasible_points,
            seed,
            unbounded_hint: o.unbounded_hint.as_ref().map(|(v, x)| (*v, x.iter().copied().collect())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// One report per input file.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub file: String,
    pub command: &'static str,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    /// Gap target of `x` when it is an ε-optimal point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub reasons: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slemma: Option<SLemmaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Report {
    pub fn new(file: impl Into<String>, command: &'static str, status: impl Into<String>) -> Self {
        Self {
            file: file.into(),
            command,
            status: status.into(),
            value: None,
            x: None,
            eps: None,
            reasons: Vec::new(),
            certificate: None,
            classification: None,
            canonical: None,
            slemma: None,
            oracle: None,
            error: None,
            warnings: Vec::new(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Reasons attached to a solution, deduplicated in order.
pub fn reason_names(s: &Solution) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    if let Some(c) = &s.certificate.classification {
        for r in &c.reasons {
            if !out.contains(&r.rule.name()) {
                out.push(r.rule.name());
            }
        }
    }
    out
}

/// Checks that status, value and point agree before a solve report goes out.
pub fn validate(p: &GtrsProblem, s: &Solution) -> Result<(), String> {
    match s.status {
        Status::Unbounded if s.value != f64::NEG_INFINITY => Err(format!("unbounded with value {}", s.value)),
        Status::Infeasible if s.value != f64::INFINITY || s.x.is_some() => {
            Err("infeasible report carries a value or a point".into())
        }
        Status::Optimal | Status::FiniteUnattained | Status::ReducedUnconstrained => {
            let x = s.x.as_ref().ok_or("finite status without a point")?;
            if !s.value.is_finite() {
                return Err(format!("finite status with value {}", s.value));
            }
            if !p.is_feasible_scaled(x, 1e-6) {
                return Err(format!("returned point violates the constraint by {:e}", p.violation(x)));
            }
            let gap = p.objective(x) - s.value;
            let allowed = match (s.status, s.eps) {
                (Status::FiniteUnattained, Some(eps)) => eps + 1e-7 * (1.0 + s.value.abs()),
                _ => 1e-6 * (1.0 + s.value.abs()),
            };
            if gap.abs() > allowed {
                return Err(format!("objective at the point is off the value by {gap:e}"));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
