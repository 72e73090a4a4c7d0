//! One command applied to one problem file.

use std::path::Path;
use std::time::Instant;

use gtrs_core::canonical::{canonicalize, Canonicalization};
use gtrs_core::oracle::{brute_force_min, OracleConfig, OracleError};
use gtrs_core::slemma::SLemmaError;
use gtrs_core::{s_lemma, solve, GtrsProblem, SLemmaQuery, SolverOptions, Status};

use crate::conic::{self, Export};
use crate::problem_file::{Kind, ProblemFile, ProblemFileError};
use crate::report::{self, CanonicalReport, CertificateReport, Classification, Num, OracleReport, Report, SLemmaReport, Timings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Classify,
    Canonical,
    Slemma,
    Oracle,
    Export,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Classify => "classify",
            Command::Canonical => "canonical",
            Command::Slemma => "slemma",
            Command::Oracle => "oracle",
            Command::Export => "export",
        }
    }
}

/// Command line overrides shared by every command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub eps: Option<f64>,
    pub tol_eig: Option<f64>,
    pub tol_cluster: Option<f64>,
    pub tol_dual: Option<f64>,
    pub seed: u64,
    pub kind: Option<Kind>,
    /// Constant for `slemma`; overrides the file's `v`.
    pub v: Option<f64>,
    pub timings: bool,
}

#[derive(Debug, Clone)]
pub enum Output {
    Report(Box<Report>),
    /// Conic export text.
    Conic(String),
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: ProblemFileError },
    #[error("{path}: {msg}")]
    Usage { path: String, msg: String },
    #[error("{path}: internal error: {msg}")]
    Internal { path: String, msg: String },
}

impl RunError {
    /// Process exit code: 2 for bad input, 1 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Internal { .. } => 1,
            _ => 2,
        }
    }
}

pub fn run_path(cmd: Command, path: &Path, settings: &Settings) -> Result<Output, RunError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: name.clone(),
        source,
    })?;
    run_text(cmd, &name, &text, settings)
}

fn options(file: &ProblemFile, s: &Settings) -> SolverOptions {
    let mut opts = SolverOptions::default();
    if let Some(t) = &file.tol {
        t.apply(&mut opts.tol);
    }
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut opts.tol.eig, s.tol_eig);
    set(&mut opts.tol.cluster, s.tol_cluster);
    set(&mut opts.tol.dual, s.tol_dual);
    set(&mut opts.eps, s.eps);
    opts.seed = s.seed;
    opts
}

/// Runs `cmd` on the JSON problem in `text`; `name` labels the report.
pub fn run_text(cmd: Command, name: &str, text: &str, settings: &Settings) -> Result<Output, RunError> {
    let input = |source| RunError::Input {
        path: name.to_string(),
        source,
    };
    let internal = |msg: String| RunError::Internal {
        path: name.to_string(),
        msg,
    };
    let file = ProblemFile::from_json(text).map_err(input)?;
    let opts = options(&file, settings);
    let loaded = file.to_problem(settings.kind, opts.tol.sym).map_err(input)?;
    let p = &loaded.problem;
    let start = Instant::now();

    let mut out = match cmd {
        Command::Solve => {
            let s = solve(p, &opts).map_err(|e| internal(e.to_string()))?;
            report::validate(p, &s).map_err(internal)?;
            let mut r = Report::new(name, cmd.name(), s.status.name());
            r.value = Some(Num(s.value));
            r.x = s.x.as_ref().map(|x| x.iter().copied().collect());
            r.eps = if s.status == Status::FiniteUnattained { s.eps } else { None };
            r.reasons = report::reason_names(&s);
            r.certificate = Some(CertificateReport::from(&s));
            r
        }
        Command::Classify => {
            let s = solve(p, &opts).map_err(|e| internal(e.to_string()))?;
            let mut r = Report::new(name, cmd.name(), s.status.name());
            r.value = Some(Num(s.value));
            r.reasons = report::reason_names(&s);
            r.classification = s.certificate.classification.as_ref().map(Classification::from);
            r
        }
        Command::Canonical => match canonicalize(&p.a, &p.d, &opts.tol).map_err(|e| internal(e.to_string()))? {
            Canonicalization::Form(cf) => {
                let mut r = Report::new(name, cmd.name(), "form");
                r.canonical = Some(CanonicalReport::from_form(&cf));
                r
            }
            Canonicalization::Diagnostic(d) => {
                let mut r = Report::new(name, cmd.name(), "diagnostic");
                r.canonical = Some(CanonicalReport::from_diagnostic(&d));
                r
            }
        },
        Command::Slemma => {
            let v = settings.v.or(file.v).ok_or_else(|| RunError::Usage {
                path: name.to_string(),
                msg: "slemma needs a constant v (file field \"v\" or --v)".into(),
            })?;
            slemma_report(name, p, v, &opts).map_err(internal)?
        }
        Command::Oracle => oracle_report(name, p, settings.seed).map_err(internal)?,
        Command::Export => match conic::export(p, &opts.tol).map_err(|e| internal(e.to_string()))? {
            Export::Socp(socp) => return Ok(Output::Conic(conic::write_conic(&socp))),
            Export::Unbounded(rep) => {
                let mut r = Report::new(name, cmd.name(), Status::Unbounded.name());
                r.value = Some(Num(f64::NEG_INFINITY));
                r.classification = Some(Classification::from(&rep));
                r.reasons = rep.reasons.iter().map(|x| x.rule.name()).collect();
                r.reasons.dedup();
                r
            }
        },
    };
    out.warnings = loaded.warnings;
    if settings.timings {
        out.timings = Some(Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(Output::Report(Box::new(out)))
}

fn slemma_report(name: &str, p: &GtrsProblem, v: f64, opts: &SolverOptions) -> Result<Report, String> {
    let q = SLemmaQuery { problem: p.clone(), v };
    match s_lemma(&q, opts) {
        Ok(verdict) => {
            let mut r = Report::new(name, "slemma", if verdict.holds { "holds" } else { "fails" });
            r.value = Some(Num(verdict.value));
            r.slemma = Some(SLemmaReport::new(v, &verdict));
            Ok(r)
        }
        Err(SLemmaError::NotApplicable(why)) => {
            let mut r = Report::new(name, "slemma", "not_applicable");
            r.error = Some(why);
            Ok(r)
        }
        Err(e) => Err(e.to_string()),
    }
}

fn oracle_report(name: &str, p: &GtrsProblem, seed: u64) -> Result<Report, String> {
    let cfg = OracleConfig {
        seed,
        ..OracleConfig::default()
    };
    match brute_force_min(p, &cfg) {
        Ok(o) => {
            let status = if o.argmin.is_some() { "feasible" } else { "no_feasible_point" };
            let mut r = Report::new(name, "oracle", status);
            r.value = Some(Num(o.value));
            r.x = o.argmin.as_ref().map(|x| x.iter().copied().collect());
            r.oracle = Some(OracleReport::new(&o, seed));
            Ok(r)
        }
        Err(e @ OracleError::DimensionTooLarge(_)) => {
            let mut r = Report::new(name, "oracle", "not_applicable");
            r.error = Some(e.to_string());
            Ok(r)
        }
        Err(e) => Err(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMPLEX: &str = r#"{"n": 2, "D": [0, 1, 1, 0], "A": [1, 0, 0, -1], "e": [0, 0], "b": [0, 0], "kind": "ineq", "c": -1}"#;

    fn report(cmd: Command, text: &str) -> Report {
        match run_text(cmd, "t.json", text, &Settings::default()).unwrap() {
            Output::Report(r) => *r,
            Output::Conic(_) => panic!("expected a report"),
        }
    }

    #[test]
    fn classify_complex_pair() {
        let r = report(Command::Classify, COMPLEX);
        assert_eq!(r.status, "unbounded");
        assert_eq!(r.reasons, vec!["ComplexPair"]);
    }

    #[test]
    fn slemma_without_v_is_a_usage_error() {
        let err = run_text(Command::Slemma, "t.json", COMPLEX, &Settings::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn export_of_an_unbounded_pair_is_a_report() {
        let r = report(Command::Export, COMPLEX);
        assert_eq!(r.status, "unbounded");
    }

    #[test]
    fn bad_json_is_an_input_error() {
        let err = run_text(Command::Solve, "t.json", "{", &Settings::default()).unwrap_err();
        assert!(matches!(err, RunError::Input { .. }));
    }
}
