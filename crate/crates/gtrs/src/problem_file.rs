//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "D": [1, 0, 0, -1],
//!   "A": [1, 0, 0, 1],
//!   "e": [0, 1],
//!   "b": [0, 0],
//!   "kind": "ineq",
//!   "c": -1
//! }
//! ```
//!
//! Matrices are dense and row-major. `c` is a number for `"ineq"` and `"eq"`
//! and a pair `[c1, c2]` for `"interval"`. The optional `tol` object overrides
//! solver tolerances and `v` is the constant used by the S-lemma query.

use gtrs_core::linalg::{asymmetry, frobenius};
use gtrs_core::{Constraint, ConstraintKind, GtrsProblem, Matrix, ProblemError, Tolerances, Vector};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ProblemFileError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("kind {kind} needs {needs}")]
    ConstantShape { kind: &'static str, needs: &'static str },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ineq,
    Eq,
    Interval,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Ineq => "ineq",
            Kind::Eq => "eq",
            Kind::Interval => "interval",
        }
    }
}

impl From<ConstraintKind> for Kind {
    fn from(k: ConstraintKind) -> Self {
        match k {
            ConstraintKind::Inequality => Kind::Ineq,
            ConstraintKind::Equality => Kind::Eq,
            ConstraintKind::Interval => Kind::Interval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Scalar(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sym: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas: Option<f64>,
}

impl TolOverrides {
    pub fn apply(&self, tol: &mut Tolerances) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut tol.sym, self.sym);
        set(&mut tol.eig, self.eig);
        set(&mut tol.cluster, self.cluster);
        set(&mut tol.zero, self.zero);
        set(&mut tol.dual, self.dual);
        set(&mut tol.feas, self.feas);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub kind: Kind,
    pub c: ConstantSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
}

/// A problem read from a file plus anything worth reporting about the read.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: GtrsProblem,
    pub warnings: Vec<String>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn from_problem(p: &GtrsProblem) -> Self {
        let n = p.dim();
        let row_major = |m: &Matrix| m.transpose().as_slice().to_vec();
        let c = match p.constraint {
            Constraint::Inequality { c } | Constraint::Equality { c } => ConstantSpec::Scalar(c),
            Constraint::Interval { lower, upper } => ConstantSpec::Pair([lower, upper]),
        };
        Self {
            n,
            d: row_major(&p.d),
            a: row_major(&p.a),
            e: p.e.as_slice().to_vec(),
            b: p.b.as_slice().to_vec(),
            kind: p.kind().into(),
            c,
            tol: None,
            v: None,
        }
    }

    /// Builds the problem, with `kind` overriding the file's kind.
    ///
    /// Matrices that are not symmetric within `tol_sym` are symmetrized and a
    /// warning is recorded.
    pub fn to_problem(&self, kind: Option<Kind>, tol_sym: f64) -> Result<Loaded, ProblemFileError> {
        let n = self.n;
        let check = |what, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(ProblemFileError::DimensionMismatch { what, expected, found })
            }
        };
        check("D", n * n, self.d.len())?;
        check("A", n * n, self.a.len())?;
        check("e", n, self.e.len())?;
        check("b", n, self.b.len())?;

        let kind = kind.unwrap_or(self.kind);
        let constraint = match (kind, self.c) {
            (Kind::Ineq, ConstantSpec::Scalar(c)) => Constraint::Inequality { c },
            (Kind::Eq, ConstantSpec::Scalar(c)) => Constraint::Equality { c },
            (Kind::Eq, ConstantSpec::Pair([c1, c2])) if c1 == c2 => Constraint::Equality { c: -c1 },
            (Kind::Interval, ConstantSpec::Pair([lower, upper])) => Constraint::Interval { lower, upper },
            (Kind::Interval, ConstantSpec::Scalar(c)) => Constraint::Interval { lower: -c, upper: -c },
            (k, _) => {
                return Err(ProblemFileError::ConstantShape {
                    kind: k.name(),
                    needs: "a scalar \"c\"",
                })
            }
        };

        let mut warnings = Vec::new();
        let mut d = Matrix::from_row_slice(n, n, &self.d);
        let mut a = Matrix::from_row_slice(n, n, &self.a);
        for (name, m) in [("D", &mut d), ("A", &mut a)] {
            let asym = asymmetry(m);
            if asym > tol_sym * (1.0 + frobenius(m)) {
                let msg = format!("{name} is not symmetric (max asymmetry {asym:e}); using (M + M^T)/2");
                log::warn!("{msg}");
                warnings.push(msg);
                *m = (&*m + m.transpose()) * 0.5;
            }
        }
        let problem = GtrsProblem::with_symmetry_tol(
            d,
            Vector::from_column_slice(&self.e),
            a,
            Vector::from_column_slice(&self.b),
            constraint,
            tol_sym,
        )?;
        Ok(Loaded { problem, warnings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"{"n": 2, "D": [1, 0, 0, -1], "A": [1, 0, 0, 1], "e": [0, 1], "b": [0, 0], "kind": "ineq", "c": -1}"#;

    #[test]
    fn parses_and_builds() {
        let f = ProblemFile::from_json(BALL).unwrap();
        let p = f.to_problem(None, 1e-10).unwrap().problem;
        assert_eq!(p.constraint, Constraint::Inequality { c: -1.0 });
        assert_eq!(p.d[(1, 1)], -1.0);
    }

    #[test]
    fn interval_pair_and_kind_override() {
        let text = BALL.replace("\"ineq\", \"c\": -1", "\"interval\", \"c\": [-1, 2]");
        let f = ProblemFile::from_json(&text).unwrap();
        let p = f.to_problem(None, 1e-10).unwrap().problem;
        assert_eq!(p.constraint, Constraint::Interval { lower: -1.0, upper: 2.0 });
        assert!(matches!(f.to_problem(Some(Kind::Ineq), 1e-10), Err(ProblemFileError::ConstantShape { .. })));
        let eq = ProblemFile::from_json(BALL).unwrap().to_problem(Some(Kind::Eq), 1e-10).unwrap();
        assert_eq!(eq.problem.constraint, Constraint::Equality { c: -1.0 });
    }

    #[test]
    fn length_mismatch_is_reported() {
        let text = BALL.replace("\"e\": [0, 1]", "\"e\": [0]");
        let err = ProblemFile::from_json(&text).unwrap().to_problem(None, 1e-10).unwrap_err();
        assert!(matches!(err, ProblemFileError::DimensionMismatch { what: "e", .. }));
    }

    #[test]
    fn asymmetric_input_is_symmetrized_with_a_warning() {
        let text = BALL.replace("\"D\": [1, 0, 0, -1]", "\"D\": [1, 0.5, 0, -1]");
        let loaded = ProblemFile::from_json(&text).unwrap().to_problem(None, 1e-10).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.problem.d[(0, 1)], 0.25);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = BALL.replace("\"n\": 2", "\"n\": 2, \"extra\": 1");
        assert!(ProblemFile::from_json(&text).is_err());
    }

    #[test]
    fn round_trip_through_problem() {
        let f = ProblemFile::from_json(BALL).unwrap();
        let p = f.to_problem(None, 1e-10).unwrap().problem;
        assert_eq!(ProblemFile::from_problem(&p), f);
    }
}
