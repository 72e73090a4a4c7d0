//! Line-oriented text format for the cone program.
//!
//! ```text
//! gtrs-conic 1
//! kind ineq
//! dims 2 1
//! objective <c0> <offset> | <e_1> .. <e_l> | <delta_1> .. <delta_l> | <zeta_1> .. <zeta_m>
//! linear <c> <lower> <upper> | <b_1> .. <b_l> | <alpha_1> .. <alpha_l> | 1 .. 1
//! zvar <j> <e_even_j> <attainable_j>
//! rcone <i>
//! ```
//!
//! The program is
//! `min delta^T y + e^T x + zeta^T z + c0 + offset` subject to
//! `lower <= alpha^T y + b^T x + 1^T z + c <= upper` and one rotated cone
//! `x_i^2 / 2 <= y_i` per `rcone` row. Every number is written with 17
//! significant digits, so reading a file back gives the same bits. Lines
//! starting with `#` and blank lines are ignored.

use std::fmt::Write as _;

use gtrs_core::canonical::{canonicalize, Canonicalization};
use gtrs_core::classify::{screen_diagnostic, screen_structure, BoundednessReport};
use gtrs_core::reformulate::{build_socp, CanonicalProblem, SocpProblem};
use gtrs_core::{ConstraintKind, GtrsProblem, SolveError, Tolerances};

use crate::problem_file::Kind;

pub const HEADER: &str = "gtrs-conic 1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConicError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing {0} row")]
    Missing(&'static str),
}

/// Either the cone program or the reasons it does not exist.
#[derive(Debug, Clone)]
pub enum Export {
    Socp(SocpProblem),
    Unbounded(BoundednessReport),
}

/// Canonical form, structural screen and cone program for `p`.
pub fn export(p: &GtrsProblem, tol: &Tolerances) -> Result<Export, SolveError> {
    let cf = match canonicalize(&p.a, &p.d, tol)? {
        Canonicalization::Diagnostic(diag) => return Ok(Export::Unbounded(screen_diagnostic(&diag))),
        Canonicalization::Form(cf) => cf,
    };
    let cp = CanonicalProblem::new(p, &cf, tol)?;
    let report = screen_structure(&cf, &cp);
    if report.is_unbounded() {
        return Ok(Export::Unbounded(report));
    }
    Ok(Export::Socp(build_socp(&cp)?))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_all(out: &mut String, vals: &[f64]) {
    for v in vals {
        out.push(' ');
        out.push_str(&num(*v));
    }
}

pub fn write_conic(s: &SocpProblem) -> String {
    let mut out = String::new();
    let m = s.zeta.len();
    let kind = Kind::from(s.kind).name();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "kind {kind}").unwrap();
    writeln!(out, "dims {} {m}", s.l()).unwrap();

    out.push_str("objective ");
    out.push_str(&num(s.c0));
    out.push(' ');
    out.push_str(&num(s.obj_offset));
    for part in [&s.e, &s.delta, &s.zeta] {
        out.push_str(" |");
        push_all(&mut out, part);
    }
    out.push('\n');

    write!(out, "linear {} {} {}", num(s.c), num(s.lower), num(s.upper)).unwrap();
    for part in [&s.b, &s.alpha, &vec![1.0; m]] {
        out.push_str(" |");
        push_all(&mut out, part);
    }
    out.push('\n');

    for j in 0..m {
        writeln!(out, "zvar {j} {} {}", num(s.e_even[j]), u8::from(s.z_attainable[j])).unwrap();
    }
    for i in 0..s.l() {
        writeln!(out, "rcone {i}").unwrap();
    }
    out
}

struct Rows<'a> {
    line: usize,
    text: &'a str,
}

impl Rows<'_> {
    fn err(&self, msg: impl Into<String>) -> ConicError {
        ConicError::Syntax {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn float(&self, tok: &str) -> Result<f64, ConicError> {
        tok.parse().map_err(|_| self.err(format!("bad number {tok:?}")))
    }

    fn floats(&self, part: &str, want: usize) -> Result<Vec<f64>, ConicError> {
        let v = part
            .split_whitespace()
            .map(|t| self.float(t))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != want {
            return Err(self.err(format!("expected {want} values, found {}", v.len())));
        }
        Ok(v)
    }

    /// `head | p1 | p2 | p3`, with `head` holding `n_head` numbers.
    fn sections(&self, n_head: usize, dims: (usize, usize)) -> Result<[Vec<f64>; 4], ConicError> {
        let parts: Vec<&str> = self.text.split('|').collect();
        if parts.len() != 4 {
            return Err(self.err("expected four '|'-separated sections"));
        }
        Ok([
            self.floats(parts[0], n_head)?,
            self.floats(parts[1], dims.0)?,
            self.floats(parts[2], dims.0)?,
            self.floats(parts[3], dims.1)?,
        ])
    }
}

pub fn read_conic(text: &str) -> Result<SocpProblem, ConicError> {
    let mut header = false;
    let mut kind = None;
    let mut dims: Option<(usize, usize)> = None;
    let mut objective = None;
    let mut linear = None;
    let mut zvars: Vec<Option<(f64, bool)>> = Vec::new();
    let mut cones: Vec<bool> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let row = Rows { line: k + 1, text: rest };
        let need_dims = || dims.ok_or_else(|| row.err("dims must come first"));
        match key {
            "gtrs-conic" if rest.trim() == "1" => header = true,
            "gtrs-conic" => return Err(row.err(format!("unsupported version {rest:?}"))),
            "kind" => {
                kind = Some(match rest.trim() {
                    "ineq" => ConstraintKind::Inequality,
                    "eq" => ConstraintKind::Equality,
                    "interval" => ConstraintKind::Interval,
                    other => return Err(row.err(format!("unknown kind {other:?}"))),
                })
            }
            "dims" => {
                let v: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| row.err(format!("bad size {t:?}"))))
                    .collect::<Result<_, _>>()?;
                let [l, m] = v[..] else {
                    return Err(row.err("dims needs two sizes"));
                };
                dims = Some((l, m));
                zvars = vec![None; m];
                cones = vec![false; l];
            }
            "objective" => objective = Some(row.sections(2, need_dims()?)?),
            "linear" => {
                let s = row.sections(3, need_dims()?)?;
                if s[3].iter().any(|&v| v != 1.0) {
                    return Err(row.err("z coefficients in the linear row must be 1"));
                }
                linear = Some(s);
            }
            "zvar" => {
                need_dims()?;
                let t: Vec<&str> = rest.split_whitespace().collect();
                let [j, ev, att] = t[..] else {
                    return Err(row.err("zvar needs index, e_even, attainable"));
                };
                let j: usize = j.parse().map_err(|_| row.err("bad zvar index"))?;
                let att = match att {
                    "0" => false,
                    "1" => true,
                    _ => return Err(row.err("attainable must be 0 or 1")),
                };
                let slot = zvars.get_mut(j).ok_or_else(|| row.err("zvar index out of range"))?;
                *slot = Some((row.float(ev)?, att));
            }
            "rcone" => {
                need_dims()?;
                let i: usize = rest.trim().parse().map_err(|_| row.err("bad cone index"))?;
                *cones.get_mut(i).ok_or_else(|| row.err("cone index out of range"))? = true;
            }
            other => return Err(row.err(format!("unknown row {other:?}"))),
        }
    }

    if !header {
        return Err(ConicError::Missing("gtrs-conic"));
    }
    let kind = kind.ok_or(ConicError::Missing("kind"))?;
    dims.ok_or(ConicError::Missing("dims"))?;
    let [head, e, delta, zeta] = objective.ok_or(ConicError::Missing("objective"))?;
    let [lin, b, alpha, _] = linear.ok_or(ConicError::Missing("linear"))?;
    if cones.iter().any(|c| !c) {
        return Err(ConicError::Missing("rcone"));
    }
    let zv: Vec<(f64, bool)> = zvars
        .into_iter()
        .collect::<Option<_>>()
        .ok_or(ConicError::Missing("zvar"))?;
    Ok(SocpProblem {
        kind,
        alpha,
        delta,
        b,
        e,
        zeta,
        e_even: zv.iter().map(|z| z.0).collect(),
        z_attainable: zv.iter().map(|z| z.1).collect(),
        c: lin[0],
        c0: head[0],
        obj_offset: head[1],
        lower: lin[1],
        upper: lin[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SocpProblem {
        SocpProblem {
            kind: ConstraintKind::Inequality,
            alpha: vec![1.0, -1.0],
            delta: vec![0.1, 1.0 / 3.0],
            b: vec![-0.0, 2.5e-300],
            e: vec![1e10, -7.0],
            zeta: vec![core::f64::consts::PI],
            e_even: vec![f64::INFINITY],
            z_attainable: vec![true],
            c: -1.25,
            c0: -2.0,
            obj_offset: 0.0,
            lower: f64::NEG_INFINITY,
            upper: 0.0,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let back = read_conic(&write_conic(&s)).unwrap();
        assert_eq!(back, s);
        assert!(back.b[0].is_sign_negative());
    }

    #[test]
    fn empty_blocks_round_trip() {
        let s = SocpProblem {
            alpha: vec![],
            delta: vec![],
            b: vec![],
            e: vec![],
            kind: ConstraintKind::Interval,
            lower: -1.0,
            upper: 2.0,
            ..sample()
        };
        assert_eq!(read_conic(&write_conic(&s)).unwrap(), s);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let text = write_conic(&sample());
        let broken = text.replace("rcone 1\n", "");
        assert_eq!(read_conic(&broken), Err(ConicError::Missing("rcone")));
        let broken = text.replace("kind ineq", "kind soc");
        assert!(matches!(read_conic(&broken), Err(ConicError::Syntax { line: 2, .. })));
        assert!(read_conic(&text.replace("linear", "# linear")).is_err());
    }
}
