//! Brute-force reference minimizer for small problems.
//!
//! A box grid is evaluated, infeasible grid points are pulled onto the
//! constraint along the gradient of `q`, and the best few points are polished
//! by exact constrained line searches. The result is an upper bound on the
//! true minimum; it never claims optimality.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{sym_eig_unchecked, Matrix, Vector};
use crate::math::sqrt;
use crate::problem::{ConstraintKind, GtrsProblem};

pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub radius: f64,
    /// Points per axis before the total budget caps it.
    pub resolution: usize,
    pub refine_rounds: usize,
    /// Accepted `|h|` for equality constraints.
    pub band: f64,
    pub seed: u64,
    /// Cap on the number of grid points.
    pub max_points: usize,
    /// How many grid points are refined.
    pub starts: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            radius: 10.0,
            resolution: 41,
            refine_rounds: 60,
            band: 1e-9,
            seed: 0,
            max_points: 20_000,
            starts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("dimension {0} exceeds the oracle limit of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best objective found (`+inf` if no feasible point was seen).
    pub value: f64,
    pub argmin: Option<Vector>,
    pub resolution: usize,
    pub grid_points: usize,
    pub feasible_points: usize,
    /// Lowest objective seen along long feasible rays, with the point.
    pub unbounded_hint: Option<(f64, Vector)>,
}

struct Problem<'a> {
    p: &'a GtrsProblem,
    lo: f64,
    hi: f64,
    band: f64,
}

impl Problem<'_> {
    fn feasible(&self, x: &Vector) -> bool {
        let q = self.p.quadratic_part(x);
        let slack = self.band * (1.0 + q.abs());
        q >= self.lo - slack && q <= self.hi + slack
    }

    /// Sub-intervals of `[-smax, smax]` where `lo <= q(x + s d) <= hi`.
    fn line_feasible(&self, x: &Vector, d: &Vector, smax: f64) -> Vec<(f64, f64)> {
        let a2 = 0.5 * d.dot(&(&self.p.a * d));
        let a1 = (&self.p.a * x + &self.p.b).dot(d);
        let a0 = self.p.quadratic_part(x);
        let poly = |s: f64| (a2 * s + a1) * s + a0;
        let mut pts = vec![-smax, smax, 0.0];
        for level in [self.lo, self.hi] {
            if level.is_finite() {
                pts.extend(roots(a2, a1, a0 - level).into_iter().filter(|s| s.abs() < smax));
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        pts.dedup();
        let ok = |s: f64| {
            let v = poly(s);
            let slack = self.band * (1.0 + v.abs());
            v >= self.lo - slack && v <= self.hi + slack
        };
        let mut out = Vec::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if ok(0.5 * (a + b)) {
                out.push((a, b));
            }
        }
        for &s in &pts {
            if ok(s) {
                out.push((s, s));
            }
        }
        out
    }

    /// Best point on the line `x + s d` under the constraint.
    fn line_min(&self, x: &Vector, d: &Vector, smax: f64) -> Option<(f64, Vector)> {
        let c2 = 0.5 * d.dot(&(&self.p.d * d));
        let c1 = (&self.p.d * x + &self.p.e).dot(d);
        let f = |s: f64| (c2 * s + c1) * s;
        let mut best: Option<(f64, f64)> = None;
        for (a, b) in self.line_feasible(x, d, smax) {
            let mut cands = vec![a, b];
            if c2 > 0.0 {
                let s = -c1 / (2.0 * c2);
                if s > a && s < b {
                    cands.push(s);
                }
            }
            for s in cands {
                let v = f(s);
                if best.is_none_or(|bst| v < bst.1) {
                    best = Some((s, v));
                }
            }
        }
        best.map(|(s, _)| {
            let y = x + d * s;
            (self.p.objective(&y), y)
        })
    }

    /// Pull `x` onto the nearest admissible level of `q` along its gradient.
    fn retract(&self, x: &Vector) -> Option<Vector> {
        if self.feasible(x) {
            return Some(x.clone());
        }
        let g = &self.p.a * x + &self.p.b;
        if g.norm() == 0.0 {
            return None;
        }
        let a2 = 0.5 * g.dot(&(&self.p.a * &g));
        let a1 = g.dot(&g);
        let a0 = self.p.quadratic_part(x);
        let mut best: Option<f64> = None;
        for level in [self.lo, self.hi] {
            if !level.is_finite() {
                continue;
            }
            for s in roots(a2, a1, a0 - level) {
                if best.is_none_or(|b| s.abs() < b.abs()) {
                    best = Some(s);
                }
            }
        }
        let y = x + g * best?;
        self.feasible(&y).then_some(y)
    }
}

/// Real roots of `a s^2 + b s + c`.
fn roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
    if a.abs() <= 1e-14 * scale {
        if b.abs() > 1e-14 * scale {
            return vec![-c / b];
        }
        return Vec::new();
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = sqrt(disc);
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let nv = v.norm();
        if nv > 1e-3 {
            return v / nv;
        }
    }
}

/// Approximate minimum over `[-r, r]^n` intersected with the constraint.
pub fn brute_force_min(p: &GtrsProblem, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let n = p.dim();
    if n > MAX_DIM {
        return Err(OracleError::DimensionTooLarge(n));
    }
    if cfg.resolution < 3 || cfg.radius <= 0.0 {
        return Err(OracleError::InvalidConfig("resolution must be at least 3 and radius positive"));
    }
    let (off, lo, hi) = p.constraint.bounds();
    let band = if p.kind() == ConstraintKind::Equality {
        cfg.band
    } else {
        1e-12
    };
    let prob = Problem {
        p,
        lo: lo - off,
        hi: hi - off,
        band,
    };
    let mut res = cfg.resolution;
    while res > 3 && (res as u128).pow(n as u32) > cfg.max_points as u128 {
        res -= 1;
    }
    let total = res.pow(n as u32);
    let step = 2.0 * cfg.radius / (res - 1) as f64;

    // Keep the `starts` best feasible grid points.
    let mut best: Vec<(f64, Vector)> = Vec::new();
    let mut feasible = 0;
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let x = Vector::from_fn(n, |i, _| -cfg.radius + step * idx[i] as f64);
        if let Some(y) = prob.retract(&x) {
            feasible += 1;
            let f = p.objective(&y);
            if best.len() < cfg.starts || f < best[best.len() - 1].0 {
                let pos = best.partition_point(|b| b.0 <= f);
                best.insert(pos, (f, y));
                best.truncate(cfg.starts);
            }
        }
        for k in idx.iter_mut() {
            *k += 1;
            if *k < res {
                break;
            }
            *k = 0;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let smax = 4.0 * cfg.radius * sqrt(n as f64);
    let mut refined: Vec<(f64, Vector)> = Vec::new();
    for (f0, x0) in best {
        let (mut fx, mut x) = (f0, x0);
        for _ in 0..cfg.refine_rounds {
            let before = fx;
            let mut dirs: Vec<Vector> = (0..n)
                .map(|k| {
                    let mut v = Vector::zeros(n);
                    v[k] = 1.0;
                    v
                })
                .collect();
            for _ in 0..n {
                dirs.push(random_unit(n, &mut rng));
            }
            let g = &p.d * &x + &p.e;
            if g.norm() > 0.0 {
                dirs.push(&g / g.norm());
            }
            // Tangent directions of the constraint, for steps along its surface.
            let gq = &p.a * &x + &p.b;
            let gq_n = gq.norm();
            let mut tangents = Vec::new();
            if gq_n > 0.0 {
                let u = &gq / gq_n;
                let tg = &g - &u * u.dot(&g);
                if tg.norm() > 0.0 {
                    tangents.push(-&tg / tg.norm());
                }
                for _ in 0..2 {
                    let r = random_unit(n, &mut rng);
                    let t = &r - &u * u.dot(&r);
                    if t.norm() > 1e-6 {
                        tangents.push(&t / t.norm());
                    }
                }
            }
            for d in &dirs {
                if let Some((fy, y)) = prob.line_min(&x, d, smax) {
                    if fy < fx {
                        fx = fy;
                        x = y;
                    }
                }
            }
            for t in &tangents {
                let mut h = step;
                // Unbounded problems improve on every step; the budget and the
                // `smax` box end the walk.
                let mut budget = 200;
                while h > 1e-10 * step && budget > 0 {
                    budget -= 1;
                    let mut improved = false;
                    for sg in [1.0, -1.0] {
                        if let Some(y) = prob.retract(&(&x + t * (sg * h))) {
                            let fy = p.objective(&y);
                            if fy < fx && y.amax() <= smax {
                                fx = fy;
                                x = y;
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        h *= 0.5;
                    }
                }
            }
            if before - fx <= 1e-15 * (1.0 + fx.abs()) {
                break;
            }
        }
        refined.push((fx, x));
    }
    refined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let (value, argmin) = match refined.into_iter().next() {
        Some((f, x)) => (f, Some(x)),
        None => (f64::INFINITY, None),
    };

    // Long rays along eigen-directions, pulled back onto the constraint.
    let base = argmin.clone().unwrap_or_else(|| Vector::zeros(n));
    let mut dirs: Vec<Vector> = Vec::new();
    for m in [p.d.clone(), p.a.clone(), &p.d + &p.a, &p.d - &p.a] {
        let m: Matrix = m;
        let eig = sym_eig_unchecked(&m);
        for k in 0..n {
            dirs.push(eig.eigenvectors.column(k).into_owned());
        }
    }
    let mut hint: Option<(f64, Vector)> = None;
    for d in dirs {
        for sg in [1e3, -1e3] {
            if let Some(y) = prob.retract(&(&base + &d * sg)) {
                let f = p.objective(&y);
                if hint.as_ref().is_none_or(|h| f < h.0) {
                    hint = Some((f, y));
                }
            }
        }
    }

    Ok(OracleResult {
        value,
        argmin,
        resolution: res,
        grid_points: total,
        feasible_points: feasible,
        unbounded_hint: hint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Constraint;

    #[test]
    fn worked_example() {
        let p = GtrsProblem::from_slices(
            4,
            &[0., -1., 0., 0., -1., 1., 0., 0., 0., 0., -2., 0., 0., 0., 0., 2.],
            &[0., 2., 0., -1.],
            &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 2., 0., 0., 0., 0., 1.5],
            &[0.; 4],
            Constraint::Inequality { c: -1.25 },
        )
        .unwrap();
        let r = brute_force_min(&p, &OracleConfig::default()).unwrap();
        assert!(r.value <= -3.39, "{}", r.value);
        assert!(r.value >= -3.25 - 1.0 / 7.0 - 1e-9);
        assert!(p.is_feasible(r.argmin.as_ref().unwrap(), 1e-9));
    }

    #[test]
    fn ball() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., 1.], &[0., 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Inequality { c: -1.0 })
            .unwrap();
        let r = brute_force_min(&p, &OracleConfig::default()).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn equality_sphere() {
        let p = GtrsProblem::from_slices(2, &[1., 0., 0., -1.], &[0.5, 0.], &[1., 0., 0., 1.], &[0., 0.], Constraint::Equality { c: -1.0 })
            .unwrap();
        let r = brute_force_min(&p, &OracleConfig::default()).unwrap();
        // On x^2 + y^2 = 2 the objective is x^2 - 1 + x/2, smallest at x = -1/4.
        assert!((r.value + 17.0 / 16.0).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn unbounded_problem_terminates_with_a_hint() {
        // A^{-1} D has eigenvalues ±i.
        let p = GtrsProblem::from_slices(2, &[0., 1., 1., 0.], &[0., 0.], &[1., 0., 0., -1.], &[0., 0.], Constraint::Inequality { c: -1.0 })
            .unwrap();
        let r = brute_force_min(&p, &OracleConfig::default()).unwrap();
        assert!(r.value < -100.0, "{}", r.value);
        assert!(r.unbounded_hint.unwrap().0 < -1e5);
    }

    #[test]
    fn guard() {
        let p = GtrsProblem::from_slices(9, &[0.0; 81], &[0.0; 9], &[0.0; 81], &[0.0; 9], Constraint::Inequality { c: -1.0 }).unwrap();
        assert!(matches!(brute_force_min(&p, &OracleConfig::default()), Err(OracleError::DimensionTooLarge(9))));
    }
}
