#![allow(dead_code)]

use gtrs_core::canonical::{assemble, BlockPair};
use gtrs_core::{Constraint, GtrsProblem, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(n: usize, scale: f64, r: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| r.random_range(-scale..scale))
}

/// Orthogonal matrix times a diagonal in `[0.5, 2]`, so the condition number stays small.
pub fn random_congruence(n: usize, r: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    let q = g.qr().q();
    let scale = Matrix::from_diagonal(&Vector::from_fn(n, |_, _| r.random_range(0.5..2.0)));
    q * scale
}

/// `(A, D) = S^{-T} (A-hat, D-hat) S^{-1}` for planted blocks.
pub fn plant(blocks: &[BlockPair], s: &Matrix) -> (Matrix, Matrix) {
    let (ha, hd) = assemble(blocks);
    let si = s.clone().try_inverse().expect("planted congruence is invertible");
    let a = si.transpose() * ha * &si;
    let d = si.transpose() * hd * &si;
    (sym(&a), sym(&d))
}

pub fn sym(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn problem(a: Matrix, d: Matrix, e: Vector, b: Vector, c: Constraint) -> GtrsProblem {
    GtrsProblem::new(d, e, a, b, c).expect("valid problem")
}

/// `(E, E J(kappa, m))` blocks of size `m`, as dense matrices.
pub fn jordan_pair(tau: f64, kappa: f64, m: usize) -> (Matrix, Matrix) {
    let e = Matrix::from_fn(m, m, |i, j| if i + j == m - 1 { tau } else { 0.0 });
    let j = Matrix::from_fn(m, m, |i, k| {
        if i == k {
            kappa
        } else if i + 1 == k {
            1.0
        } else {
            0.0
        }
    });
    let d = &e * j;
    assert!((&d - d.transpose()).norm() < 1e-14);
    (e, d)
}

pub fn block_diag(parts: &[Matrix]) -> Matrix {
    let n: usize = parts.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(n, n);
    let mut at = 0;
    for m in parts {
        let k = m.nrows();
        out.view_mut((at, at), (k, k)).copy_from(m);
        at += k;
    }
    out
}

/// The four-variable instance with optimal value `-3.3929`.
pub fn worked_example() -> GtrsProblem {
    GtrsProblem::from_slices(
        4,
        &[0., -1., 0., 0., -1., 1., 0., 0., 0., 0., -2., 0., 0., 0., 0., 2.],
        &[0., 2., 0., -1.],
        &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 2., 0., 0., 0., 0., 1.5],
        &[0.; 4],
        Constraint::Inequality { c: -1.25 },
    )
    .unwrap()
}

/// Result line in the acceptance output.
pub fn report(id: usize, name: &str, ok: bool, detail: &str) {
    println!("criterion {id} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

/// Random block list of total size `n`. `case` 0 keeps `A` nonsingular, 1 adds an
/// `A`-singular 1x1 pair, 2 also adds zero blocks.
pub fn planted_blocks(n: usize, case: u64, r: &mut ChaCha8Rng) -> Vec<BlockPair> {
    let pool = |r: &mut ChaCha8Rng| -> f64 {
        if r.random_bool(0.3) {
            r.random_range(-2..=2) as f64
        } else {
            r.random_range(-3.0..3.0)
        }
    };
    let sign = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut blocks = Vec::new();
    let mut left = n;
    if case == 2 && left > 1 {
        let z = r.random_range(1..=left.min(3));
        blocks.extend(std::iter::repeat_n(BlockPair::Zero, z));
        left -= z;
    }
    if case >= 1 && left > 1 {
        blocks.push(BlockPair::OneByOne { alpha: 0.0, delta: sign(r) });
        left -= 1;
    }
    while left > 0 {
        if left >= 2 && r.random_bool(0.3) {
            blocks.push(BlockPair::TwoByTwo { tau: sign(r), kappa: pool(r) });
            left -= 2;
        } else {
            let alpha = sign(r);
            blocks.push(BlockPair::OneByOne { alpha, delta: alpha * pool(r) });
            left -= 1;
        }
    }
    blocks
}

/// Bounded Slater instance with a planted Lagrange multiplier.
pub fn bounded_instance(seed: u64) -> GtrsProblem {
    let mut r = rng(seed);
    let n = r.random_range(2..=6usize);
    let s = random_congruence(n, &mut r);
    let t0 = r.random_range(0.2..2.0);
    let mut blocks = Vec::new();
    let mut e_hat = Vec::new();
    let mut b_hat = Vec::new();
    let kind = seed % 3;
    let mut left = n;
    if kind == 2 && n >= 2 {
        // One 2x2 block with kappa = -t0 so the multiplier is pinned to t0.
        blocks.push(BlockPair::TwoByTwo { tau: 1.0, kappa: -t0 });
        let b1 = r.random_range(-1.0..1.0);
        b_hat.extend([b1, r.random_range(-1.0..1.0)]);
        e_hat.extend([-t0 * b1, r.random_range(0.5..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 }]);
        left -= 2;
    }
    for _ in 0..left {
        let alpha: f64 = match kind {
            0 => 1.0,
            _ => [1.0, -1.0, 0.0][r.random_range(0..3usize)],
        };
        let slack = r.random_range(0.2..2.0);
        let delta = if kind == 0 { r.random_range(-2.0..2.0) } else { -t0 * alpha + slack };
        blocks.push(BlockPair::OneByOne { alpha, delta });
        e_hat.push(r.random_range(-1.0..1.0));
        b_hat.push(r.random_range(-1.0..1.0));
    }
    let (a, d) = plant(&blocks, &s);
    let si_t = s.clone().try_inverse().unwrap().transpose();
    let e = &si_t * Vector::from_vec(e_hat);
    let b = &si_t * Vector::from_vec(b_hat);
    let c = -r.random_range(0.5..2.0);
    problem(a, d, e, b, Constraint::Inequality { c })
}

/// Simultaneously diagonalizable pair with a planted free-sign multiplier.
pub fn two_sided_instance(seed: u64, interval: bool) -> GtrsProblem {
    let mut r = rng(seed);
    let n = r.random_range(2..=5usize);
    let s = random_congruence(n, &mut r);
    let t0 = r.random_range(-2.0..2.0);
    let blocks: Vec<BlockPair> = (0..n)
        .map(|i| {
            let alpha = if i == 0 { 1.0 } else if i == 1 { -1.0 } else if r.random_bool(0.5) { 1.0 } else { -1.0 };
            BlockPair::OneByOne {
                alpha,
                delta: -t0 * alpha + r.random_range(0.2..2.0),
            }
        })
        .collect();
    let (a, d) = plant(&blocks, &s);
    let e = random_vector(n, 1.0, &mut r);
    let b = random_vector(n, 1.0, &mut r);
    let constraint = if interval {
        Constraint::Interval {
            lower: -r.random_range(0.2..1.5),
            upper: r.random_range(0.2..1.5),
        }
    } else {
        Constraint::Equality { c: r.random_range(-1.0..1.0) }
    };
    problem(a, d, e, b, constraint)
}

/// Random S-lemma query `(problem, v)` with `h(0) < 0`.
pub fn slemma_query(seed: u64) -> (GtrsProblem, f64) {
    let mut r = rng(seed);
    let n = r.random_range(1..=4usize);
    let d = sym(&Matrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)));
    let a = if r.random_bool(0.5) {
        Matrix::identity(n, n) + sym(&Matrix::from_fn(n, n, |_, _| r.random_range(-0.3..0.3)))
    } else {
        sym(&Matrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)))
    };
    let e = random_vector(n, 1.0, &mut r);
    let b = random_vector(n, 0.5, &mut r);
    let c = -r.random_range(0.5..2.0);
    let v = r.random_range(-1.0..12.0);
    let p = problem(a, d, e, b, Constraint::Inequality { c });
    (p, v)
}
