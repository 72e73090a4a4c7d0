mod common;

use common::*;
use gtrs_core::canonical::{canonicalize, joint_null_space, BlockPair, Canonicalization};
use gtrs_core::classify::CaseTag;
use gtrs_core::{solve, Matrix, SolverOptions, Tolerances, Vector};
use proptest::prelude::*;
use rand::Rng;

fn form(a: &Matrix, d: &Matrix) -> gtrs_core::CanonicalForm {
    match canonicalize(a, d, &Tolerances::default()).unwrap() {
        Canonicalization::Form(cf) => cf,
        Canonicalization::Diagnostic(diag) => panic!("unexpected diagnostic {diag:?}"),
    }
}

/// `(type, tau or sign, kappa)` per block, sorted.
fn multiset(blocks: &[BlockPair]) -> Vec<(u8, i8, f64)> {
    let sgn = |x: f64| if x > 0.0 { 1 } else { -1 };
    let mut out: Vec<(u8, i8, f64)> = blocks
        .iter()
        .map(|b| match *b {
            BlockPair::OneByOne { alpha, delta } if alpha != 0.0 => (0, sgn(alpha), delta / alpha),
            BlockPair::OneByOne { delta, .. } => (1, sgn(delta), 0.0),
            BlockPair::TwoByTwo { tau, kappa } => (2, sgn(tau), kappa),
            BlockPair::Zero => (3, 0, 0.0),
            BlockPair::Diagnostic(_) => panic!("diagnostic block"),
        })
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

fn close(x: &[(u8, i8, f64)], y: &[(u8, i8, f64)], tol: f64) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.0 == q.0 && p.1 == q.1 && (p.2 - q.2).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip_and_scramble_invariance(seed in any::<u64>(), n in 1usize..=8, case in 0u64..3) {
        let mut r = rng(seed);
        let blocks = planted_blocks(n, case, &mut r);
        let (a, d) = plant(&blocks, &random_congruence(n, &mut r));
        let cf = form(&a, &d);
        let bound = 1e-8 * (1.0 + a.norm() + d.norm());
        let (ha, hd) = cf.assembled();
        let s = &cf.s;
        let ra = (s.transpose() * &a * s - ha).norm();
        let rd = (s.transpose() * &d * s - hd).norm();
        prop_assert!(ra.max(rd) <= bound, "residual {:e} / {:e}", ra.max(rd), bound);
        prop_assert!(close(&multiset(&blocks), &multiset(&cf.blocks), 1e-6));

        let t = random_congruence(n, &mut r);
        let cf2 = form(&sym(&(t.transpose() * &a * &t)), &sym(&(t.transpose() * &d * &t)));
        prop_assert!(close(&multiset(&cf.blocks), &multiset(&cf2.blocks), 1e-6));
        prop_assert_eq!(cf.zero_count, joint_null_space(&a, &d, 1e-9).ncols());
    }

    #[test]
    fn diagonal_pairs_have_no_two_by_two_blocks(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let a = Matrix::from_diagonal(&Vector::from_fn(n, |_, _| [1.0, -1.0, 0.0, 2.5][r.random_range(0..4usize)]));
        let d = Matrix::from_diagonal(&Vector::from_fn(n, |_, _| r.random_range(-2.0..2.0)));
        match canonicalize(&a, &d, &Tolerances::default()).unwrap() {
            Canonicalization::Form(cf) => prop_assert_eq!(cf.two_by_two_count(), 0),
            Canonicalization::Diagnostic(diag) => prop_assert!(false, "diagnostic {:?}", diag),
        }
    }

    #[test]
    fn case_tags_survive_scrambling(seed in any::<u64>()) {
        let p = bounded_instance(3 * (seed % 10_000) + 2);
        let mut r = rng(seed);
        let n = p.dim();
        let t = random_congruence(n, &mut r);
        let q = problem(
            sym(&(t.transpose() * &p.a * &t)),
            sym(&(t.transpose() * &p.d * &t)),
            t.transpose() * &p.e,
            t.transpose() * &p.b,
            p.constraint,
        );
        let opts = SolverOptions::default();
        let tags = |s: &gtrs_core::Solution| {
            let mut v: Vec<u8> = s.certificate.classification.as_ref().unwrap().case_tags.iter().map(|t| *t as u8).collect();
            v.sort_unstable();
            v
        };
        let (s1, s2) = (solve(&p, &opts).unwrap(), solve(&q, &opts).unwrap());
        prop_assert_eq!(tags(&s1), tags(&s2));
        prop_assert!((s1.value - s2.value).abs() <= 1e-7 * (1.0 + s1.value.abs()));
    }

    #[test]
    fn diagonalizable_bounded_problems_are_attained(seed in any::<u64>()) {
        // Kinds 0 and 1 of the generator plant only 1x1 blocks.
        let p = bounded_instance(3 * (seed % 10_000) + seed % 2);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        prop_assert!(s.is_finite());
        prop_assert!(s.status != gtrs_core::Status::FiniteUnattained);
        if let Some(c) = &s.certificate.classification {
            prop_assert!(!c.case_tags.iter().any(|t| matches!(t, CaseTag::Deferred | CaseTag::Case2)));
        }
    }
}
