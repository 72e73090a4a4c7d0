mod common;

use common::*;
use gtrs_core::oracle::{brute_force_min, OracleConfig};
use gtrs_core::slemma::{lagrangian_matrix, SLemmaCertificate};
use gtrs_core::linalg::sym_eig;
use gtrs_core::{s_lemma, solve, Constraint, GtrsProblem, SLemmaQuery, SolverOptions, Status, Vector};
use proptest::prelude::*;
use rand::Rng;

fn feasible_within(p: &GtrsProblem, x: &Vector, tol: f64) -> bool {
    p.violation(x) <= tol * (1.0 + p.constraint.scale())
}

#[test]
fn recovered_points_are_feasible_for_every_constraint_kind() {
    let opts = SolverOptions::default();
    for seed in 0..150u64 {
        let problems = [bounded_instance(seed), two_sided_instance(seed, false), two_sided_instance(seed, true)];
        for p in problems {
            let s = solve(&p, &opts).unwrap();
            assert!(s.is_finite(), "seed {seed}: {:?}", s.status);
            let x = s.x.as_ref().unwrap();
            assert!(feasible_within(&p, x, 1e-7), "seed {seed} {:?}: violation {:e}", p.kind(), p.violation(x));
            assert!((p.objective(x) - s.value).abs() <= 1e-7 * (1.0 + s.value.abs()), "seed {seed}");
        }
    }
}

#[test]
fn epsilon_points_improve_as_epsilon_shrinks() {
    let p = GtrsProblem::from_slices(2, &[0., -1., -1., 1.], &[0., 0.], &[0., 1., 1., 0.], &[0., 0.], Constraint::Inequality { c: 1.0 }).unwrap();
    let s = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(s.status, Status::FiniteUnattained);
    let mut eps = 1e-1;
    let mut last = f64::INFINITY;
    while eps > 1e-9 {
        let x = s.epsilon_point(eps).unwrap();
        let gap = p.objective(&x) - s.value;
        assert!(gap > 0.0 && gap <= eps);
        assert!(gap <= last, "gap grew from {last} to {gap}");
        assert!(feasible_within(&p, &x, 1e-7));
        last = gap;
        eps *= 0.5;
    }
}

#[test]
fn weak_and_strong_duality_against_the_oracle() {
    let opts = SolverOptions::default();
    let cfg = OracleConfig::default();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 40 {
        seed += 1;
        let p = bounded_instance(50_000 + seed);
        if p.dim() > 4 {
            continue;
        }
        let s = solve(&p, &opts).unwrap();
        if s.x.as_ref().unwrap().amax() > 0.7 * cfg.radius {
            continue;
        }
        let o = brute_force_min(&p, &cfg).unwrap();
        let x = o.argmin.unwrap();
        assert!(s.value <= p.objective(&x) + 1e-8, "seed {seed}: weak duality");
        // Random feasible samples never beat the dual value either.
        let mut r = rng(seed);
        for _ in 0..200 {
            let y = random_vector(p.dim(), cfg.radius, &mut r);
            if p.violation(&y) == 0.0 {
                assert!(s.value <= p.objective(&y) + 1e-8);
            }
        }
        let rel = (o.value - s.value).abs() / (1.0 + s.value.abs());
        assert!(rel <= 1e-4, "seed {seed}: dual {} oracle {}", s.value, o.value);
        checked += 1;
    }
}

#[test]
fn linear_equalities_skip_the_dual() {
    let mut r = rng(3);
    for strategy in [gtrs_core::problem::EqualityStrategy::NullSpace, gtrs_core::problem::EqualityStrategy::Squaring] {
        for _ in 0..20 {
            let n = r.random_range(2..5usize);
            let p = problem(
                gtrs_core::Matrix::zeros(n, n),
                gtrs_core::Matrix::identity(n, n),
                random_vector(n, 1.0, &mut r),
                random_vector(n, 1.0, &mut r),
                Constraint::Equality { c: r.random_range(-1.0..1.0) },
            );
            let opts = SolverOptions {
                equality_strategy: strategy,
                ..SolverOptions::default()
            };
            let s = solve(&p, &opts).unwrap();
            assert!(s.is_finite());
            if strategy == gtrs_core::problem::EqualityStrategy::NullSpace {
                assert!(s.certificate.dual.is_none());
            }
            // Closed form: minimize |x|^2/2 + e.x on b.x = -c.
            let (b, e) = (&p.b, &p.e);
            let Constraint::Equality { c } = p.constraint else { unreachable!() };
            let lam = (-c - (-e).dot(b)) / b.dot(b);
            let x = -e + b * lam;
            assert!((s.value - p.objective(&x)).abs() <= 1e-9 * (1.0 + s.value.abs()), "{strategy:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn s_lemma_is_monotone_in_v(seed in any::<u64>(), bump in 0.0f64..5.0) {
        let (p, v) = slemma_query(seed);
        let opts = SolverOptions::default();
        let a = s_lemma(&SLemmaQuery { problem: p.clone(), v }, &opts).unwrap();
        let b = s_lemma(&SLemmaQuery { problem: p, v: v + bump }, &opts).unwrap();
        prop_assert!(!a.holds || b.holds);
    }

    #[test]
    fn s_lemma_certificates_verify(seed in any::<u64>()) {
        let (p, v) = slemma_query(seed);
        let r = s_lemma(&SLemmaQuery { problem: p.clone(), v }, &SolverOptions::default()).unwrap();
        match r.certificate {
            SLemmaCertificate::Multiplier { mu, min_eig } => {
                prop_assert!(r.holds);
                prop_assert!(min_eig >= -1e-7);
                // Independent check of the implied quadratic along sampled directions.
                let m = lagrangian_matrix(&p, v, mu);
                let eig = sym_eig(&m, 1e-8).unwrap();
                prop_assert!(eig.min() >= -1e-7 * (1.0 + m.norm()));
                let mut g = rng(seed);
                for _ in 0..50 {
                    let x = random_vector(p.dim(), 10.0, &mut g);
                    let h = p.constraint_value(&x);
                    prop_assert!(p.objective(&x) + v + mu * h >= -1e-7 * (1.0 + x.norm_squared()));
                }
            }
            SLemmaCertificate::Violation { ref x, .. } => {
                prop_assert!(!r.holds);
                prop_assert!(p.is_feasible_scaled(x, 1e-8));
                prop_assert!(p.objective(x) + v <= -1e-8);
            }
            SLemmaCertificate::Value { .. } => prop_assert!(r.holds),
        }
    }
}
