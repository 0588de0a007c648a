mod common;

use std::sync::Arc;

use common::six_sets;
use proptest::prelude::*;
use sparse_pd::bench::harness::run_suite;
use sparse_pd::bench::profile::{performance_profile, Cost};
use sparse_pd::config::SolverConfig;
use sparse_pd::problem::{ProblemInstance, SeparableQuadratic};
use sparse_pd::sets::{sparse_project, SetDescriptor, SupportSet};
use sparse_pd::solver::Solver;
use sparse_pd::stationarity::{q_sol, rg_s, Criterion};

fn vec_and_s() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (2usize..9).prop_flat_map(|n| (prop::collection::vec(-5.0f64..5.0, n), 1..=n))
}

fn start_for(set: &SetDescriptor, n: usize) -> Vec<f64> {
    let zeros = vec![0.0; n];
    if set.contains(&zeros, 1e-12) {
        zeros
    } else {
        let mut e = zeros;
        e[0] = 1.0;
        e
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_feasible_sparse_and_idempotent((x, s) in vec_and_s(), which in 0usize..6) {
        let set = six_sets()[which];
        let p = sparse_project(&x, &set, s).unwrap();
        prop_assert!(SupportSet::of(&p).len() <= s);
        prop_assert!(set.contains(&p, 1e-9), "{p:?} not in {set:?}");
        let again = sparse_project(&p, &set, s).unwrap();
        let moved = p.iter().zip(&again).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(moved <= 1e-9, "moved {moved}");
    }

    #[test]
    fn residual_is_nonnegative((x, s) in vec_and_s(), which in 0usize..6, seed in any::<u64>()) {
        let set = six_sets()[which];
        let y = sparse_project(&x, &set, s).unwrap();
        let g: Vec<f64> = (0..y.len()).map(|i| ((seed >> (i % 64)) & 7) as f64 - 3.5).collect();
        let r = rg_s(&y, &g, &set, s).unwrap();
        prop_assert!(r >= 0.0 && r.is_finite());
    }

    #[test]
    fn relative_gap_is_ordered(f_opt in -10.0f64..10.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let q = q_sol(f_opt + lo, f_opt, f_opt + hi);
        prop_assert!((0.0..=1.0).contains(&q) || (hi == 0.0 && lo == 0.0 && q == 0.0));
        prop_assert_eq!(q_sol(f_opt - a, f_opt, f_opt + b), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solvers_return_feasible_sparse_points(
        a in prop::collection::vec(0.5f64..20.0, 5),
        c in prop::collection::vec(-4.0f64..4.0, 5),
        s in 1usize..5,
        which in 0usize..6,
    ) {
        let set = six_sets()[which];
        let obj = Arc::new(SeparableQuadratic { a, c });
        let p = ProblemInstance::new("prop", set, s, start_for(&set, 5), obj).unwrap();
        let cfg = SolverConfig { nf2g_max: 2000, ..SolverConfig::default() };
        let records = run_suite(std::slice::from_ref(&p), &Solver::ALL, &cfg);
        for r in &records {
            prop_assert!(p.is_feasible(&r.x_best), "{} gave {:?}", r.solver, r.x_best);
            prop_assert!(r.f_best <= r.f0);
            prop_assert!(r.nf2g <= cfg.nf2g_max + 64);
        }
        for crit in [Criterion::Objective, Criterion::Strong] {
            for curve in performance_profile(&records, Cost::Nf2g, crit, 1e-3, cfg.nf2g_max, cfg.sec_max) {
                let mut prev = (1.0, 0.0);
                for &(tau, rho) in &curve.points {
                    prop_assert!(tau >= prev.0 && rho >= prev.1 && rho <= 1.0);
                    prev = (tau, rho);
                }
            }
        }
    }
}
