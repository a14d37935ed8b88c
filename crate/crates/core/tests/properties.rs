mod common;

use expansive::checks::{
    check_condition, check_phi_expansive, check_wang_expansive, reevaluate, Condition, ExpansiveProblem, Sampling,
};
use expansive::growth::{classify_theta, default_probe_scales, default_r_grid, GrowthFunction};
use expansive::mapping::{build_right_inverse, Mapping};
use expansive::solve::{solve_common, solve_preimage, SolverConfig};
use expansive::space::{seeded_rng, verify_metric_axioms, PartialOrder, Point, Space};
use expansive::TAU_EQ;
use proptest::prelude::*;
use rand::Rng;

fn value_of(p: &Point) -> f64 {
    match p {
        Point::Zero => 0.0,
        Point::Recip(r) => 1.0 / *r as f64,
        other => panic!("not a shrinking-fractions point: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shrinking_fractions_metric_is_max(depth in 1u64..200) {
        let s = Space::shrinking_fractions(depth).unwrap();
        let pts = s.enumerate().unwrap();
        prop_assert_eq!(pts.len() as u64, depth + 1);
        for x in &pts {
            for z in &pts {
                let expected = if x == z { 0.0 } else { value_of(x).max(value_of(z)) };
                prop_assert_eq!(s.distance(x, z), expected);
            }
        }
    }

    #[test]
    fn metric_check_is_reproducible(a in -5.0f64..0.0, len in 0.1f64..10.0, seed in any::<u64>()) {
        let s = Space::interval(a, a + len).unwrap();
        let first = verify_metric_axioms(&s, 500, seed).unwrap();
        let second = verify_metric_axioms(&s, 500, seed).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn eval_log_is_non_decreasing(t1 in -12.0f64..8.0, t2 in -12.0f64..8.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (lo, hi) = (10f64.powf(lo), 10f64.powf(hi));
        for f in GrowthFunction::builtins() {
            let (a, b) = (f.eval_log(lo).unwrap(), f.eval_log(hi).unwrap());
            prop_assert!(a.is_finite() && b.is_finite());
            prop_assert!(a <= b + TAU_EQ, "{} at {} and {}", f.name(), lo, hi);
        }
    }

    #[test]
    fn right_inverse_composes_to_identity(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = seeded_rng(seed);
        let space = common::line_space(&mut rng, n);
        let u = common::random_permutation(&mut rng, n);
        let ustar = build_right_inverse(&u, &space).unwrap();
        let again = build_right_inverse(&u, &space).unwrap();
        prop_assert_eq!(ustar.table(), again.table());
        for x in space.enumerate().unwrap() {
            prop_assert_eq!(u.apply(&ustar.apply(&x).unwrap()), x);
        }
    }

    #[test]
    fn linear_right_inverse_within_tolerance(slope in prop_oneof![1.0f64..8.0, -8.0f64..-1.0], y in -1.0f64..1.0) {
        let space = Space::interval(-1.0, 1.0).unwrap();
        let u = Mapping::linear(slope);
        let ustar = build_right_inverse(&u, &space).unwrap();
        let back = u.apply(&ustar.apply(&Point::real(y)).unwrap()).coordinate().unwrap();
        prop_assert!((back - y).abs() <= TAU_EQ);
    }

    #[test]
    fn passing_eta_passes_below(seed in any::<u64>(), frac in 0.0f64..1.0) {
        let mut rng = seeded_rng(seed);
        let inst = common::random_instance(&mut rng, 8);
        let p = ExpansiveProblem::new(inst.space, inst.u, GrowthFunction::ExpT, inst.eta)
            .unwrap()
            .with_order(inst.order)
            .unwrap();
        let lower = 1.0 + (p.eta() - 1.0) * frac.max(1e-6);
        for cond in [Condition::PhiExpansive, Condition::MinCondition] {
            if check_condition(&p, cond).unwrap().passed() {
                prop_assert!(check_condition(&p.with_eta(lower).unwrap(), cond).unwrap().passed());
            }
        }
    }

    #[test]
    fn witnesses_reproduce(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let inst = common::random_instance(&mut rng, 10);
        let p = ExpansiveProblem::new(inst.space, inst.u, GrowthFunction::ExpSqrt, inst.eta)
            .unwrap()
            .with_order(inst.order)
            .unwrap();
        for cond in [Condition::PhiExpansive, Condition::MinCondition] {
            let r = check_condition(&p, cond).unwrap();
            if let Some(w) = r.witness.as_ref().and_then(|w| w.as_inequality()) {
                prop_assert!(reevaluate(&p, cond, w.x.id, w.z.id).is_some());
                prop_assert!(w.lhs_log < p.eta() * w.rhs_log);
            }
        }
    }

    #[test]
    fn wang_matches_phi_with_exp(seed in any::<u64>(), q in 1.01f64..3.0) {
        let mut rng = seeded_rng(seed);
        let n = rng.gen_range(2..10);
        let space = common::line_space(&mut rng, n);
        let u = common::random_permutation(&mut rng, n);
        let order = common::total_order(&mut rng, n);
        let wang = check_wang_expansive(&u, &space, q, Some(&order), Sampling::default()).unwrap();
        let p = ExpansiveProblem::new(space, u, GrowthFunction::ExpT, q).unwrap().with_order(order).unwrap();
        let phi = check_phi_expansive(&p).unwrap();
        prop_assert_eq!(wang.verdict, phi.verdict);
        let pair = |r: &expansive::CheckReport| r.witness.as_ref().and_then(|w| w.as_inequality()).map(|w| (w.x.id, w.z.id));
        prop_assert_eq!(pair(&wang), pair(&phi));
    }

    #[test]
    fn theta_classification_is_deterministic(p in 0.1f64..3.0) {
        let f = GrowthFunction::PowerShift { p };
        let a = classify_theta(&f, &default_probe_scales(), &default_r_grid());
        let b = classify_theta(&f, &default_probe_scales(), &default_r_grid());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn solvers_are_deterministic(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let inst = common::random_instance(&mut rng, 10);
        let cfg = SolverConfig { max_iter: 200, ..SolverConfig::default() };
        let a = solve_preimage(&inst.u, inst.x0, &inst.space, &cfg);
        let b = solve_preimage(&inst.u, inst.x0, &inst.space, &cfg);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn chain_iteration_descends(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let inst = common::chain_instance(&mut rng, 12);
        let v = inst.v.clone().unwrap();
        let p = ExpansiveProblem::new(inst.space.clone(), inst.u.clone(), GrowthFunction::ExpT, inst.eta)
            .unwrap()
            .with_v(v.clone())
            .unwrap();
        prop_assert!(check_condition(&p, Condition::Jungck).unwrap().passed());
        let sol = solve_common(&inst.u, &v, inst.x0, &inst.space, &SolverConfig::default()).unwrap();
        prop_assert!(sol.trace.converged());
        for w in sol.trace.step_distances.windows(2) {
            prop_assert!(w[1] < w[0] + TAU_EQ);
        }
        let n = inst.space.len().unwrap();
        prop_assert!(common::table_fixed_points(&inst.u, n).contains(&sol.u));
        prop_assert!(common::table_fixed_points(&v, n).contains(&sol.u));
    }

    #[test]
    fn common_solution_meets_both_residuals(a in 0.2f64..0.9, ratio in 0.05f64..0.95, x0 in 0.0f64..1.0) {
        let space = Space::interval(0.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let sol = solve_common(&Mapping::linear(a), &Mapping::linear(a * ratio), Point::real(x0), &space, &cfg).unwrap();
        // with ratio <= 1/2 the step bound 10 tol covers the residual (1/a - 1) w
        if ratio <= 0.5 {
            prop_assert!(sol.trace.converged());
        }
        if sol.trace.converged() {
            prop_assert!(sol.residual_u <= cfg.tol && sol.residual_v <= cfg.tol);
        }
    }
}

#[test]
fn usual_order_is_total_on_line() {
    let s = Space::interval(0.0, 1.0).unwrap();
    let o = PartialOrder::usual();
    assert!(o.le(&s, &Point::real(0.2), &Point::real(0.3)));
    assert!(!o.le(&s, &Point::real(0.3), &Point::real(0.2)));
}
