//! Property tests over the public API.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use traplab::catalog::{dyadic_prediction, fraction_string, parse_fraction_str, powerlaw_prediction, Q};
use traplab::dynamics::{flow, FlowState, DEFAULT_DT};
use traplab::operator::{weight_at, TridiagSolver};
use traplab::potential::{build_potential, make_family, FamilyVariant, PotentialFn, TildeModel};
use traplab::resolvent::fit_points;
use traplab::step::step_on;
use traplab::surgery::{plan_surgery, retained_count, surgered_potential};

fn odd_order() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(5), Just(7)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn family_decreases_on_the_unit_interval(m in odd_order(), a in 0.001f64..0.998, gap in 1e-4f64..1e-3) {
        let v = build_potential(&make_family(FamilyVariant::Dyadic { m }, 30, 2.0).unwrap()).unwrap();
        prop_assert!(v.value(a) >= v.value(a + gap));
    }

    #[test]
    fn family_hits_its_critical_values(m in odd_order(), n in 1u32..12) {
        let spec = make_family(FamilyVariant::Dyadic { m }, 30, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let p = spec.point(n).unwrap();
        prop_assert!((v.value(p.location) - p.value).abs() < 1e-12);
        prop_assert!(v.derivative(p.location).abs() < 1e-10);
    }

    #[test]
    fn step_is_monotone_and_bounded(x in -2.0f64..2.0, dx in 0.0f64..0.5) {
        let a = step_on(x, 0.0, 1.0).value;
        let b = step_on(x + dx, 0.0, 1.0).value;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn dyadic_losses_are_consistent(m in odd_order(), eps in 0.01f64..0.2) {
        let p = dyadic_prediction(m, eps).unwrap();
        prop_assert_eq!(p.smoothing_loss * Q::from_integer(2), p.resolvent_loss);
        prop_assert!(p.resolvent_loss < Q::from_integer(2));
        prop_assert!(p.resolvent_loss > Q::from_integer(1));
    }

    #[test]
    fn powerlaw_decreases_towards_dyadic(m in prop_oneof![Just(3u32), Just(5)], k in 3u64..500) {
        let a = powerlaw_prediction(m, k).unwrap().resolvent_loss;
        let b = powerlaw_prediction(m, k + 1).unwrap().resolvent_loss;
        let limit = dyadic_prediction(m, 0.05).unwrap().resolvent_loss;
        prop_assert!(b < a);
        prop_assert!(b > limit);
    }

    #[test]
    fn fractions_round_trip(n in -500i128..500, d in 1i128..500) {
        let q = Q::new(n, d);
        prop_assert_eq!(parse_fraction_str(&fraction_string(&q)).unwrap(), q);
    }

    #[test]
    fn retained_count_matches_enumeration(bound in 1e-9f64..0.6) {
        let brute = (1..64).filter(|&n| 0.5f64.powi(n) > bound).count() as u32;
        prop_assert_eq!(retained_count(bound), brute);
    }

    #[test]
    fn surgery_only_acts_inside_the_window(e in 3i32..9, x in -1.0f64..3.0) {
        let h = 0.5f64.powi(e);
        let variant = FamilyVariant::Dyadic { m: 3 };
        let v0 = build_potential(&make_family(variant, 40, 2.0).unwrap()).unwrap();
        let plan = plan_surgery(&variant, h, 0.05, 1.0).unwrap();
        let vh = surgered_potential(&v0, &TildeModel { m: 3 }, &plan).unwrap();
        if !plan.in_window(x) {
            prop_assert_eq!(vh.value(x), v0.value(x));
        }
    }

    #[test]
    fn weight_is_a_unit_plateau(x in -50.0f64..50.0, s in 1.0f64..3.0, m in 0.5f64..2.0) {
        let w = weight_at(x, s, m);
        prop_assert!(w > 0.0 && w <= 1.0);
        if x.abs() <= 2.0 * m {
            prop_assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn fit_recovers_power_laws(rho in 0.5f64..2.5, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (5..=9).map(|j| 0.5f64.powi(j)).map(|h| (h, c * h.powf(-rho))).collect();
        let fit = fit_points(&pts, false).unwrap();
        prop_assert!((fit.slope - rho).abs() < 1e-9);
    }

    #[test]
    fn flow_conserves_energy(x in -1.0f64..2.0, xi in -1.0f64..1.0) {
        let v = build_potential(&make_family(FamilyVariant::Dyadic { m: 3 }, 30, 2.0).unwrap()).unwrap();
        let tr = flow(&v, FlowState::new(&v, x, xi), 1.0, DEFAULT_DT).unwrap();
        prop_assert!(tr.max_drift <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tridiagonal_solve_matches_dense(
        n in 2usize..40,
        seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 160),
    ) {
        let c = |i: usize| C64::new(seed[i % seed.len()].0, seed[i % seed.len()].1);
        let sub: Vec<C64> = (0..n - 1).map(&c).collect();
        let sup: Vec<C64> = (0..n - 1).map(|i| c(i + 40)).collect();
        let diag: Vec<C64> = (0..n).map(|i| c(i + 80) + C64::new(4.0, 0.0)).collect();
        let rhs: Vec<C64> = (0..n).map(|i| c(i + 120)).collect();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j { diag[i] } else if j + 1 == i { sub[j] } else if i + 1 == j { sup[i] } else { C64::default() }
        });
        let solver = TridiagSolver::from_bands(sub, diag, sup).unwrap();
        let x = solver.solve(&rhs).unwrap();
        let xd = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        let err: f64 = x.iter().zip(xd.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10 * (1.0 + xd.norm()));
    }

    #[test]
    fn constant_potential_is_flat(c in 0.5f64..3.0, x in -10.0f64..10.0) {
        let v = PotentialFn::Constant(c);
        prop_assert_eq!(v.value(x), c);
        prop_assert_eq!(v.derivative(x), 0.0);
    }
}
