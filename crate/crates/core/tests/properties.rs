mod common;

use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slq_core::bracket::bracket_at;
use slq_core::integrator::solve_system;
use slq_core::quadform::{form_value, TestFunction};
use slq_core::sacheck::{check_hartman_rellich, check_theorem_c, default_hr_windows, rho_transform, IntervalSequence};
use slq_core::spectral::eigenvalues_on_interval;
use slq_core::{CoefficientSet, Expr, GrowthClass, Interval, PiecewiseFn, Problem, QuasiState, StepFn, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn unit() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

fn cplx() -> impl Strategy<Value = Complex<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex::new(a, b))
}

fn smooth(seed: u64, with_r: bool) -> CoefficientSet {
    common::random_smooth_coeffs(&mut ChaCha8Rng::seed_from_u64(seed), with_r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expression_text_round_trips(seed in any::<u64>()) {
        let e = common::random_expr(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        let back = Expr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), e.to_string());
        for k in 0..20 {
            let x = -2.0 + 0.2 * k as f64;
            match (e.eval(x), back.eval(x)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()) || a == b),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn problem_text_round_trips(seed in any::<u64>()) {
        let p = common::random_problem(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = p.to_text();
        let back = Problem::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn step_function_is_monotone_in_nonnegative_jumps(jumps in prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64), 0..6)) {
        let mut jumps = jumps;
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        jumps.dedup_by(|a, b| a.0 == b.0);
        let f = StepFn::new(jumps).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=200 {
            let v: f64 = f.eval(-6.0 + 0.06 * k as f64);
            prop_assert!(v >= prev);
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_depend_linearly_on_initial_data(seed in any::<u64>(), a in cplx(), b in cplx(), lambda in -10.0..30.0f64) {
        let c = smooth(seed, true);
        let t = tol();
        let run = |u: Complex<f64>, u1: Complex<f64>| solve_system(&c, lambda, (0.0, 1.0), QuasiState::new(0.0, u, u1), None, &t).unwrap();
        let y1 = run(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        let y2 = run(Complex::new(0.0, 0.0), Complex::new(1.0, 0.0));
        let y = run(a, b);
        for x in [0.25, 0.5, 0.9, 1.0] {
            let (s, s1, s2) = (y.state_at(x).unwrap(), y1.state_at(x).unwrap(), y2.state_at(x).unwrap());
            let scale = 1.0 + s.u.norm() + s.u1.norm();
            prop_assert!((s.u - (s1.u * a + s2.u * b)).norm() <= 1e-7 * scale);
            prop_assert!((s.u1 - (s1.u1 * a + s2.u1 * b)).norm() <= 1e-7 * scale);
        }
    }

    #[test]
    fn backward_solve_recovers_initial_data(seed in any::<u64>(), a in cplx(), b in cplx(), lambda in -10.0..30.0f64) {
        let c = smooth(seed, true);
        let fwd = solve_system(&c, lambda, (0.0, 1.0), QuasiState::new(0.0, a, b), None, &tol()).unwrap();
        let end = fwd.last();
        let back = solve_system(&c, lambda, (1.0, 0.0), end, None, &tol()).unwrap().last();
        let scale = 1.0 + a.norm() + b.norm() + end.u.norm() + end.u1.norm();
        prop_assert!((back.u - a).norm() <= 1e-7 * scale);
        prop_assert!((back.u1 - b).norm() <= 1e-7 * scale);
    }

    #[test]
    fn bracket_is_antisymmetric_and_constant(seed in any::<u64>(), a in cplx(), b in cplx(), lambda in -10.0..30.0f64) {
        let c = smooth(seed, false);
        let t = tol();
        let u = solve_system(&c, lambda, (0.0, 1.0), QuasiState::new(0.0, a, b), None, &t).unwrap();
        let v = solve_system(&c, lambda, (0.0, 1.0), QuasiState::new(0.0, b, a), None, &t).unwrap();
        let b0 = bracket_at(&u, &v, 0.0).unwrap().value;
        for x in [0.1, 0.37, 0.8, 1.0] {
            let uv = bracket_at(&u, &v, x).unwrap().value;
            let vu = bracket_at(&v, &u, x).unwrap().value;
            prop_assert!((uv + vu.conj()).norm() <= 1e-12 * (1.0 + uv.norm()));
            prop_assert!((uv - b0).norm() <= 1e-7 * (1.0 + b0.norm()));
        }
    }

    #[test]
    fn form_scales_quadratically(seed in any::<u64>(), alpha in 0.1..5.0f64, k in 1u32..4) {
        let c = smooth(seed, true);
        let u = TestFunction::sine_mode(k, unit()).unwrap();
        let f: f64 = form_value(&c, &u).unwrap();
        let us = TestFunction::new(
            Expr::parse(&format!("{alpha:?}*sin({k}*pi*x)")).unwrap(),
            Expr::parse(&format!("{alpha:?}*{k}*pi*cos({k}*pi*x)")).unwrap(),
            unit(),
        ).unwrap();
        let fs: f64 = form_value(&c, &us).unwrap();
        prop_assert!((fs - alpha * alpha * f).abs() <= 1e-8 * (1.0 + fs.abs()));
    }

    #[test]
    fn form_is_invariant_under_conjugation_when_r_vanishes(seed in any::<u64>(), k in 1u32..4) {
        let c = smooth(seed, false);
        let s = |sign: &str| TestFunction::complex(
            Expr::parse(&format!("sin({k}*pi*x)")).unwrap(),
            Expr::parse(&format!("{k}*pi*cos({k}*pi*x)")).unwrap(),
            Expr::parse(&format!("{sign}x*sin({k}*pi*x)")).unwrap(),
            Expr::parse(&format!("{sign}(sin({k}*pi*x) + {k}*pi*x*cos({k}*pi*x))")).unwrap(),
            unit(),
        ).unwrap();
        let f: f64 = form_value(&c, &s("")).unwrap();
        let g: f64 = form_value(&c, &s("-")).unwrap();
        prop_assert!((f - g).abs() <= 1e-9 * (1.0 + f.abs()));
    }

    #[test]
    fn rho_inverse_round_trips(a in 0.5..3.0f64, b in 0.0..0.4f64, x in 0.0..6.0f64) {
        let c = CoefficientSet::free().with_p(PiecewiseFn::parse(&[], &[&format!("{a:?} + {b:?}*x^2")]).unwrap());
        let m = rho_transform::<f64>(&c, Interval::new(0.0, 6.0).unwrap(), &tol()).unwrap();
        let back = m.inverse(m.eval(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-8 * (1.0 + x));
    }

    #[test]
    fn hartman_rellich_verdict_ignores_scaling(k in 0.1..10.0f64, power in 0.0..5.0f64) {
        let base = CoefficientSet::free()
            .with_p(PiecewiseFn::parse(&[], &[&format!("(1 + x^2)^{:?}", power / 2.0)]).unwrap())
            .with_growth(GrowthClass::Power(power), GrowthClass::Power(power));
        let scaled = base.clone()
            .with_p(PiecewiseFn::parse(&[], &[&format!("{k:?}*(1 + x^2)^{:?}", power / 2.0)]).unwrap());
        let w = default_hr_windows();
        let a = check_hartman_rellich(&base, &w).unwrap();
        let b = check_hartman_rellich(&scaled, &w).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenfunctions_satisfy_both_boundary_conditions(seed in any::<u64>()) {
        let c = smooth(seed, false);
        let r = eigenvalues_on_interval::<f64>(&c, unit(), 3, None, &tol()).unwrap();
        for w in r.values.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        // the eigenfunction from the left and the solution from the right are
        // proportional: their quasi-Wronskian vanishes
        for &l in &r.values {
            let left = solve_system(&c, l, (0.0, 1.0), QuasiState::real(0.0, 0.0, 1.0), None, &tol()).unwrap();
            let right = solve_system(&c, l, (1.0, 0.0), QuasiState::real(1.0, 0.0, 1.0), None, &tol()).unwrap();
            let (a, b) = (left.state_at(0.5).unwrap(), right.state_at(0.5).unwrap());
            let w = a.u * b.u1 - a.u1 * b.u;
            prop_assert!(w.norm() <= 1e-6 * (a.u.norm() + a.u1.norm()) * (b.u.norm() + b.u1.norm()));
        }
    }

    #[test]
    fn raising_a_point_interaction_raises_eigenvalues(h in 0.5..20.0f64, at in 0.2..0.8f64) {
        let free = eigenvalues_on_interval::<f64>(&CoefficientSet::free(), unit(), 3, None, &tol()).unwrap();
        let c = CoefficientSet::free().with_q_jump(StepFn::new(vec![(at, h)]).unwrap());
        let r = eigenvalues_on_interval::<f64>(&c, unit(), 3, None, &tol()).unwrap();
        for k in 0..3 {
            prop_assert!(r.values[k] >= free.values[k] - 1e-8);
            let next = ((k + 2) as f64 * PI).powi(2);
            prop_assert!(r.values[k] <= next + 1e-8);
        }
    }

    #[test]
    fn theorem_c_constant_matches_direct_evaluation(a in 0.5..4.0f64, len in 0.5..2.0f64) {
        // p = a (1 + x^2) peaks at the far end of each interval
        let c = CoefficientSet::free().with_p(PiecewiseFn::parse(&[], &[&format!("{a:?}*(1 + x^2)")]).unwrap());
        let entries: Vec<(i64, f64, f64)> = (1..=4i64)
            .flat_map(|n| {
                let lo = 2.0 * n as f64;
                [(n, lo, lo + len), (-n, -lo - len, -lo)]
            })
            .collect();
        let seq = IntervalSequence::new(entries.clone()).unwrap();
        let r = check_theorem_c(&c, &seq).unwrap();
        let c_star = r.evidence("C_star").unwrap();
        let direct = entries
            .iter()
            .map(|&(_, lo, hi)| {
                let far = lo.abs().max(hi.abs());
                a * (1.0 + far * far) / (hi - lo).powi(2)
            })
            .fold(0.0, f64::max);
        prop_assert!((c_star - direct).abs() <= 1e-6 * direct, "{} vs {}", c_star, direct);
    }
}
