#![allow(dead_code)]

use rand::Rng;
use slq_core::expr::{BinOp, Func};
use slq_core::{CoefficientSet, Expr, GrowthClass, Interval, PiecewiseFn, Problem, StepFn};

pub fn random_number(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(-5..=5) as f64,
        1 => rng.gen_range(-5.0..5.0),
        2 => rng.gen_range(0.5..2.0) * 10f64.powi(rng.gen_range(-8..8)),
        _ => (rng.gen_range(1..100) as f64) / 8.0,
    }
}

pub fn random_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 | 1 => Expr::X,
            2 => Expr::Pi,
            _ => Expr::Num(random_number(rng)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
        1..=2 => Expr::Call(
            Func::ALL[rng.gen_range(0..Func::ALL.len())],
            Box::new(random_expr(rng, depth - 1)),
        ),
        3 => Expr::Bin(
            BinOp::Pow,
            Box::new(random_expr(rng, depth - 1)),
            Box::new(if rng.gen_bool(0.6) {
                Expr::Num(rng.gen_range(-3..=3) as f64)
            } else {
                random_expr(rng, depth - 1)
            }),
        ),
        _ => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][rng.gen_range(0..4)];
            Expr::Bin(
                op,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            )
        }
    }
}

/// Smooth coefficients with `p ≥ 1/2`; `r` only when `with_r`.
pub fn random_smooth_coeffs(rng: &mut impl Rng, with_r: bool) -> CoefficientSet {
    let a = rng.gen_range(1.5..3.0);
    let b = rng.gen_range(-1.0..1.0);
    let w = rng.gen_range(0.5..3.0);
    let p = format!("{a:?} + {b:?}*cos({w:?}*x)");
    let q = format!("{:?}*x + {:?}*x^2", rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let s = format!("{:?}*sin({:?}*x)", rng.gen_range(-5.0..5.0), rng.gen_range(0.5..3.0));
    let mut c = CoefficientSet::free()
        .with_p(PiecewiseFn::parse(&[], &[&p]).unwrap())
        .with_q_ac(PiecewiseFn::parse(&[], &[&q]).unwrap())
        .with_s(PiecewiseFn::parse(&[], &[&s]).unwrap());
    if with_r {
        let r = format!("{:?}*cos(x)", rng.gen_range(-1.0..1.0));
        c = c.with_r(PiecewiseFn::parse(&[], &[&r]).unwrap());
    }
    c
}

fn random_piecewise(rng: &mut impl Rng) -> PiecewiseFn {
    let n = rng.gen_range(0..3);
    let mut bps: Vec<f64> = (0..n).map(|_| random_number(rng)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let segs = (0..=bps.len()).map(|_| random_expr(rng, 3)).collect();
    PiecewiseFn::new(bps, segs).unwrap()
}

fn random_growth(rng: &mut impl Rng) -> GrowthClass {
    match rng.gen_range(0..4) {
        0 => GrowthClass::Power(random_number(rng)),
        1 => GrowthClass::Exponential(random_number(rng)),
        2 => GrowthClass::Bounded,
        _ => GrowthClass::Unspecified,
    }
}

pub fn random_problem(rng: &mut impl Rng) -> Problem {
    let lo = rng.gen_range(-10.0..0.0);
    let hi = lo + rng.gen_range(0.1..20.0);
    let mut jumps: Vec<(f64, f64)> = (0..rng.gen_range(0..4))
        .map(|_| (random_number(rng), random_number(rng)))
        .collect();
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    jumps.dedup_by(|a, b| a.0 == b.0);
    let coeffs = CoefficientSet::free()
        .with_p(random_piecewise(rng))
        .with_q_ac(random_piecewise(rng))
        .with_q_jump(StepFn::new(jumps).unwrap())
        .with_s(random_piecewise(rng))
        .with_r(random_piecewise(rng))
        .with_growth(random_growth(rng), random_growth(rng));
    Problem {
        coeffs,
        domain: Interval::new(lo, hi).unwrap(),
    }
}
