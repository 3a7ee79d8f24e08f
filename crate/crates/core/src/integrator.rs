//! Adaptive Dormand–Prince 5(4) integration of `y' = A(x) y + (0, -f(x))`
//! for `y = (u, u^[1])`, restarted at every coefficient break so that no
//! step straddles a discontinuity of `A`.

use num_complex::Complex;

use crate::coeff::{CoefficientSet, Interval, PiecewiseFn, Side};
use crate::error::{Error, Result};
use crate::quadform::CutoffFamily;
use crate::report::format_real;
use crate::scalar::Real;
use crate::shinzettl::{from_values, QuasiState};

type Vec2<T> = [Complex<T>; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            abs: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        let t = Tolerances {
            rel,
            abs,
            ..Default::default()
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.abs > 0.0 && self.rel.is_finite() && self.abs.is_finite()) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            rel: self.rel * factor,
            abs: self.abs * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Fourth-order continuous extension of one accepted step:
/// `y(θ) = c0 + θ(c1 + θ'(c2 + θ(c3 + θ' c4)))` with `θ' = 1 − θ`.
#[derive(Debug, Clone, Copy)]
struct DenseStep<T> {
    x0: T,
    x1: T,
    c: [Vec2<T>; 5],
}

impl<T: Real> DenseStep<T> {
    fn eval(&self, x: T) -> Vec2<T> {
        let t = (x - self.x0) / (self.x1 - self.x0);
        let t1 = T::one() - t;
        let c = &self.c;
        [0, 1].map(|i| c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + c[4][i] * t1) * t) * t1) * t)
    }
}

/// `(u, u1) ↦ (φ u, p φ' u + φ u1)`, applied on top of a stored solution.
#[derive(Debug, Clone)]
pub(crate) struct CutoffProduct {
    pub phi: CutoffFamily,
    pub p: PiecewiseFn,
}

impl CutoffProduct {
    fn apply<T: Real>(&self, x: T, y: Vec2<T>) -> Result<Vec2<T>> {
        let xf = x.f64();
        let phi = T::c(self.phi.value(xf));
        let dphi = self.phi.derivative(xf);
        let ramp = if dphi == 0.0 {
            Complex::new(T::zero(), T::zero())
        } else {
            y[0] * (self.p.eval(x)? * T::c(dphi))
        };
        Ok([y[0] * phi, ramp + y[1] * phi])
    }
}

/// A solved path of `(x, u, u^[1])` with continuous output between steps.
#[derive(Debug, Clone)]
pub struct QuasiTrajectory<T> {
    samples: Vec<QuasiState<T>>,
    steps: Vec<DenseStep<T>>,
    lambda: f64,
    direction: Direction,
    products: Vec<CutoffProduct>,
}

pub const TRAJECTORY_CSV_HEADER: &str = "x,re_u,im_u,re_u1,im_u1";

impl<T: Real> QuasiTrajectory<T> {
    pub fn samples(&self) -> &[QuasiState<T>] {
        &self.samples
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn first(&self) -> QuasiState<T> {
        self.samples[0]
    }

    pub fn last(&self) -> QuasiState<T> {
        *self.samples.last().expect("nonempty trajectory")
    }

    /// `(min x, max x)` covered by the trajectory.
    pub fn bounds(&self) -> (T, T) {
        let (a, b) = (self.first().x, self.last().x);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Step end points within `(lo, hi)`, where the dense output has kinks.
    pub fn nodes_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.steps.iter().map(|s| s.x1.f64()).filter(|&x| x > lo && x < hi).collect()
    }

    /// Step whose closure holds `x`, taken from below (`Minus`) or above.
    fn locate(&self, x: T, side: Side) -> Result<&DenseStep<T>> {
        let (lo, hi) = self.bounds();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfSpan {
                t: x.f64(),
                lo: lo.f64(),
                hi: hi.f64(),
            });
        }
        let idx = match (self.direction, side) {
            (Direction::Forward, Side::Minus) => self.steps.partition_point(|s| s.x1 < x),
            (Direction::Forward, Side::Plus) => self.steps.partition_point(|s| s.x1 <= x),
            (Direction::Backward, Side::Minus) => self.steps.partition_point(|s| s.x1 >= x),
            (Direction::Backward, Side::Plus) => self.steps.partition_point(|s| s.x1 > x),
        };
        Ok(&self.steps[idx.min(self.steps.len() - 1)])
    }

    /// Dense-output state at `x`.
    pub fn state_at(&self, x: T) -> Result<QuasiState<T>> {
        let side = if self.direction == Direction::Forward {
            Side::Minus
        } else {
            Side::Plus
        };
        self.state_at_side(x, side)
    }

    /// One-sided limit at `x` of the dense output; at a break the two sides
    /// come from different steps.
    pub fn state_at_side(&self, x: T, side: Side) -> Result<QuasiState<T>> {
        if self.steps.is_empty() {
            let s = self.first();
            if x == s.x {
                return Ok(s);
            }
            return Err(Error::OutOfSpan {
                t: x.f64(),
                lo: s.x.f64(),
                hi: s.x.f64(),
            });
        }
        let mut y = self.locate(x, side)?.eval(x);
        for prod in &self.products {
            y = prod.apply(x, y)?;
        }
        Ok(QuasiState { x, u: y[0], u1: y[1] })
    }

    pub(crate) fn with_cutoff(&self, product: CutoffProduct) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let y = product.apply(s.x, [s.u, s.u1])?;
                Ok(QuasiState {
                    x: s.x,
                    u: y[0],
                    u1: y[1],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut products = self.products.clone();
        products.push(product);
        Ok(QuasiTrajectory {
            samples,
            steps: self.steps.clone(),
            lambda: self.lambda,
            direction: self.direction,
            products,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_real(s.x.f64()),
                format_real(s.u.re.f64()),
                format_real(s.u.im.f64()),
                format_real(s.u1.re.f64()),
                format_real(s.u1.im.f64())
            ));
        }
        out
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller
const BETA: f64 = 0.04;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy<T: Real>(y: &Vec2<T>, terms: &[(f64, &Vec2<T>)], h: T) -> Vec2<T> {
    let mut out = *y;
    for (w, k) in terms {
        let hw = h * T::c(*w);
        out[0] = out[0] + k[0] * hw;
        out[1] = out[1] + k[1] * hw;
    }
    out
}

fn err_norm<T: Real>(e: &Vec2<T>, y0: &Vec2<T>, y1: &Vec2<T>, tol: &Tolerances) -> T {
    let abs = T::c(tol.abs);
    let rel = T::c(tol.rel);
    let mut acc = T::zero();
    for i in 0..2 {
        for (ei, a, b) in [(e[i].re, y0[i].re, y1[i].re), (e[i].im, y0[i].im, y1[i].im)] {
            let sc = abs + rel * a.abs().max(b.abs());
            acc = acc + (ei / sc) * (ei / sc);
        }
    }
    (acc / T::c(4.0)).sqrt()
}

struct System<'a> {
    coeffs: &'a CoefficientSet,
    lambda: f64,
    forcing: Option<&'a PiecewiseFn>,
}

impl System<'_> {
    fn rhs<T: Real>(&self, x: T, y: &Vec2<T>, anchor: f64) -> Result<Vec2<T>> {
        let v = self.coeffs.values_anchored(x, anchor)?;
        let a = from_values(&v, T::c(self.lambda), x)?;
        let mut d = [a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]];
        if let Some(f) = self.forcing {
            d[1] = d[1] - f.eval_anchored(x, anchor)?;
        }
        Ok(d)
    }
}

fn initial_step<T: Real>(sys: &System, x: T, y: &Vec2<T>, f0: &Vec2<T>, dir: T, anchor: f64, tol: &Tolerances) -> Result<T> {
    let norm = |v: &Vec2<T>| {
        let mut acc = T::zero();
        for i in 0..2 {
            let sc = T::c(tol.abs) + T::c(tol.rel) * y[i].norm();
            acc = acc + (v[i].norm() / sc).powi(2);
        }
        (acc / T::c(2.0)).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < T::c(1e-5) || d1 < T::c(1e-5) {
        T::c(1e-6)
    } else {
        T::c(0.01) * d0 / d1
    };
    let y1 = axpy(y, &[(1.0, f0)], h0 * dir);
    let f1 = sys.rhs(x + h0 * dir, &y1, anchor)?;
    let diff = [f1[0] - f0[0], f1[1] - f0[1]];
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= T::c(1e-15) {
        (h0 * T::c(1e-3)).max(T::c(1e-6))
    } else {
        (T::c(0.01) / m).powf(T::c(0.2))
    };
    Ok((h0 * T::c(100.0)).min(h1))
}

/// Solves `y' = A(x) y + (0, -f(x))` from `y0` at `span.0` to `span.1`
/// (either order), i.e. `l[u] = λ u + f`.
pub fn solve_system<T: Real>(
    c: &CoefficientSet,
    lambda: f64,
    span: (f64, f64),
    y0: QuasiState<T>,
    forcing: Option<&PiecewiseFn>,
    tol: &Tolerances,
) -> Result<QuasiTrajectory<T>> {
    tol.validate()?;
    let (start, end) = span;
    if !(start.is_finite() && end.is_finite()) || start == end {
        return Err(Error::Invalid(format!("span [{start}, {end}] must be finite and nonempty")));
    }
    if y0.x.f64() != start {
        return Err(Error::Invalid(format!(
            "initial state at {} does not match span start {start}",
            y0.x
        )));
    }
    if !y0.is_finite() {
        return Err(Error::NonFinite { x: start });
    }
    let direction = if end > start {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let (lo, hi) = if end > start { (start, end) } else { (end, start) };
    let mut breaks = c.breaks_in(lo, hi);
    if let Some(f) = forcing {
        breaks.extend(f.breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let mut points = vec![start];
    match direction {
        Direction::Forward => points.extend(breaks.iter().copied()),
        Direction::Backward => points.extend(breaks.iter().rev().copied()),
    }
    points.push(end);

    let sys = System {
        coeffs: c,
        lambda,
        forcing,
    };
    let mut samples = vec![y0];
    let mut steps = Vec::new();
    let mut y = [y0.u, y0.u1];
    let mut total_steps = 0usize;
    let dir = if direction == Direction::Forward {
        T::one()
    } else {
        -T::one()
    };

    for seg in points.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let anchor = 0.5 * (s0 + s1);
        let seg_end = T::c(s1);
        let mut x = T::c(s0);
        let mut k1 = sys.rhs(x, &y, anchor)?;
        let mut h = initial_step(&sys, x, &y, &k1, dir, anchor, tol)?.min(T::c((s1 - s0).abs()));
        let mut fac_old = T::c(1e-4);
        let mut rejected = false;
        loop {
            let remaining = (seg_end - x).abs();
            if remaining <= T::zero() {
                break;
            }
            if total_steps >= tol.max_steps {
                return Err(Error::MaxSteps {
                    x: x.f64(),
                    steps: tol.max_steps,
                });
            }
            let last = h >= remaining * T::c(1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if h < T::c(16.0) * T::epsilon() * x.abs().max(T::one()) {
                return Err(Error::StepUnderflow { x: x.f64() });
            }
            let hs = h * dir;
            let k2 = sys.rhs(x + hs * T::c(C2), &axpy(&y, &[(A21, &k1)], hs), anchor)?;
            let k3 = sys.rhs(x + hs * T::c(C3), &axpy(&y, &[(A31, &k1), (A32, &k2)], hs), anchor)?;
            let k4 = sys.rhs(
                x + hs * T::c(C4),
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
                anchor,
            )?;
            let k5 = sys.rhs(
                x + hs * T::c(C5),
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
                anchor,
            )?;
            let x_new = if last { seg_end } else { x + hs };
            let k6 = sys.rhs(
                x_new,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs),
                anchor,
            )?;
            let y_new = axpy(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], hs);
            let k7 = sys.rhs(x_new, &y_new, anchor)?;
            let e = axpy(
                &[Complex::new(T::zero(), T::zero()); 2],
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                hs,
            );
            let err = err_norm(&e, &y, &y_new, tol);
            total_steps += 1;
            if !err.is_finite() {
                h = h * T::c(FAC_MIN);
                rejected = true;
                continue;
            }
            let fac11 = err.powf(T::c(0.2 - BETA * 0.75));
            if err <= T::one() {
                let h_eff = x_new - x;
                let zero = [Complex::new(T::zero(), T::zero()); 2];
                let dy = [y_new[0] - y[0], y_new[1] - y[1]];
                let b = axpy(&[-dy[0], -dy[1]], &[(1.0, &k1)], h_eff);
                let c3 = axpy(&[dy[0] - b[0], dy[1] - b[1]], &[(-1.0, &k7)], h_eff);
                let c4 = axpy(
                    &zero,
                    &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
                    h_eff,
                );
                steps.push(DenseStep {
                    x0: x,
                    x1: x_new,
                    c: [y, dy, b, c3, c4],
                });
                samples.push(QuasiState {
                    x: x_new,
                    u: y_new[0],
                    u1: y_new[1],
                });
                x = x_new;
                y = y_new;
                k1 = k7;
                let fac = (fac11 / fac_old.powf(T::c(BETA)) / T::c(SAFETY))
                    .max(T::c(1.0 / FAC_MAX))
                    .min(T::c(1.0 / FAC_MIN));
                let mut h_new = h / fac;
                if rejected {
                    h_new = h_new.min(h);
                }
                fac_old = err.max(T::c(1e-4));
                rejected = false;
                h = h_new;
                if last {
                    break;
                }
            } else {
                h = h / (fac11 / T::c(SAFETY)).min(T::c(1.0 / FAC_MIN));
                rejected = true;
            }
        }
    }
    Ok(QuasiTrajectory {
        samples,
        steps,
        lambda,
        direction,
        products: Vec::new(),
    })
}

/// Homogeneous solutions `θ`, `φ` with `(u, u^[1])` equal to `(1, 0)` and
/// `(0, 1)` at `span.lo`.
pub fn fundamental_pair<T: Real>(
    c: &CoefficientSet,
    lambda: f64,
    span: Interval,
    tol: &Tolerances,
) -> Result<(QuasiTrajectory<T>, QuasiTrajectory<T>)> {
    let a = T::c(span.lo);
    let theta = solve_system(
        c,
        lambda,
        (span.lo, span.hi),
        QuasiState::real(a, T::one(), T::zero()),
        None,
        tol,
    )?;
    let phi = solve_system(
        c,
        lambda,
        (span.lo, span.hi),
        QuasiState::real(a, T::zero(), T::one()),
        None,
        tol,
    )?;
    Ok((theta, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::StepFn;
    use std::f64::consts::PI;

    fn free() -> CoefficientSet {
        CoefficientSet::free()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn linear_solution() {
        let t = solve_system(&free(), 0.0, (0.0, 1.0), QuasiState::<f64>::real(0.0, 0.0, 1.0), None, &tol()).unwrap();
        let end = t.last();
        assert_eq!(end.x, 1.0);
        assert!((end.u.re - 1.0).abs() < 1e-12 && (end.u1.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_solution() {
        let t = solve_system(
            &free(),
            PI * PI,
            (0.0, 1.0),
            QuasiState::<f64>::real(0.0, 0.0, PI),
            None,
            &tol(),
        )
        .unwrap();
        let end = t.last();
        assert!(end.u.re.abs() < 1e-8, "{}", end.u);
        assert!((end.u1.re + PI).abs() < 1e-8);
        for x in [0.1, 0.37, 0.5, 0.93] {
            let s = t.state_at(x).unwrap();
            assert!((s.u.re - (PI * x).sin()).abs() < 1e-8);
            assert!((s.u1.re - PI * (PI * x).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn delta_interaction_matching() {
        let c = free().with_q_jump(StepFn::new(vec![(0.5, 10.0)]).unwrap());
        let t = solve_system(&c, 0.0, (0.0, 1.0), QuasiState::<f64>::real(0.0, 0.0, 1.0), None, &tol()).unwrap();
        // u = x up to 0.5, then u(0.5) = 0.5, u' = 1 + 10·0.5 = 6, so u(1) = 3.5
        assert!(t.samples().iter().any(|s| s.x == 0.5));
        let mid = t.state_at(0.5).unwrap();
        assert!((mid.u.re - 0.5).abs() < 1e-12);
        assert!((mid.u1.re - 1.0).abs() < 1e-12);
        let below = t.state_at_side(0.5, Side::Minus).unwrap();
        let above = t.state_at_side(0.5, Side::Plus).unwrap();
        assert!((below.u1 - above.u1).norm() < 1e-12);
        let end = t.last();
        assert!((end.u.re - 3.5).abs() < 1e-10, "{}", end.u);
        // u1 = u' − Q u = 6 − 10·3.5
        assert!((end.u1.re + 29.0).abs() < 1e-9);
    }

    #[test]
    fn fundamental_pair_examples() {
        let span = Interval::new(0.0, 1.0).unwrap();
        let (th, ph) = fundamental_pair::<f64>(&free(), 0.0, span, &tol()).unwrap();
        for x in [0.0, 0.25, 0.8, 1.0] {
            let a = th.state_at(x).unwrap();
            let b = ph.state_at(x).unwrap();
            assert!((a.u.re - 1.0).abs() < 1e-12 && a.u1.norm() < 1e-12);
            assert!((b.u.re - x).abs() < 1e-12 && (b.u1.re - 1.0).abs() < 1e-12);
        }
        let (th, ph) = fundamental_pair::<f64>(&free(), 1.0, span, &tol()).unwrap();
        for x in [0.1, 0.5, 1.0] {
            assert!((th.state_at(x).unwrap().u.re - x.cos()).abs() < 1e-8);
            assert!((ph.state_at(x).unwrap().u.re - x.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_and_queries() {
        let t = solve_system(
            &free(),
            1.0,
            (1.0, -1.0),
            QuasiState::real(1.0, 1f64.sin(), 1f64.cos()),
            None,
            &tol(),
        )
        .unwrap();
        assert_eq!(t.direction(), Direction::Backward);
        assert!(t.samples().windows(2).all(|w| w[1].x < w[0].x));
        assert!((t.state_at(-0.3).unwrap().u.re - (-0.3f64).sin()).abs() < 1e-9);
        assert!(matches!(t.state_at(1.5), Err(Error::OutOfSpan { .. })));
        assert_eq!(t.bounds(), (-1.0, 1.0));
    }

    #[test]
    fn forcing_term() {
        // l[u] = -u'' = 1 with u(0) = 0, u'(0) = 0 gives u = -x²/2
        let f = PiecewiseFn::constant(1.0);
        let t = solve_system(
            &free(),
            0.0,
            (0.0, 1.0),
            QuasiState::<f64>::real(0.0, 0.0, 0.0),
            Some(&f),
            &tol(),
        )
        .unwrap();
        assert!((t.last().u.re + 0.5).abs() < 1e-12);
        assert!((t.last().u1.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn undeclared_zero_of_p_is_an_error() {
        let c = free().with_p(PiecewiseFn::parse(&[], &["x - 0.5"]).unwrap());
        let r = solve_system(&c, 0.0, (0.0, 1.0), QuasiState::<f64>::real(0.0, 0.0, 1.0), None, &tol());
        assert!(
            matches!(
                r,
                Err(Error::StepUnderflow { .. } | Error::DegeneratePoint { .. } | Error::MaxSteps { .. })
            ),
            "{r:?}"
        );
    }

    #[test]
    fn max_steps() {
        let t = Tolerances { max_steps: 5, ..tol() };
        let r = solve_system(&free(), 400.0, (0.0, 10.0), QuasiState::<f64>::real(0.0, 0.0, 1.0), None, &t);
        assert!(matches!(r, Err(Error::MaxSteps { steps: 5, .. })));
    }

    #[test]
    fn csv_export() {
        let t = solve_system(&free(), 0.0, (0.0, 1.0), QuasiState::<f64>::real(0.0, 0.0, 1.0), None, &tol()).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_CSV_HEADER));
        assert_eq!(lines.next(), Some("0,0,0,1,0"));
        assert_eq!(csv.lines().count(), t.samples().len() + 1);
    }

    #[test]
    fn works_in_f32() {
        let t = solve_system(
            &free(),
            std::f64::consts::PI.powi(2),
            (0.0, 1.0),
            QuasiState::<f32>::real(0.0, 0.0, std::f32::consts::PI),
            None,
            &Tolerances::new(1e-5, 1e-6).unwrap(),
        )
        .unwrap();
        assert!(t.last().u.re.abs() < 1e-4);
    }
}
