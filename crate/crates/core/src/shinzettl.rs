//! The 2×2 coefficient matrix of the first-order system for `(u, u^[1])`
//! and the quasi-derivatives built from it.

use num_complex::Complex;

use crate::coeff::{CoeffValues, CoefficientSet};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Real;

pub type Matrix2<T> = [[Complex<T>; 2]; 2];

/// A point of a solution: `u` and its quasi-derivative `u1 = p u' - (Q + i r) u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiState<T> {
    pub x: T,
    pub u: Complex<T>,
    pub u1: Complex<T>,
}

impl<T: Real> QuasiState<T> {
    pub fn new(x: T, u: Complex<T>, u1: Complex<T>) -> Self {
        QuasiState { x, u, u1 }
    }

    pub fn real(x: T, u: T, u1: T) -> Self {
        QuasiState {
            x,
            u: Complex::new(u, T::zero()),
            u1: Complex::new(u1, T::zero()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.u.re.is_finite() && self.u.im.is_finite() && self.u1.re.is_finite() && self.u1.im.is_finite()
    }
}

/// `A(x)` for the equation `l[u] = λ u`:
///
/// ```text
/// [ (Q + i r)/p                 1/p          ]
/// [ -(Q² + r²)/p + s - λ        -(Q - i r)/p ]
/// ```
#[derive(Debug, Clone, Copy)]
pub struct ShinZettlMatrix<'a> {
    pub coeffs: &'a CoefficientSet,
    pub lambda: f64,
}

impl<'a> ShinZettlMatrix<'a> {
    pub fn new(coeffs: &'a CoefficientSet, lambda: f64) -> Self {
        ShinZettlMatrix { coeffs, lambda }
    }

    pub fn matrix_at<T: Real>(&self, x: T) -> Result<Matrix2<T>> {
        let v = self.coeffs.values(x)?;
        from_values(&v, T::c(self.lambda), x)
    }

    /// As [`matrix_at`](Self::matrix_at) with segments chosen by `anchor`.
    pub fn matrix_at_anchored<T: Real>(&self, x: T, anchor: f64) -> Result<Matrix2<T>> {
        let v = self.coeffs.values_anchored(x, anchor)?;
        from_values(&v, T::c(self.lambda), x)
    }
}

pub(crate) fn from_values<T: Real>(v: &CoeffValues<T>, lambda: T, x: T) -> Result<Matrix2<T>> {
    if v.p == T::zero() {
        return Err(Error::DegeneratePoint { x: x.f64() });
    }
    let inv_p = v.p.recip();
    let a11 = Complex::new(v.q * inv_p, v.r * inv_p);
    let a12 = Complex::new(inv_p, T::zero());
    let a21 = Complex::new(-(v.q * v.q + v.r * v.r) * inv_p + v.s - lambda, T::zero());
    let a22 = Complex::new(-v.q * inv_p, v.r * inv_p);
    let m = [[a11, a12], [a21, a22]];
    if m.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite { x: x.f64() });
    }
    Ok(m)
}

/// `u^[1] = p u' - (Q + i r) u` at `x`.
pub fn quasi_derivative_1<T: Real>(c: &CoefficientSet, u: Complex<T>, du: Complex<T>, x: T) -> Result<Complex<T>> {
    let v = c.values(x)?;
    Ok(du * v.p - u * Complex::new(v.q, v.r))
}

/// Classical slope recovered from the quasi-derivative, `u' = (u^[1] + (Q + i r) u) / p`.
pub fn classical_slope<T: Real>(v: &CoeffValues<T>, u: Complex<T>, u1: Complex<T>) -> Complex<T> {
    (u1 + u * Complex::new(v.q, v.r)) / v.p
}

/// Finite-difference step used by [`apply_l_smooth`].
pub fn fd_step(x: f64) -> f64 {
    1e-5_f64.max(1e-5 * x.abs())
}

/// `l[u] = -u^[2]` for a smooth test function, with both derivatives in the
/// quasi-derivative chain taken by central differences. Only meaningful away
/// from coefficient breaks.
pub fn apply_l_smooth<T: Real>(c: &CoefficientSet, u: &Expr, x: T) -> Result<Complex<T>> {
    let xf = x.f64();
    let h = fd_step(xf);
    // the nested stencil reaches 2h
    if let Some(&at) = c.breaks().iter().find(|&&b| (b - xf).abs() <= 2.0 * h) {
        return Err(Error::NearBreak { x: xf, h, at });
    }
    let ht = T::c(h);
    let two = T::c(2.0);
    let eval_u = |y: T| {
        u.eval(y).map_err(|e| Error::Eval {
            segment: 0,
            x: y.f64(),
            reason: e.to_string(),
        })
    };
    let u1_at = |y: T| -> Result<Complex<T>> {
        let du = (eval_u(y + ht)? - eval_u(y - ht)?) / (two * ht);
        quasi_derivative_1(c, Complex::new(eval_u(y)?, T::zero()), Complex::new(du, T::zero()), y)
    };
    let u1 = u1_at(x)?;
    let du1 = (u1_at(x + ht)? - u1_at(x - ht)?) / (two * ht);
    let v = c.values(x)?;
    let uval = Complex::new(eval_u(x)?, T::zero());
    let u2 = du1 + u1 * Complex::new(v.q, -v.r) / v.p + uval * ((v.q * v.q + v.r * v.r) / v.p - v.s);
    Ok(-u2)
}
