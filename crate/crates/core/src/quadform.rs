//! The quadratic form `∫ p|u'|² − ∫ Q d|u|² + ∫ s|u|²` on compactly supported
//! test functions, smooth cutoffs and the product rule
//! `(φu)^[1] = p φ' u + φ u^[1]`, and Rayleigh-quotient probing.

use num_complex::Complex;
use rayon::prelude::*;

use crate::coeff::{CoefficientSet, Interval};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrator::{CutoffProduct, QuasiTrajectory};
use crate::quad::{integrate_split, QuadConfig};
use crate::scalar::Real;
use crate::shinzettl::classical_slope;

pub const FORM_CSV_HEADER: &str = "k,form,norm2,quotient";

/// Largest `|1/p|` accepted as "bounded" when sampling.
const INV_P_BOUND: f64 = 1e12;

fn eval_expr<T: Real>(e: &Expr, x: T) -> Result<T> {
    e.eval(x).map_err(|err| Error::Eval {
        segment: 0,
        x: x.f64(),
        reason: err.to_string(),
    })
}

/// A smooth function vanishing at the ends of its support, with a declared
/// derivative. The imaginary part is optional.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    re: (Expr, Expr),
    im: Option<(Expr, Expr)>,
    support: Interval,
}

impl TestFunction {
    pub fn new(u: Expr, du: Expr, support: Interval) -> Result<Self> {
        let t = TestFunction {
            re: (u, du),
            im: None,
            support,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn complex(u_re: Expr, du_re: Expr, u_im: Expr, du_im: Expr, support: Interval) -> Result<Self> {
        let t = TestFunction {
            re: (u_re, du_re),
            im: Some((u_im, du_im)),
            support,
        };
        t.validate()?;
        Ok(t)
    }

    /// `sin(kπ(x − a)/(b − a))` on `[a, b]`.
    pub fn sine_mode(k: u32, support: Interval) -> Result<Self> {
        let w = support.len();
        let a = support.lo;
        let arg = format!("{k}*pi*(x - {a:?})/{w:?}");
        let u = Expr::parse(&format!("sin({arg})"))?;
        let du = Expr::parse(&format!("{k}*pi/{w:?}*cos({arg})"))?;
        Self::new(u, du, support)
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn value<T: Real>(&self, x: T) -> Result<Complex<T>> {
        let re = eval_expr(&self.re.0, x)?;
        let im = match &self.im {
            Some((u, _)) => eval_expr(u, x)?,
            None => T::zero(),
        };
        Ok(Complex::new(re, im))
    }

    pub fn derivative<T: Real>(&self, x: T) -> Result<Complex<T>> {
        let re = eval_expr(&self.re.1, x)?;
        let im = match &self.im {
            Some((_, du)) => eval_expr(du, x)?,
            None => T::zero(),
        };
        Ok(Complex::new(re, im))
    }

    fn validate(&self) -> Result<()> {
        let Interval { lo, hi } = self.support;
        for end in [lo, hi] {
            let v = self.value(end)?.norm();
            if v > 1e-10 {
                return Err(Error::Invalid(format!(
                    "test function is {v} at support end {end}, expected 0"
                )));
            }
        }
        let n = 100;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for i in 1..=n {
            let x = lo + (hi - lo) * i as f64 / (n + 1) as f64;
            let h = 1e-5 * x.abs().max(1.0);
            let fd = (self.value(x + h)? - self.value(x - h)?) / (2.0 * h);
            let du = self.derivative(x)?;
            worst = worst.max((du - fd).norm());
            scale = scale.max(du.norm());
        }
        if worst > 1e-6 * scale {
            return Err(Error::Invalid(format!(
                "declared derivative disagrees with finite differences by {worst} (scale {scale})"
            )));
        }
        Ok(())
    }
}

/// Checks `p` finite with `|1/p|` bounded at samples on `window`, both sides
/// of every break.
fn check_p_bounded(c: &CoefficientSet, window: Interval) -> Result<()> {
    let check = |x: f64, p: f64| {
        if !p.is_finite() || p == 0.0 || (1.0 / p).abs() > INV_P_BOUND {
            return Err(Error::Invalid(format!("1/p is unbounded near x = {x} (p = {p})")));
        }
        Ok(())
    };
    for x in window.grid(1000) {
        check(x, c.p.eval(x)?)?;
    }
    for b in c.breaks_in(window.lo, window.hi) {
        check(b, c.p.eval_left(b)?)?;
        check(b, c.p.eval(b)?)?;
    }
    Ok(())
}

fn form_config() -> QuadConfig {
    QuadConfig {
        abs: 1e-13,
        rel: 1e-12,
        max_intervals: 4000,
    }
}

/// `∫ p|u'|² − ∫ Q (u'ū + uū') + ∫ s|u|² + 2 ∫ r Im(u ū')` over the support.
///
/// The `Q` term is `−∫ Q d|u|²`; the `r` term vanishes for real `u`.
pub fn form_value<T: Real>(c: &CoefficientSet, u: &TestFunction) -> Result<T> {
    let support = u.support();
    check_p_bounded(c, support)?;
    let breaks = c.breaks_in(support.lo, support.hi);
    let integrand = |x: T| -> Result<T> {
        let v = c.values(x)?;
        let w = u.value(x)?;
        let dw = u.derivative(x)?;
        let cross = dw * w.conj();
        let two = T::c(2.0);
        Ok(v.p * dw.norm_sqr() - v.q * two * cross.re + v.s * w.norm_sqr() + two * v.r * (w * dw.conj()).im)
    };
    let r = integrate_split(integrand, T::c(support.lo), T::c(support.hi), &breaks, &form_config())?;
    if !r.converged {
        return Err(Error::Quadrature {
            a: support.lo,
            b: support.hi,
            reason: "form integral did not converge".into(),
        });
    }
    Ok(r.value)
}

pub fn norm_squared<T: Real>(u: &TestFunction) -> Result<T> {
    let s = u.support();
    let r = integrate_split(|x: T| Ok(u.value(x)?.norm_sqr()), T::c(s.lo), T::c(s.hi), &[], &form_config())?;
    Ok(r.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighProbe<T> {
    pub min_quotient: T,
    pub argmin: usize,
    pub quotients: Vec<T>,
}

/// Minimum of `form_value(u)/‖u‖²` over `family`. A finite family only
/// bounds the infimum of the form from above, so this is an estimate.
pub fn rayleigh_lower_bound_probe<T: Real>(c: &CoefficientSet, family: &[TestFunction]) -> Result<RayleighProbe<T>> {
    if family.is_empty() {
        return Err(Error::Invalid("empty test-function family".into()));
    }
    let quotients = family
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let n: T = norm_squared(u)?;
            if n <= T::zero() {
                return Err(Error::Invalid(format!("family member {i} has zero norm")));
            }
            Ok(form_value::<T>(c, u)? / n)
        })
        .collect::<Result<Vec<T>>>()?;
    let (argmin, &min_quotient) = quotients
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite quotient"))
        .expect("nonempty");
    Ok(RayleighProbe {
        min_quotient,
        argmin,
        quotients,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampShape {
    /// `3t² − 2t³`, C¹.
    Cubic,
    /// `6t⁵ − 15t⁴ + 10t³`, C².
    Quintic,
}

impl RampShape {
    fn value(self, t: f64) -> f64 {
        match self {
            RampShape::Cubic => t * t * (3.0 - 2.0 * t),
            RampShape::Quintic => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        }
    }

    fn derivative(self, t: f64) -> f64 {
        match self {
            RampShape::Cubic => 6.0 * t * (1.0 - t),
            RampShape::Quintic => 30.0 * t * t * (1.0 - t) * (1.0 - t),
        }
    }

    fn second_derivative(self, t: f64) -> f64 {
        match self {
            RampShape::Cubic => 6.0 - 12.0 * t,
            RampShape::Quintic => 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
        }
    }

    /// `max |ramp'|` on `[0, 1]`.
    pub fn slope_bound(self) -> f64 {
        match self {
            RampShape::Cubic => 1.5,
            RampShape::Quintic => 15.0 / 8.0,
        }
    }
}

/// `0 ≤ φ ≤ 1`, `φ = 1` on the plateau, `φ = 0` off the support, with
/// smoothstep ramps in between. Infinite plateau ends mean no ramp there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFamily {
    pub n: usize,
    pub shape: RampShape,
    pub plateau: (f64, f64),
    pub support: (f64, f64),
    /// `sup |φ'|`
    pub k: f64,
}

impl CutoffFamily {
    pub fn new(n: usize, plateau: (f64, f64), support: (f64, f64)) -> Result<Self> {
        Self::with_shape(n, RampShape::Quintic, plateau, support)
    }

    pub fn with_shape(n: usize, shape: RampShape, plateau: (f64, f64), support: (f64, f64)) -> Result<Self> {
        let ok_side = |outer: f64, inner: f64, lower: bool| {
            if inner.is_infinite() {
                outer == inner
            } else {
                outer.is_finite() && if lower { outer < inner } else { outer > inner }
            }
        };
        if !(plateau.0 < plateau.1 && ok_side(support.0, plateau.0, true) && ok_side(support.1, plateau.1, false)) {
            return Err(Error::Invalid(format!(
                "cutoff plateau {plateau:?} must lie strictly inside support {support:?}"
            )));
        }
        let widths = [plateau.0 - support.0, support.1 - plateau.1];
        let min_width = widths.iter().copied().filter(|w| w.is_finite()).fold(f64::INFINITY, f64::min);
        let k = if min_width.is_finite() {
            shape.slope_bound() / min_width
        } else {
            0.0
        };
        Ok(CutoffFamily {
            n,
            shape,
            plateau,
            support,
            k,
        })
    }

    /// `φ ≡ 1`.
    pub fn identity() -> Self {
        CutoffFamily {
            n: 0,
            shape: RampShape::Quintic,
            plateau: (f64::NEG_INFINITY, f64::INFINITY),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            k: 0.0,
        }
    }

    /// Plateau `[−n, n]`, support `[−n − 1, n + 1]`.
    pub fn standard(n: usize) -> Self {
        let n_f = n as f64;
        Self::new(n, (-n_f, n_f), (-n_f - 1.0, n_f + 1.0)).expect("valid standard cutoff")
    }

    /// Regions where `φ' ≠ 0` may occur.
    pub fn ramps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.plateau.0.is_finite() {
            out.push((self.support.0, self.plateau.0));
        }
        if self.plateau.1.is_finite() {
            out.push((self.plateau.1, self.support.1));
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 {
            0.0
        } else if x < self.plateau.0 {
            self.shape.value((x - self.support.0) / (self.plateau.0 - self.support.0))
        } else if x > self.plateau.1 {
            self.shape.value((self.support.1 - x) / (self.support.1 - self.plateau.1))
        } else {
            1.0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 || (x >= self.plateau.0 && x <= self.plateau.1) {
            0.0
        } else if x < self.plateau.0 {
            let w = self.plateau.0 - self.support.0;
            self.shape.derivative((x - self.support.0) / w) / w
        } else {
            let w = self.support.1 - self.plateau.1;
            -self.shape.derivative((self.support.1 - x) / w) / w
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 || (x >= self.plateau.0 && x <= self.plateau.1) {
            0.0
        } else if x < self.plateau.0 {
            let w = self.plateau.0 - self.support.0;
            self.shape.second_derivative((x - self.support.0) / w) / (w * w)
        } else {
            let w = self.support.1 - self.plateau.1;
            self.shape.second_derivative((self.support.1 - x) / w) / (w * w)
        }
    }
}

/// Samples `p > 0` and continuity of `p` on the part of each ramp inside
/// `[lo, hi]`.
fn check_ramps(c: &CoefficientSet, phi: &CutoffFamily, lo: f64, hi: f64) -> Result<()> {
    for (a, b) in phi.ramps() {
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            continue;
        }
        let w = Interval { lo: a, hi: b };
        for x in w.grid(256) {
            let p = c.p.eval(x)?;
            if !(p > 0.0) {
                return Err(Error::Invalid(format!(
                    "p = {p} <= 0 at x = {x} where the cutoff is not constant"
                )));
            }
        }
        for bp in c.p.breakpoints().iter().copied().filter(|&bp| bp > a && bp < b) {
            let (l, r) = (c.p.eval_left(bp)?, c.p.eval(bp)?);
            if (l - r).abs() > 1e-9 * (1.0 + l.abs()) {
                return Err(Error::Invalid(format!("p jumps at x = {bp} inside a cutoff ramp")));
            }
        }
    }
    Ok(())
}

/// `(φu, p φ' u + φ u^[1])`, evaluated lazily over `u`'s dense output.
pub fn cutoff_multiply<T: Real>(c: &CoefficientSet, phi: &CutoffFamily, u: &QuasiTrajectory<T>) -> Result<QuasiTrajectory<T>> {
    let (lo, hi) = u.bounds();
    check_ramps(c, phi, lo.f64(), hi.f64())?;
    u.with_cutoff(CutoffProduct {
        phi: *phi,
        p: c.p.clone(),
    })
}

/// `∫ p φ φ' (v·conj(v') − v'·conj(v)) dx` over `v`'s span; `v'` is the
/// classical slope recovered from `(v, v^[1])`. The integrand is pointwise
/// purely imaginary, so the real part of the result vanishes.
pub fn cutoff_cross_term<T: Real>(c: &CoefficientSet, phi: &CutoffFamily, v: &QuasiTrajectory<T>) -> Result<Complex<T>> {
    let (lo, hi) = v.bounds();
    let mut breaks = c.breaks_in(lo.f64(), hi.f64());
    for (a, b) in phi.ramps() {
        breaks.extend([a, b]);
    }
    breaks.extend(v.nodes_in(lo.f64(), hi.f64()));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integrand = |x: T| -> Result<Complex<T>> {
        let xf = x.f64();
        let dphi = phi.derivative(xf);
        if dphi == 0.0 {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let s = v.state_at(x)?;
        let vals = c.values(x)?;
        let dv = classical_slope(&vals, s.u, s.u1);
        let w = T::c(phi.value(xf) * dphi) * vals.p;
        Ok((s.u * dv.conj() - dv * s.u.conj()) * w)
    };
    let cfg = QuadConfig {
        abs: 1e-14,
        rel: 1e-11,
        max_intervals: 20_000,
    };
    Ok(integrate_split(integrand, lo, hi, &breaks, &cfg)?.value)
}
