//! Dirichlet eigenvalues `u(α) = u(β) = 0` on a finite interval by shooting
//! in `λ` and bracketing sign changes of `u(β; λ)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::coeff::{CoefficientSet, Interval};
use crate::error::{Error, Result};
use crate::integrator::{solve_system, Tolerances};
use crate::scalar::Real;
use crate::shinzettl::QuasiState;

pub const EIGEN_CSV_HEADER: &str = "k,lambda,residual,bracket_lo,bracket_hi";

const SCAN_CHUNK: usize = 64;

/// `u(β; λ)` for the solution with `(u, u^[1]) = (0, 1)` at `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot<T> {
    pub value: T,
    pub full: Complex<T>,
    /// Set when `r ≠ 0`, where `u(β; λ)` is complex and `value` is its real part.
    pub complex: bool,
}

pub fn dirichlet_shoot<T: Real>(c: &CoefficientSet, lambda: f64, span: Interval, tol: &Tolerances) -> Result<Shot<T>> {
    let y0 = QuasiState::real(T::c(span.lo), T::zero(), T::one());
    let t = solve_system(c, lambda, (span.lo, span.hi), y0, None, tol)?;
    let u = t.last().u;
    Ok(Shot {
        value: u.re,
        full: u,
        complex: c.has_r(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scan {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Scan {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && step > 0.0 && step.is_finite()) {
            return Err(Error::Invalid(format!("bad scan range [{lo}, {hi}] with step {step}")));
        }
        Ok(Scan { lo, hi, step })
    }

    /// `[−50, 50·count²/len²]` in `400·count` steps.
    pub fn default_for(span: Interval, count: usize) -> Self {
        let n = count.max(1) as f64;
        let hi = 50.0 * n * n / (span.len() * span.len());
        let lo = -50.0;
        Scan {
            lo,
            hi,
            step: (hi - lo) / (400.0 * n),
        }
    }

    fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).ceil() as usize;
        (0..=n).map(|i| (self.lo + i as f64 * self.step).min(self.hi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    /// `|u(β; λ)|` at each value.
    pub residuals: Vec<T>,
    pub brackets: Vec<(T, T)>,
    /// 1-based eigenvalue indices.
    pub indices: Vec<usize>,
    /// Set when the values come from minimizing `|u(β; λ)|` (`r ≠ 0`).
    pub experimental: bool,
}

impl<T: Real> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        use crate::report::format_real;
        let mut out = String::from(EIGEN_CSV_HEADER);
        out.push('\n');
        for i in 0..self.values.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.indices[i],
                format_real(self.values[i].f64()),
                format_real(self.residuals[i].f64()),
                format_real(self.brackets[i].0.f64()),
                format_real(self.brackets[i].1.f64()),
            ));
        }
        out
    }
}

/// Evaluates `f` on the scan grid in parallel chunks, stopping once `enough`
/// says the prefix seen so far suffices.
fn scan_values<T, F, S>(points: &[f64], f: F, enough: S) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
    S: Fn(&[T]) -> bool,
{
    let mut values = Vec::with_capacity(points.len());
    for chunk in points.chunks(SCAN_CHUNK) {
        let part = chunk.par_iter().map(|&l| f(l)).collect::<Result<Vec<T>>>()?;
        values.extend(part);
        if enough(&values) {
            break;
        }
    }
    Ok(values)
}

fn sign_changes<T: Real>(v: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < v.len() {
        if v[i] == T::zero() || (v[i].signum() != v[i + 1].signum() && v[i + 1] != T::zero()) {
            out.push(i);
        }
        i += 1;
    }
    out
}

pub fn eigenvalues_on_interval<T: Real>(
    c: &CoefficientSet,
    span: Interval,
    count: usize,
    scan: Option<Scan>,
    tol: &Tolerances,
) -> Result<EigenResult<T>> {
    if count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()));
    }
    tol.validate()?;
    let scan = scan.unwrap_or_else(|| Scan::default_for(span, count));
    let points = scan.points();
    if c.has_r() {
        return complex_eigenvalues(c, span, count, &points, tol);
    }
    let shoot = |l: f64| dirichlet_shoot::<T>(c, l, span, tol).map(|s| s.value);
    let values = scan_values(&points, shoot, |v| sign_changes(v).len() >= count)?;
    let changes = sign_changes(&values);
    if changes.len() < count {
        return Err(Error::TooFewRoots {
            found: changes.len(),
            wanted: count,
        });
    }
    let refined = changes[..count]
        .par_iter()
        .map(|&i| {
            if values[i] == T::zero() {
                let l = T::c(points[i]);
                return Ok((l, T::zero(), (l, l)));
            }
            refine_bracket(&shoot, points[i], points[i + 1], values[i], values[i + 1], tol.rel)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = EigenResult {
        values: Vec::with_capacity(count),
        residuals: Vec::with_capacity(count),
        brackets: Vec::with_capacity(count),
        indices: (1..=count).collect(),
        experimental: false,
    };
    for (l, r, b) in refined {
        out.values.push(l);
        out.residuals.push(r);
        out.brackets.push(b);
    }
    Ok(out)
}

/// Bisection to `|hi − lo| ≤ rel·(1 + |λ|)`, then one secant step inside the
/// final bracket. Returns `(λ, |u(β; λ)|, bracket)`.
fn refine_bracket<T: Real, F>(f: &F, mut lo: f64, mut hi: f64, mut flo: T, mut fhi: T, rel: f64) -> Result<(T, T, (T, T))>
where
    F: Fn(f64) -> Result<T>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok((T::c(mid), T::zero(), (T::c(lo), T::c(hi))));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let (flo64, fhi64) = (flo.f64(), fhi.f64());
    let secant = lo - flo64 * (hi - lo) / (fhi64 - flo64);
    let lambda = if secant > lo && secant < hi { secant } else { 0.5 * (lo + hi) };
    let residual = f(lambda)?.abs();
    Ok((T::c(lambda), residual, (T::c(lo), T::c(hi))))
}

fn complex_eigenvalues<T: Real>(
    c: &CoefficientSet,
    span: Interval,
    count: usize,
    points: &[f64],
    tol: &Tolerances,
) -> Result<EigenResult<T>> {
    let mag = |l: f64| dirichlet_shoot::<T>(c, l, span, tol).map(|s| s.full.norm());
    let minima = |v: &[T]| {
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
            .collect::<Vec<_>>()
    };
    let values = scan_values(points, mag, |v| minima(v).len() > count)?;
    let scale = values.iter().fold(T::zero(), |m, &v| m.max(v));
    let candidates = minima(&values);
    let refined = candidates
        .par_iter()
        .map(|&i| golden_min(&mag, points[i - 1], points[i + 1], tol.rel))
        .collect::<Result<Vec<_>>>()?;
    let accepted: Vec<_> = refined
        .into_iter()
        .filter(|r| r.1 <= T::c(1e-6) * scale)
        .take(count)
        .collect();
    if accepted.len() < count {
        return Err(Error::TooFewRoots {
            found: accepted.len(),
            wanted: count,
        });
    }
    Ok(EigenResult {
        values: accepted.iter().map(|r| r.0).collect(),
        residuals: accepted.iter().map(|r| r.1).collect(),
        brackets: accepted.iter().map(|r| r.2).collect(),
        indices: (1..=count).collect(),
        experimental: true,
    })
}

fn golden_min<T: Real, F>(f: &F, mut a: f64, mut b: f64, rel: f64) -> Result<(T, T, (T, T))>
where
    F: Fn(f64) -> Result<T>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..300 {
        if b - a <= rel * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    let (x, fx) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    Ok((T::c(x), fx, (T::c(a), T::c(b))))
}
