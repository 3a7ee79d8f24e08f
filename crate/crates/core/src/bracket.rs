//! The Lagrange bracket `[u, v](t) = u(t)·conj(v^[1](t)) − u^[1](t)·conj(v(t))`
//! and the identity relating it to `∫ (l[u]·conj(v) − u·conj(l[v]))`.

use num_complex::Complex;

use crate::coeff::{CoefficientSet, PiecewiseFn, Side};
use crate::error::{Error, Result};
use crate::integrator::QuasiTrajectory;
use crate::quad::{integrate_split, QuadConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketValue<T> {
    pub t: T,
    pub value: Complex<T>,
}

pub fn bracket_at<T: Real>(u: &QuasiTrajectory<T>, v: &QuasiTrajectory<T>, t: T) -> Result<BracketValue<T>> {
    let a = u.state_at(t)?;
    let b = v.state_at(t)?;
    Ok(BracketValue {
        t,
        value: a.u * b.u1.conj() - a.u1 * b.u.conj(),
    })
}

pub const BRACKET_CSV_HEADER: &str = "t,re_bracket,im_bracket";

/// The bracket at `n + 1` equally spaced points of `[a, b]`.
pub fn bracket_table<T: Real>(
    u: &QuasiTrajectory<T>,
    v: &QuasiTrajectory<T>,
    a: T,
    b: T,
    n: usize,
) -> Result<Vec<BracketValue<T>>> {
    let n = n.max(1);
    (0..=n)
        .map(|i| {
            let t = if i == n { b } else { a + (b - a) * T::c(i as f64 / n as f64) };
            bracket_at(u, v, t)
        })
        .collect()
}

fn forcing_at<T: Real>(f: Option<&PiecewiseFn>, x: T) -> Result<T> {
    f.map_or(Ok(T::zero()), |f| f.eval(x))
}

/// `|∫_a^b l[u]·conj(v) − ∫_a^b u·conj(l[v]) − [u, v]_a^b|`, with
/// `l[u] = λ_u u + f_u` reconstructed from the trajectory's spectral
/// parameter and the forcing used to produce it.
pub fn lagrange_residual<T: Real>(
    c: &CoefficientSet,
    u: &QuasiTrajectory<T>,
    fu: Option<&PiecewiseFn>,
    v: &QuasiTrajectory<T>,
    fv: Option<&PiecewiseFn>,
    a: T,
    b: T,
) -> Result<T> {
    let (af, bf) = (a.f64(), b.f64());
    let mut breaks = c.breaks_in(af.min(bf), af.max(bf));
    breaks.extend(u.nodes_in(af.min(bf), af.max(bf)));
    breaks.extend(v.nodes_in(af.min(bf), af.max(bf)));
    for f in [fu, fv].into_iter().flatten() {
        breaks.extend_from_slice(f.breakpoints());
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (lu, lv) = (T::c(u.lambda()), T::c(v.lambda()));
    let integrand = |x: T| -> Result<Complex<T>> {
        let su = u.state_at(x)?;
        let sv = v.state_at(x)?;
        let l_u = su.u * lu + forcing_at(fu, x)?;
        let l_v = sv.u * lv + forcing_at(fv, x)?;
        Ok(l_u * sv.u.conj() - su.u * l_v.conj())
    };
    let cfg = QuadConfig {
        abs: 1e-14,
        rel: 1e-12,
        max_intervals: 20_000,
    };
    let r = integrate_split(integrand, a, b, &breaks, &cfg)?;
    if !r.converged {
        return Err(Error::Quadrature {
            a: af,
            b: bf,
            reason: format!("error estimate {}", r.error),
        });
    }
    let boundary = bracket_at(u, v, b)?.value - bracket_at(u, v, a)?.value;
    Ok((r.value - boundary).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLimit<T> {
    pub estimate: Complex<T>,
    pub converged: bool,
}

/// Evaluates the bracket at `t = ±w` for the increasing distances `windows`
/// and reports the last value; converged when successive differences never
/// grow above the threshold `1e-6·(1 + |estimate|)` and the last one is
/// below it.
pub fn bracket_tail_limit<T: Real>(
    u: &QuasiTrajectory<T>,
    v: &QuasiTrajectory<T>,
    direction: Side,
    windows: &[T],
) -> Result<TailLimit<T>> {
    let sign = if direction == Side::Plus { T::one() } else { -T::one() };
    let values = windows
        .iter()
        .map(|&w| bracket_at(u, v, sign * w).map(|b| b.value))
        .collect::<Result<Vec<_>>>()?;
    let Some(&estimate) = values.last() else {
        return Ok(TailLimit {
            estimate: Complex::new(T::zero(), T::zero()),
            converged: false,
        });
    };
    let threshold = T::c(1e-6) * (T::one() + estimate.norm());
    let diffs: Vec<T> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let monotone = diffs.windows(2).all(|d| d[1] <= d[0].max(threshold));
    let converged = values.len() >= 2 && monotone && diffs.last().is_some_and(|&d| d <= threshold);
    Ok(TailLimit { estimate, converged })
}
