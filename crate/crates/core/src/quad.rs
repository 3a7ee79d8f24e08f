//! Globally adaptive Gauss–Kronrod (7, 15) quadrature with forced splits at
//! caller-supplied break points.

#![allow(clippy::excessive_precision)]

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue<T: Real>: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> T;
    fn is_finite(self) -> bool;
}

impl<T: Real> QuadValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn norm(self) -> T {
        self.abs()
    }
    fn is_finite(self) -> bool {
        num_traits::Float::is_finite(self)
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn norm(self) -> T {
        Complex::norm(self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs: 1e-13,
            rel: 1e-11,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V, T> {
    pub value: V,
    pub error: T,
    pub converged: bool,
    pub intervals: usize,
    /// Subinterval carrying the largest error estimate at exit.
    pub worst: (T, T),
}

struct Piece<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::c(200.0) * err / res_asc).powf(T::c(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    if res_abs > T::min_positive_value() / (T::c(50.0) * T::epsilon()) {
        let min_err = T::c(50.0) * T::epsilon() * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// One 15-point Kronrod rule with the embedded 7-point Gauss error estimate.
pub fn gk15<T, V, F>(f: &mut F, a: T, b: T) -> Result<(V, T)>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> Result<V>,
{
    let center = (a + b) * T::c(0.5);
    let half = (b - a) * T::c(0.5);
    let mut fv = [V::zero(); 15];
    let mut eval = |x: T| -> Result<V> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { x: x.f64() });
        }
        Ok(v)
    };
    fv[7] = eval(center)?;
    for j in 0..7 {
        let dx = half * T::c(XGK[j]);
        fv[j] = eval(center - dx)?;
        fv[14 - j] = eval(center + dx)?;
    }
    let mut kron = fv[7] * T::c(WGK[7]);
    let mut gauss = fv[7] * T::c(WG[3]);
    let mut res_abs = fv[7].norm() * T::c(WGK[7]);
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        kron = kron + pair * T::c(WGK[j]);
        res_abs = res_abs + (fv[j].norm() + fv[14 - j].norm()) * T::c(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::c(WG[j / 2]);
        }
    }
    let mean = kron * T::c(0.5);
    let mut res_asc = (fv[7] - mean).norm() * T::c(WGK[7]);
    for j in 0..7 {
        res_asc = res_asc + ((fv[j] - mean).norm() + (fv[14 - j] - mean).norm()) * T::c(WGK[j]);
    }
    let h = half.abs();
    let err = rescale_error((kron - gauss).norm() * h, res_abs * h, res_asc * h);
    Ok((kron * half, err))
}

/// Integrates over `[a, b]`.
pub fn integrate<T, V, F>(f: F, a: T, b: T, cfg: &QuadConfig) -> Result<QuadResult<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> Result<V>,
{
    integrate_split(f, a, b, &[], cfg)
}

/// Integrates over `[a, b]`, never placing a node on any of `breaks`.
///
/// The estimate is refined globally: the piece with the largest error is
/// bisected until the total error meets `max(abs, rel·|I|)` or the piece
/// budget runs out, in which case `converged` is false.
pub fn integrate_split<T, V, F>(mut f: F, a: T, b: T, breaks: &[f64], cfg: &QuadConfig) -> Result<QuadResult<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> Result<V>,
{
    if a == b {
        return Ok(QuadResult {
            value: V::zero(),
            error: T::zero(),
            converged: true,
            intervals: 0,
            worst: (a, b),
        });
    }
    if b < a {
        let r = integrate_split(f, b, a, breaks, cfg)?;
        return Ok(QuadResult {
            value: r.value * -T::one(),
            ..r
        });
    }
    let mut nodes = vec![a];
    let mut inner: Vec<T> = breaks.iter().map(|&x| T::c(x)).filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).expect("finite break"));
    inner.dedup();
    nodes.extend(inner);
    nodes.push(b);

    let mut pieces = Vec::with_capacity(cfg.max_intervals.max(nodes.len()));
    for w in nodes.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1])?;
        pieces.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let abs_tol = T::c(cfg.abs);
    let rel_tol = T::c(cfg.rel);
    let total = |ps: &[Piece<V, T>]| ps.iter().fold((V::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
    loop {
        let (value, error) = total(&pieces);
        let worst_idx = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite error"))
            .map(|(i, _)| i)
            .expect("nonempty");
        let worst = (pieces[worst_idx].a, pieces[worst_idx].b);
        let done = error <= abs_tol.max(rel_tol * value.norm());
        let w = &pieces[worst_idx];
        let mid = (w.a + w.b) * T::c(0.5);
        let splittable = mid > w.a && mid < w.b && (w.b - w.a) > T::c(100.0) * T::epsilon() * w.a.abs().max(w.b.abs());
        if done || pieces.len() >= cfg.max_intervals || !splittable {
            return Ok(QuadResult {
                value,
                error,
                converged: done,
                intervals: pieces.len(),
                worst,
            });
        }
        let (a0, b0) = (w.a, w.b);
        let (v1, e1) = gk15(&mut f, a0, mid)?;
        let (v2, e2) = gk15(&mut f, mid, b0)?;
        pieces[worst_idx] = Piece {
            a: a0,
            b: mid,
            value: v1,
            error: e1,
        };
        pieces.push(Piece {
            a: mid,
            b: b0,
            value: v2,
            error: e2,
        });
    }
}
