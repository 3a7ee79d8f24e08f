//! Audits of the hypotheses that force essential self-adjointness: growth of
//! `∫ p^{-1/2}` on both half-lines, `O(ρ²)` growth of `p`, local regularity,
//! interval-sequence bounds, the `ρ` change of variable, and a numerical probe
//! for square-integrable solutions of `l[v] = λ₀ v`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::coeff::{CoefficientSet, GrowthClass, Interval, PiecewiseFn, Side};
use crate::error::{Error, Result};
use crate::integrator::{solve_system, QuasiTrajectory, Tolerances};
use crate::quad::{integrate, integrate_split, QuadConfig};
use crate::quadform::{rayleigh_lower_bound_probe, TestFunction};
use crate::report::{format_real, ConditionReport, Verdict};
use crate::scalar::Real;
use crate::shinzettl::QuasiState;

/// Minimum relative growth of a partial integral per doubling of the window.
pub const HR_GROWTH_PER_DOUBLING: f64 = 0.05;
/// Fitted exponent at or below which the `O(ρ²)` bound is accepted.
pub const CLARK_SATISFIED_EXPONENT: f64 = 2.05;
/// Fitted exponent at or above which the `O(ρ²)` bound is rejected.
pub const CLARK_VIOLATED_EXPONENT: f64 = 2.5;
/// Annulus-to-interior mass ratio a direction must reach in the last window.
pub const KERNEL_RATIO_THRESHOLD: f64 = 0.5;
pub const KERNEL_DIRECTIONS: usize = 32;

pub const RHO_CSV_HEADER: &str = "x,rho";

const SAMPLES_PER_PIECE: usize = 256;
const RHO_MIN_NODES: usize = 1000;

fn p_samples(p: &PiecewiseFn, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        out.push((x, p.eval(x)?));
    }
    for &b in p.breakpoints().iter().filter(|&&b| b >= lo && b <= hi) {
        out.push((b, p.eval_left(b)?));
        out.push((b, p.eval(b)?));
    }
    Ok(out)
}

fn require_positive(p: &PiecewiseFn, lo: f64, hi: f64, n: usize) -> Result<()> {
    for (x, v) in p_samples(p, lo, hi, n)? {
        if !(v > 0.0) {
            return Err(Error::Invalid(format!("p = {v} is not positive at x = {x}")));
        }
    }
    Ok(())
}

fn inv_sqrt_p<T: Real>(p: &PiecewiseFn, x: T) -> Result<T> {
    let v = p.eval(x)?;
    if v <= T::zero() {
        return Err(Error::Invalid(format!("p is not positive at x = {}", x.f64())));
    }
    Ok(v.sqrt().recip())
}

/// `ρ(x) = ∫_0^x p^{-1/2}` on a grid over the hull of a window and `0`.
#[derive(Debug, Clone)]
pub struct RhoMap<T> {
    xs: Vec<T>,
    rhos: Vec<T>,
    p: PiecewiseFn,
    cfg: QuadConfig,
}

impl<T: Real> RhoMap<T> {
    pub fn grid(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs.iter().copied().zip(self.rhos.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], *self.xs.last().expect("nonempty grid"))
    }

    pub fn range(&self) -> (T, T) {
        (self.rhos[0], *self.rhos.last().expect("nonempty grid"))
    }

    fn out_of_span(&self, t: T, (lo, hi): (T, T)) -> Error {
        Error::OutOfSpan {
            t: t.f64(),
            lo: lo.f64(),
            hi: hi.f64(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{RHO_CSV_HEADER}\n");
        for (x, r) in self.grid() {
            out.push_str(&format!("{},{}\n", format_real(x.f64()), format_real(r.f64())));
        }
        out
    }

    /// `ρ(x)`, integrating from the nearest grid node at or below `x`.
    pub fn eval(&self, x: T) -> Result<T> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(self.out_of_span(x, (lo, hi)));
        }
        let i = self.xs.partition_point(|&n| n <= x).saturating_sub(1);
        if self.xs[i] == x {
            return Ok(self.rhos[i]);
        }
        let r = integrate(|t: T| inv_sqrt_p(&self.p, t), self.xs[i], x, &self.cfg)?;
        Ok(self.rhos[i] + r.value)
    }

    /// `x` with `ρ(x) = rho`: safeguarded Newton inside the bracketing cell.
    pub fn inverse(&self, rho: T) -> Result<T> {
        let (lo, hi) = self.range();
        if !(rho >= lo && rho <= hi) {
            return Err(self.out_of_span(rho, (lo, hi)));
        }
        let i = self.rhos.partition_point(|&r| r <= rho).saturating_sub(1);
        if self.rhos[i] == rho {
            return Ok(self.xs[i]);
        }
        let (mut a, mut b) = (self.xs[i], self.xs[(i + 1).min(self.xs.len() - 1)]);
        let mut x = a + (b - a) * (rho - self.rhos[i]) / (self.rhos[i + 1] - self.rhos[i]);
        for _ in 0..100 {
            let f = self.eval(x)? - rho;
            if f == T::zero() {
                break;
            }
            if f > T::zero() {
                b = x;
            } else {
                a = x;
            }
            let newton = x - f / inv_sqrt_p(&self.p, x)?;
            x = if newton > a && newton < b {
                newton
            } else {
                (a + b) / T::c(2.0)
            };
            if b - a <= T::epsilon() * (T::one() + x.abs()) || f.abs() <= T::epsilon() * (T::one() + rho.abs()) {
                break;
            }
        }
        Ok(x)
    }
}

pub fn rho_transform<T: Real>(c: &CoefficientSet, window: Interval, tol: &Tolerances) -> Result<RhoMap<T>> {
    tol.validate()?;
    let (lo, hi) = (window.lo.min(0.0), window.hi.max(0.0));
    require_positive(&c.p, lo, hi, 4 * RHO_MIN_NODES)?;
    let mut xs: Vec<f64> = (0..=RHO_MIN_NODES)
        .map(|i| lo + (hi - lo) * i as f64 / RHO_MIN_NODES as f64)
        .collect();
    xs.push(0.0);
    xs.extend(c.p.breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let cfg = QuadConfig {
        abs: tol.abs.min(1e-12),
        rel: tol.rel.min(1e-12),
        max_intervals: 2000,
    };
    let cells = xs
        .par_windows(2)
        .map(|w| {
            let r = integrate(|t: T| inv_sqrt_p(&c.p, t), T::c(w[0]), T::c(w[1]), &cfg)?;
            if !r.converged {
                return Err(Error::Quadrature {
                    a: w[0],
                    b: w[1],
                    reason: "rho cell did not converge".into(),
                });
            }
            Ok(r.value)
        })
        .collect::<Result<Vec<T>>>()?;
    let zero = xs.iter().position(|&x| x == 0.0).expect("0 is a node");
    let mut rhos = vec![T::zero(); xs.len()];
    for i in zero + 1..xs.len() {
        rhos[i] = rhos[i - 1] + cells[i - 1];
    }
    for i in (0..zero).rev() {
        rhos[i] = rhos[i + 1] - cells[i];
    }
    Ok(RhoMap {
        xs: xs.into_iter().map(T::c).collect(),
        rhos,
        p: c.p.clone(),
        cfg,
    })
}

fn doubling_check(list: &[f64], what: &str, min_len: usize) -> Result<()> {
    if list.len() < min_len {
        return Err(Error::Invalid(format!(
            "{what} needs at least {min_len} entries, got {}",
            list.len()
        )));
    }
    if !list.iter().all(|&w| w.is_finite() && w > 0.0) {
        return Err(Error::Invalid(format!("{what} entries must be finite and positive")));
    }
    if list.windows(2).any(|w| (w[1] / w[0] - 2.0).abs() > 1e-9) {
        return Err(Error::Invalid(format!("{what} must be geometric with ratio 2")));
    }
    Ok(())
}

/// `1, 2, 4, …, 4096`.
pub fn default_hr_windows() -> Vec<f64> {
    (0..=12).map(|k| 2f64.powi(k)).collect()
}

/// `4, 8, …, 512`.
pub fn default_clark_grid() -> Vec<f64> {
    (2..=9).map(|k| 2f64.powi(k)).collect()
}

fn tag_verdict(class: GrowthClass) -> Verdict {
    match class {
        GrowthClass::Bounded => Verdict::Satisfied,
        GrowthClass::Power(e) if e <= 2.0 => Verdict::Satisfied,
        GrowthClass::Power(_) => Verdict::Violated,
        GrowthClass::Exponential(rate) if rate <= 0.0 => Verdict::Satisfied,
        GrowthClass::Exponential(_) => Verdict::Violated,
        GrowthClass::Unspecified => Verdict::Inconclusive,
    }
}

fn class_text(class: GrowthClass) -> String {
    match class {
        GrowthClass::Power(e) => format!("power {}", format_real(e)),
        GrowthClass::Exponential(a) => format!("exponential {}", format_real(a)),
        GrowthClass::Bounded => "bounded".into(),
        GrowthClass::Unspecified => "unspecified".into(),
    }
}

/// Cumulative `∫_0^{±w} p^{-1/2}` at each window distance `w`.
fn hr_partials(c: &CoefficientSet, side: Side, windows: &[f64]) -> Result<Vec<f64>> {
    let sign = if side == Side::Plus { 1.0 } else { -1.0 };
    let cfg = QuadConfig {
        abs: 1e-13,
        rel: 1e-11,
        max_intervals: 4000,
    };
    let mut edges = vec![0.0];
    edges.extend_from_slice(windows);
    let pieces = edges
        .par_windows(2)
        .map(|w| {
            let (a, b) = (sign * w[0], sign * w[1]);
            let (lo, hi) = (a.min(b), a.max(b));
            require_positive(&c.p, lo, hi, SAMPLES_PER_PIECE)?;
            let breaks: Vec<f64> = c.p.breakpoints().iter().copied().filter(|&b| b > lo && b < hi).collect();
            let r = integrate_split(|t: f64| inv_sqrt_p(&c.p, t), lo, hi, &breaks, &cfg)?;
            if !r.converged {
                return Err(Error::Quadrature {
                    a: lo,
                    b: hi,
                    reason: "partial integral did not converge".into(),
                });
            }
            Ok(r.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pieces
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect())
}

/// Divergence of `∫_0^{±∞} p^{-1/2}`, decided from the declared growth tags;
/// the partial integrals on `windows` (distances, doubling) are evidence.
pub fn check_hartman_rellich(c: &CoefficientSet, windows: &[f64]) -> Result<ConditionReport> {
    doubling_check(windows, "window list", 2)?;
    let mut rep = ConditionReport::new("hartman_rellich");
    let mut verdict = Verdict::Satisfied;
    let mut totals = [0.0; 2];
    for (k, side) in [Side::Plus, Side::Minus].into_iter().enumerate() {
        let partials = hr_partials(c, side, windows)?;
        for (w, v) in windows.iter().zip(&partials) {
            rep.push(format!("partial_{}_{}", side.keyword(), format_real(*w)), *v);
        }
        let growth: Vec<f64> = partials.windows(2).map(|p| p[1] / p[0] - 1.0).collect();
        for (w, g) in windows[1..].iter().zip(&growth) {
            rep.push(format!("growth_{}_{}", side.keyword(), format_real(*w)), *g);
        }
        let grows = growth.iter().all(|&g| g >= HR_GROWTH_PER_DOUBLING);
        let class = c.growth(side);
        let side_verdict = match (tag_verdict(class), grows) {
            (Verdict::Inconclusive, true) => Verdict::Satisfied,
            (v, _) => v,
        };
        rep.note(format!("{} side: growth tag {}", side.keyword(), class_text(class)));
        match (class, grows) {
            (GrowthClass::Unspecified, true) => rep.note(format!(
                "{} side: numeric evidence only: partial integrals grow by at least 5% per doubling on every sampled window",
                side.keyword()
            )),
            (GrowthClass::Unspecified, false) => rep.note(format!(
                "{} side: partial integrals level off on the sampled windows",
                side.keyword()
            )),
            (_, false) if side_verdict == Verdict::Satisfied => rep.note(format!(
                "{} side: tag implies divergence but sampled growth is below 5% per doubling",
                side.keyword()
            )),
            _ => {}
        }
        verdict = verdict.and(side_verdict);
        totals[k] = *partials.last().expect("nonempty");
    }
    rep.push("partial_total", totals[0] + totals[1]);
    rep.verdict = verdict;
    Ok(rep)
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn sup_p(p: &PiecewiseFn, lo: f64, hi: f64) -> Result<f64> {
    let mut sup = f64::NEG_INFINITY;
    for (_, v) in p_samples(p, lo, hi, 2000)? {
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `sup p` over `[ρ/2, ρ]` and `[−ρ, −ρ/2]` against `ρ²`, via fitted log-log
/// exponents on a doubling grid.
pub fn check_clark(c: &CoefficientSet, rho_grid: &[f64]) -> Result<ConditionReport> {
    doubling_check(rho_grid, "rho grid", 6)?;
    let mut rep = ConditionReport::new("clark");
    let logs: Vec<f64> = rho_grid.iter().map(|r| r.ln()).collect();
    let mut verdict = Verdict::Satisfied;
    for side in [Side::Plus, Side::Minus] {
        let sups = rho_grid
            .par_iter()
            .map(|&rho| match side {
                Side::Plus => sup_p(&c.p, rho / 2.0, rho),
                Side::Minus => sup_p(&c.p, -rho, -rho / 2.0),
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(bad) = sups.iter().find(|&&s| !(s > 0.0)) {
            return Err(Error::Invalid(format!(
                "sup of p is {bad}; the bound needs p > 0 somewhere on each annulus"
            )));
        }
        for (rho, s) in rho_grid.iter().zip(&sups) {
            rep.push(format!("sup_{}_{}", side.keyword(), format_real(*rho)), *s);
        }
        let ls: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
        for (i, w) in ls.windows(2).enumerate() {
            rep.push(
                format!("local_exponent_{}_{}", side.keyword(), format_real(rho_grid[i + 1])),
                (w[1] - w[0]) / 2f64.ln(),
            );
        }
        let slope = ls_slope(&logs, &ls);
        rep.push(format!("exponent_{}", side.keyword()), slope);
        let ratios: Vec<f64> = sups.iter().zip(rho_grid).map(|(s, r)| s / (r * r)).collect();
        let top = &ratios[ratios.len() - 3..];
        let settling = top.windows(2).all(|w| w[1] <= w[0]);
        rep.push(format!("ratio_top_{}", side.keyword()), top[2]);
        let side_verdict = if slope >= CLARK_VIOLATED_EXPONENT {
            Verdict::Violated
        } else if slope <= CLARK_SATISFIED_EXPONENT && settling {
            Verdict::Satisfied
        } else {
            Verdict::Inconclusive
        };
        verdict = verdict.and(side_verdict);
    }
    rep.note(format!(
        "satisfied when both fitted exponents are <= {CLARK_SATISFIED_EXPONENT} and sup p/rho^2 is non-increasing over the top three radii; violated when an exponent is >= {CLARK_VIOLATED_EXPONENT}"
    ));
    rep.verdict = verdict;
    Ok(rep)
}

/// Sampled evidence that `p` is positive, continuous and `W¹₂` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRegularity {
    pub p_min: f64,
    pub p_max: f64,
    pub max_jump: f64,
    /// `∫ (p')²` by finite differences; `None` when the quadrature fails.
    pub int_dp2: Option<f64>,
}

impl LocalRegularity {
    fn verdict(&self) -> Verdict {
        if !(self.p_min > 0.0) || self.max_jump > 0.0 {
            Verdict::Violated
        } else if self.int_dp2.is_some_and(f64::is_finite) {
            Verdict::Satisfied
        } else {
            Verdict::Inconclusive
        }
    }
}

pub fn local_regularity(p: &PiecewiseFn, lo: f64, hi: f64) -> Result<LocalRegularity> {
    let samples = p_samples(p, lo, hi, 1000)?;
    let p_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let p_max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let mut max_jump: f64 = 0.0;
    let inner: Vec<f64> = p.breakpoints().iter().copied().filter(|&b| b > lo && b < hi).collect();
    for &b in &inner {
        let (l, r) = (p.eval_left(b)?, p.eval(b)?);
        let jump = (l - r).abs();
        if jump > 1e-9 * (1.0 + l.abs().max(r.abs())) {
            max_jump = max_jump.max(jump);
        }
    }
    let mut edges = vec![lo];
    edges.extend(&inner);
    edges.push(hi);
    let cfg = QuadConfig {
        abs: 1e-10,
        rel: 1e-8,
        max_intervals: 500,
    };
    let mut total = 0.0;
    let mut ok = true;
    for w in edges.windows(2) {
        let seg = p.segment_index(0.5 * (w[0] + w[1]));
        let dp2 = |x: f64| -> Result<f64> {
            let h = 1e-6 * x.abs().max(1.0);
            let d = (p.eval_segment(seg, x + h)? - p.eval_segment(seg, x - h)?) / (2.0 * h);
            Ok(d * d)
        };
        match integrate(dp2, w[0], w[1], &cfg) {
            Ok(r) if r.converged => total += r.value,
            _ => ok = false,
        }
    }
    Ok(LocalRegularity {
        p_min,
        p_max,
        max_jump,
        int_dp2: ok.then_some(total),
    })
}

/// Local regularity of `p` on a probe window together with the divergence
/// condition, as one conjunction.
pub fn check_theorem_b_with(c: &CoefficientSet, probe: Interval, hr_windows: &[f64]) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new("theorem_b");
    let reg = local_regularity(&c.p, probe.lo, probe.hi)?;
    rep.push("p_sample_min", reg.p_min);
    rep.push("p_sample_max", reg.p_max);
    rep.push("p_max_jump", reg.max_jump);
    rep.push("int_dp2", reg.int_dp2.unwrap_or(f64::NAN));
    let local = reg.verdict();
    if reg.max_jump > 0.0 {
        rep.note("p jumps at a breakpoint; W1_2,loc functions are continuous");
    }
    if !(reg.p_min > 0.0) {
        rep.note("p is not positive at some sample; divergence check skipped");
        rep.verdict = Verdict::Violated;
        return Ok(rep);
    }
    if reg.int_dp2.is_none() {
        rep.note("could not integrate (p')^2 on the probe window");
    }
    let hr = match check_hartman_rellich(c, hr_windows) {
        Ok(hr) => hr,
        Err(Error::Invalid(msg)) => {
            rep.note(format!("divergence check: {msg}"));
            rep.verdict = Verdict::Violated;
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    for (label, v) in &hr.evidence {
        rep.push(format!("hr_{label}"), *v);
    }
    for n in &hr.notes {
        rep.note(format!("hr: {n}"));
    }
    rep.push("local_verdict_code", verdict_code(local));
    rep.push("hr_verdict_code", verdict_code(hr.verdict));
    rep.verdict = local.and(hr.verdict);
    Ok(rep)
}

fn verdict_code(v: Verdict) -> f64 {
    match v {
        Verdict::Satisfied => 1.0,
        Verdict::Inconclusive => 0.0,
        Verdict::Violated => -1.0,
    }
}

/// [`check_theorem_b_with`] on `[-16, 16]` and [`default_hr_windows`].
pub fn check_theorem_b(c: &CoefficientSet) -> Result<ConditionReport> {
    check_theorem_b_with(c, Interval { lo: -16.0, hi: 16.0 }, &default_hr_windows())
}

/// Intervals `Δ_n = [a_n, b_n]` for an index set closed under negation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSequence {
    entries: Vec<(i64, f64, f64)>,
}

impl IntervalSequence {
    pub fn new(mut entries: Vec<(i64, f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("empty interval sequence".into()));
        }
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("duplicate interval index".into()));
        }
        for &(n, a, b) in &entries {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!("interval {n} = [{a}, {b}] must be finite with a < b")));
            }
        }
        let idx: Vec<i64> = entries.iter().map(|e| e.0).collect();
        if idx.iter().any(|n| idx.binary_search(&-n).is_err()) {
            return Err(Error::Invalid("index range must be symmetric".into()));
        }
        let pos: Vec<_> = entries.iter().filter(|e| e.0 > 0).collect();
        let neg: Vec<_> = entries.iter().filter(|e| e.0 < 0).collect();
        if pos.windows(2).any(|w| w[1].1 <= w[0].1) {
            return Err(Error::Invalid("a_n must increase with n for n > 0".into()));
        }
        if neg.windows(2).any(|w| w[1].2 <= w[0].2) {
            return Err(Error::Invalid("b_n must decrease as n decreases for n < 0".into()));
        }
        Ok(IntervalSequence { entries })
    }

    /// Rows `n,a,b`; a first line that does not parse is taken as a header.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = (fields.len() == 3)
                .then(|| {
                    Some((
                        fields[0].parse::<i64>().ok()?,
                        fields[1].parse::<f64>().ok()?,
                        fields[2].parse::<f64>().ok()?,
                    ))
                })
                .flatten();
            match parsed {
                Some(e) => entries.push(e),
                None if i == 0 => continue,
                None => {
                    return Err(Error::ProblemFile {
                        line: i + 1,
                        message: format!("expected `n,a,b`, got `{line}`"),
                    })
                }
            }
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(i64, f64, f64)] {
        &self.entries
    }
}

/// Per-interval regularity and `C* = max_n sup_{Δ_n} p / |Δ_n|²`.
pub fn check_theorem_c(c: &CoefficientSet, seq: &IntervalSequence) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new("theorem_c");
    let regs = seq
        .entries()
        .par_iter()
        .map(|&(_, a, b)| local_regularity(&c.p, a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut verdict = Verdict::Satisfied;
    let mut c_star: f64 = 0.0;
    for (&(n, a, b), reg) in seq.entries().iter().zip(&regs) {
        let ratio = reg.p_max / ((b - a) * (b - a));
        rep.push(format!("sup_p_{n}"), reg.p_max);
        rep.push(format!("ratio_{n}"), ratio);
        let v = reg.verdict();
        match v {
            Verdict::Violated if !(reg.p_min > 0.0) => rep.note(format!("interval {n}: p is not positive")),
            Verdict::Violated => rep.note(format!("interval {n}: p is discontinuous")),
            Verdict::Inconclusive => rep.note(format!("interval {n}: could not integrate (p')^2")),
            Verdict::Satisfied => {}
        }
        verdict = verdict.and(v);
        c_star = c_star.max(ratio);
    }
    rep.push("C_star", c_star);
    rep.note(
        "C_star covers only the supplied indices; the uniform bound over all n rests on the sequence continuing with the same behaviour",
    );
    rep.verdict = verdict;
    Ok(rep)
}

/// Nested windows `[-2^k, 2^k]` for `k = 0..=4`.
pub fn default_kernel_windows() -> Vec<Interval> {
    (0..=4)
        .map(|k| Interval {
            lo: -(2f64.powi(k)),
            hi: 2f64.powi(k),
        })
        .collect()
}

/// A shift below the spectrum: the smallest Rayleigh quotient of the first
/// eight sine modes on `window`, minus one.
pub fn probe_lambda(c: &CoefficientSet, window: Interval) -> Result<f64> {
    let family = (1..=8)
        .map(|k| TestFunction::sine_mode(k, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(rayleigh_lower_bound_probe::<f64>(c, &family)?.min_quotient - 1.0)
}

/// `[∫|θ|², ∫|φ|², ∫ Re θ·conj(φ)]` over `[lo, hi]`.
fn gram<T: Real>(th: &QuasiTrajectory<T>, ph: &QuasiTrajectory<T>, lo: f64, hi: f64) -> Result<[f64; 3]> {
    if lo >= hi {
        return Ok([0.0; 3]);
    }
    let mut breaks = th.nodes_in(lo, hi);
    breaks.extend(ph.nodes_in(lo, hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let cfg = QuadConfig {
        abs: 0.0,
        rel: 1e-10,
        max_intervals: 20_000,
    };
    let diag = integrate_split(
        |x: T| {
            let (a, b) = (th.state_at(x)?.u, ph.state_at(x)?.u);
            Ok(Complex::new(a.norm_sqr(), b.norm_sqr()))
        },
        T::c(lo),
        T::c(hi),
        &breaks,
        &cfg,
    )?;
    let off = integrate_split(
        |x: T| Ok((th.state_at(x)?.u * ph.state_at(x)?.u.conj()).re),
        T::c(lo),
        T::c(hi),
        &breaks,
        &cfg,
    )?;
    Ok([diag.value.re.f64(), diag.value.im.f64(), off.value.f64()])
}

fn mass(g: [f64; 3], angle: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    c * c * g[0] + s * s * g[1] + 2.0 * c * s * g[2]
}

/// Looks for solutions of `l[v] = λ₀ v` that are square-integrable on both
/// sides. Over nested `windows`, each real initial direction at the centre is
/// scored by `r_n = mass(W_n \ W_{n−1}) / mass(W_{n−1})`; if every direction
/// keeps `r ≥ 0.5` in the last window no candidate looks square-integrable.
pub fn kernel_probe<T: Real>(
    c: &CoefficientSet,
    lambda0: f64,
    windows: &[Interval],
    tol: &Tolerances,
) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new("kernel_probe");
    rep.push("lambda0", lambda0);
    if windows.len() < 2 {
        rep.note("need at least two nested windows to form an annulus");
        return Ok(rep);
    }
    if windows
        .windows(2)
        .any(|w| !(w[1].lo <= w[0].lo && w[1].hi >= w[0].hi && w[1].len() > w[0].len()))
    {
        return Err(Error::Invalid("kernel probe windows must be nested and growing".into()));
    }
    let centre = windows[0].mid();
    let outer = windows.last().expect("nonempty");
    let solve = |end: f64, u: T, u1: T| solve_system(c, lambda0, (centre, end), QuasiState::real(T::c(centre), u, u1), None, tol);
    let (fwd, bwd) = rayon::join(
        || -> Result<_> { Ok((solve(outer.hi, T::one(), T::zero())?, solve(outer.hi, T::zero(), T::one())?)) },
        || -> Result<_> { Ok((solve(outer.lo, T::one(), T::zero())?, solve(outer.lo, T::zero(), T::one())?)) },
    );
    let ((th_f, ph_f), (th_b, ph_b)) = (fwd?, bwd?);
    // Gram matrices of the nested pieces on either side of the centre
    let pieces = windows
        .par_iter()
        .enumerate()
        .map(|(n, w)| {
            let (inner_lo, inner_hi) = if n == 0 {
                (centre, centre)
            } else {
                (windows[n - 1].lo, windows[n - 1].hi)
            };
            let right = gram(&th_f, &ph_f, inner_hi, w.hi)?;
            let left = gram(&th_b, &ph_b, w.lo, inner_lo)?;
            Ok([right[0] + left[0], right[1] + left[1], right[2] + left[2]])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let mut all_pass = true;
    let mut inner = pieces[0];
    let mut last_min = f64::INFINITY;
    for (n, annulus) in pieces.iter().enumerate().skip(1) {
        let mut min_ratio = f64::INFINITY;
        for j in 0..KERNEL_DIRECTIONS {
            let angle = std::f64::consts::PI * j as f64 / KERNEL_DIRECTIONS as f64;
            let r = mass(*annulus, angle) / mass(inner, angle);
            rep.push(format!("ratio_w{n}_dir{j}"), r);
            min_ratio = min_ratio.min(r);
        }
        rep.push(format!("min_ratio_w{n}"), min_ratio);
        for k in 0..3 {
            inner[k] += annulus[k];
        }
        last_min = min_ratio;
    }
    if !(last_min >= KERNEL_RATIO_THRESHOLD) {
        all_pass = false;
    }
    rep.note(format!(
        "{KERNEL_DIRECTIONS} directions in the real (u, u1) plane; pass when the annulus-to-interior mass ratio in the last window is >= {KERNEL_RATIO_THRESHOLD}"
    ));
    if all_pass {
        rep.note("consistent with self-adjoint: no sampled solution looks square-integrable on both sides");
        rep.verdict = Verdict::Satisfied;
    } else {
        rep.note("some direction decays on the sampled windows; a square-integrable solution cannot be ruled out");
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_expr(e: &str) -> CoefficientSet {
        CoefficientSet::free().with_p(PiecewiseFn::parse(&[], &[e]).unwrap())
    }

    #[test]
    fn rho_examples() {
        let tol = Tolerances::default();
        let m: RhoMap<f64> = rho_transform(&CoefficientSet::free(), Interval::new(-5.0, 5.0).unwrap(), &tol).unwrap();
        assert!(m.len() >= 1000);
        for x in [-5.0, -1.234, 0.0, 2.5, 4.999] {
            assert!((m.eval(x).unwrap() - x).abs() < 1e-10);
        }
        let m: RhoMap<f64> = rho_transform(&p_expr("1 + x^2"), Interval::new(0.0, 5.0).unwrap(), &tol).unwrap();
        assert!((m.eval(5.0).unwrap() - 5f64.asinh()).abs() < 1e-8);
        let m: RhoMap<f64> = rho_transform(&p_expr("4"), Interval::new(0.0, 2.0).unwrap(), &tol).unwrap();
        assert!((m.eval(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.eval(2.5).is_err());
        assert!(rho_transform::<f64>(&p_expr("x"), Interval::new(-1.0, 1.0).unwrap(), &tol).is_err());
    }

    #[test]
    fn untagged_sides_fall_back_to_growth() {
        let w = default_hr_windows();
        let r = check_hartman_rellich(&CoefficientSet::free(), &w).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!(r.notes.iter().any(|n| n.contains("numeric evidence only")));
        let r = check_hartman_rellich(&p_expr("(1 + x^2)^2"), &w).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn rho_inverse() {
        let tol = Tolerances::default();
        let c = CoefficientSet::free().with_p(PiecewiseFn::parse(&[1.0], &["1 + x^2", "2*x"]).unwrap());
        let m: RhoMap<f64> = rho_transform(&c, Interval::new(-3.0, 4.0).unwrap(), &tol).unwrap();
        assert!(m.grid().collect::<Vec<_>>().windows(2).all(|w| w[1].1 > w[0].1));
        for i in 0..100 {
            let x = -3.0 + 7.0 * i as f64 / 99.0;
            assert!((m.inverse(m.eval(x).unwrap()).unwrap() - x).abs() < 1e-8);
        }
    }

    #[test]
    fn hartman_rellich_examples() {
        let w = default_hr_windows();
        let c = CoefficientSet::free().with_growth(GrowthClass::Power(0.0), GrowthClass::Power(0.0));
        assert_eq!(check_hartman_rellich(&c, &w).unwrap().verdict, Verdict::Satisfied);

        let c = p_expr("1 + x^2").with_growth(GrowthClass::Power(2.0), GrowthClass::Power(2.0));
        let r = check_hartman_rellich(&c, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        let last = r.evidence("partial_plus_4096").unwrap();
        assert!((last - 4096f64.asinh()).abs() < 1e-8);

        let c = p_expr("(1 + x^2)^2").with_growth(GrowthClass::Power(4.0), GrowthClass::Power(4.0));
        let r = check_hartman_rellich(&c, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!((r.evidence("partial_total").unwrap() - 2.0 * 4096f64.atan()).abs() < 1e-9);

        // untagged: asinh growth stays above 5% per doubling up to 4096
        let r = check_hartman_rellich(&p_expr("1 + x^2"), &w).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!(check_hartman_rellich(&p_expr("x"), &w).is_err());
        assert!(check_hartman_rellich(&c, &[1.0, 3.0]).is_err());
    }

    #[test]
    fn clark_examples() {
        let g = default_clark_grid();
        let r = check_clark(&CoefficientSet::free(), &g).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!(r.evidence("exponent_plus").unwrap().abs() < 1e-12);
        let r = check_clark(&p_expr("1 + x^2"), &g).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        let e = r.evidence("exponent_minus").unwrap();
        assert!((1.9..=2.05).contains(&e), "{e}");
        let r = check_clark(&p_expr("exp(abs(x))"), &g).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.evidence("local_exponent_plus_512").unwrap() > r.evidence("local_exponent_plus_8").unwrap());
        assert!(check_clark(&CoefficientSet::free(), &g[..5]).is_err());
    }

    #[test]
    fn theorem_b_examples() {
        let c = CoefficientSet::free().with_growth(GrowthClass::Power(0.0), GrowthClass::Power(0.0));
        assert_eq!(check_theorem_b(&c).unwrap().verdict, Verdict::Satisfied);
        let c = CoefficientSet::free()
            .with_p(PiecewiseFn::parse(&[0.0], &["1", "2"]).unwrap())
            .with_growth(GrowthClass::Power(0.0), GrowthClass::Power(0.0));
        assert_eq!(check_theorem_b(&c).unwrap().verdict, Verdict::Violated);
        let c = p_expr("(1 + x^2)^2").with_growth(GrowthClass::Power(4.0), GrowthClass::Power(4.0));
        let r = check_theorem_b(&c).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.evidence("local_verdict_code"), Some(1.0));
        // continuous breakpoint is fine
        let c = CoefficientSet::free()
            .with_p(PiecewiseFn::parse(&[0.0], &["1 - x", "1 + x"]).unwrap())
            .with_growth(GrowthClass::Power(1.0), GrowthClass::Power(1.0));
        assert_eq!(check_theorem_b(&c).unwrap().verdict, Verdict::Satisfied);
    }

    #[test]
    fn theorem_c_examples() {
        let seq = IntervalSequence::new((-10..=10).map(|n| (n, n as f64, n as f64 + 1.0)).collect()).unwrap();
        let r = check_theorem_c(&CoefficientSet::free(), &seq).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert_eq!(r.evidence("C_star"), Some(1.0));

        let entries = (-8..=8_i64)
            .filter(|&n| n != 0)
            .map(|n| {
                let n_f = n as f64;
                if n > 0 {
                    (n, n_f, 2.0 * n_f)
                } else {
                    (n, 2.0 * n_f, n_f)
                }
            })
            .collect();
        let seq = IntervalSequence::new(entries).unwrap();
        let r = check_theorem_c(&p_expr("1 + x^2"), &seq).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        let cs = r.evidence("C_star").unwrap();
        assert!((cs - 5.0).abs() < 1e-12, "{cs}");

        let r = check_theorem_c(
            &p_expr("x - 3.5"),
            &IntervalSequence::new(vec![(-1, -2.0, -1.0), (1, 3.0, 4.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn interval_sequence_validation() {
        assert!(IntervalSequence::new(vec![(1, 0.0, 1.0)]).is_err());
        assert!(IntervalSequence::new(vec![(-1, 0.0, 1.0), (1, 2.0, 1.0)]).is_err());
        assert!(IntervalSequence::new(vec![(-2, -1.0, 0.0), (-1, -3.0, -2.0), (1, 1.0, 2.0), (2, 2.0, 3.0)]).is_err());
        let s = IntervalSequence::parse_csv("n,a,b\n-1,-2,-1\n0,-0.5,0.5\n1,1,2\n").unwrap();
        assert_eq!(s.entries().len(), 3);
        assert!(IntervalSequence::parse_csv("n,a,b\n-1,-2,x\n").is_err());
    }

    #[test]
    fn kernel_probe_examples() {
        let tol = Tolerances::default();
        let w = default_kernel_windows();
        let c = CoefficientSet::free().with_s(PiecewiseFn::constant(1.0));
        let r = kernel_probe::<f64>(&c, 0.0, &w, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!(r.evidence("min_ratio_w4").unwrap() >= 0.5);
        let r = kernel_probe::<f64>(&CoefficientSet::free(), -1.0, &w, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        let r = kernel_probe::<f64>(&c, 0.0, &w[..1], &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
