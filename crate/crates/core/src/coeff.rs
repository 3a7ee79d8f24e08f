//! Coefficient data `(p, Q, s, r)`, with `Q = Q_ac + Q_jump` so that the
//! potential `q = Q' + s` may carry point masses, and the problem-file format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{integrate_split, QuadConfig};
use crate::report::{ConditionReport, Verdict};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!("[{lo}, {hi}] is not a finite nonempty interval")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `n + 1` equally spaced points including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        (0..=n).map(move |i| self.lo + self.len() * i as f64 / n as f64)
    }
}

fn check_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NotIncreasing { what: what.to_string() });
    }
    Ok(())
}

/// A function given by one expression per open interval between breakpoints.
/// At a breakpoint the right-hand segment governs.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    breakpoints: Vec<f64>,
    segments: Vec<Expr>,
}

impl PiecewiseFn {
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Expr>) -> Result<Self> {
        check_increasing(&breakpoints, "breakpoints")?;
        if segments.len() != breakpoints.len() + 1 {
            return Err(Error::Invalid(format!(
                "{} breakpoints need {} segments, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                segments.len()
            )));
        }
        Ok(PiecewiseFn { breakpoints, segments })
    }

    pub fn single(expr: Expr) -> Self {
        PiecewiseFn {
            breakpoints: Vec::new(),
            segments: vec![expr],
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::single(Expr::Num(v))
    }

    /// Convenience: parse every segment expression.
    pub fn parse(breakpoints: &[f64], segments: &[&str]) -> Result<Self> {
        let segs = segments.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(breakpoints.to_vec(), segs)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Expr] {
        &self.segments
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(Expr::is_zero)
    }

    pub fn segment_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn eval<T: Real>(&self, x: T) -> Result<T> {
        self.eval_segment(self.segment_index(x.f64()), x)
    }

    /// Evaluates the segment governing `anchor` at `x`; used for one-sided
    /// values at breakpoints.
    pub fn eval_anchored<T: Real>(&self, x: T, anchor: f64) -> Result<T> {
        self.eval_segment(self.segment_index(anchor), x)
    }

    /// Left limit convention: at a breakpoint the left-hand segment governs.
    pub fn eval_left<T: Real>(&self, x: T) -> Result<T> {
        let xf = x.f64();
        self.eval_segment(self.breakpoints.partition_point(|&b| b < xf), x)
    }

    pub fn eval_segment<T: Real>(&self, segment: usize, x: T) -> Result<T> {
        self.segments[segment].eval(x).map_err(|e| Error::Eval {
            segment,
            x: x.f64(),
            reason: e.to_string(),
        })
    }
}

/// Pure-jump function; left-continuous, so the value at `x` sums the heights
/// located strictly below `x`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepFn {
    jumps: Vec<(f64, f64)>,
}

impl StepFn {
    pub fn new(jumps: Vec<(f64, f64)>) -> Result<Self> {
        let locs: Vec<f64> = jumps.iter().map(|j| j.0).collect();
        check_increasing(&locs, "jump locations")?;
        if jumps.iter().any(|j| !j.1.is_finite()) {
            return Err(Error::Invalid("jump heights must be finite".into()));
        }
        Ok(StepFn { jumps })
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.0)
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        let x = x.f64();
        self.jumps
            .iter()
            .take_while(|j| j.0 < x)
            .fold(T::zero(), |acc, j| acc + T::c(j.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn keyword(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

/// Declared asymptotic class of `p` toward one end of the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthClass {
    Power(f64),
    Exponential(f64),
    Bounded,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthTag {
    pub side: Side,
    pub class: GrowthClass,
}

impl GrowthTag {
    pub fn new(side: Side, class: GrowthClass) -> Result<Self> {
        match class {
            GrowthClass::Power(v) | GrowthClass::Exponential(v) if !v.is_finite() => {
                Err(Error::Invalid("growth exponent/rate must be finite".into()))
            }
            _ => Ok(GrowthTag { side, class }),
        }
    }
}

/// Pointwise coefficient values, `q` standing for the full `Q = Q_ac + Q_jump`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffValues<T> {
    pub p: T,
    pub q: T,
    pub s: T,
    pub r: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub p: PiecewiseFn,
    pub q_ac: PiecewiseFn,
    pub q_jump: StepFn,
    pub s: PiecewiseFn,
    pub r: PiecewiseFn,
    /// `[toward +∞, toward −∞]`
    pub p_growth: [GrowthTag; 2],
}

impl Default for CoefficientSet {
    fn default() -> Self {
        Self::free()
    }
}

impl CoefficientSet {
    /// `p ≡ 1` and every other coefficient zero.
    pub fn free() -> Self {
        CoefficientSet {
            p: PiecewiseFn::constant(1.0),
            q_ac: PiecewiseFn::constant(0.0),
            q_jump: StepFn::default(),
            s: PiecewiseFn::constant(0.0),
            r: PiecewiseFn::constant(0.0),
            p_growth: [
                GrowthTag {
                    side: Side::Plus,
                    class: GrowthClass::Unspecified,
                },
                GrowthTag {
                    side: Side::Minus,
                    class: GrowthClass::Unspecified,
                },
            ],
        }
    }

    pub fn with_p(mut self, p: PiecewiseFn) -> Self {
        self.p = p;
        self
    }

    pub fn with_q_ac(mut self, q: PiecewiseFn) -> Self {
        self.q_ac = q;
        self
    }

    pub fn with_q_jump(mut self, q: StepFn) -> Self {
        self.q_jump = q;
        self
    }

    pub fn with_s(mut self, s: PiecewiseFn) -> Self {
        self.s = s;
        self
    }

    pub fn with_r(mut self, r: PiecewiseFn) -> Self {
        self.r = r;
        self
    }

    pub fn with_growth(mut self, plus: GrowthClass, minus: GrowthClass) -> Self {
        self.p_growth = [
            GrowthTag {
                side: Side::Plus,
                class: plus,
            },
            GrowthTag {
                side: Side::Minus,
                class: minus,
            },
        ];
        self
    }

    pub fn growth(&self, side: Side) -> GrowthClass {
        match side {
            Side::Plus => self.p_growth[0].class,
            Side::Minus => self.p_growth[1].class,
        }
    }

    /// Sorted union of every breakpoint and jump location.
    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = [&self.p, &self.q_ac, &self.s, &self.r]
            .iter()
            .flat_map(|f| f.breakpoints().iter().copied())
            .chain(self.q_jump.locations())
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn breaks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.breaks().into_iter().filter(|&b| b > lo && b < hi).collect()
    }

    pub fn has_r(&self) -> bool {
        !self.r.is_zero()
    }

    pub fn q<T: Real>(&self, x: T) -> Result<T> {
        Ok(self.q_ac.eval(x)? + self.q_jump.eval(x))
    }

    pub fn values<T: Real>(&self, x: T) -> Result<CoeffValues<T>> {
        Ok(CoeffValues {
            p: self.p.eval(x)?,
            q: self.q(x)?,
            s: self.s.eval(x)?,
            r: self.r.eval(x)?,
        })
    }

    /// Values at `x` with segments and jumps resolved as for the point
    /// `anchor`; `x` and `anchor` must not be separated by a break.
    pub fn values_anchored<T: Real>(&self, x: T, anchor: f64) -> Result<CoeffValues<T>> {
        Ok(CoeffValues {
            p: self.p.eval_anchored(x, anchor)?,
            q: self.q_ac.eval_anchored(x, anchor)? + self.q_jump.eval(T::c(anchor)),
            s: self.s.eval_anchored(x, anchor)?,
            r: self.r.eval_anchored(x, anchor)?,
        })
    }
}

/// Coefficients plus the working interval declared by a problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub coeffs: CoefficientSet,
    pub domain: Interval,
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Problem::parse(&text)
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let ok = !tok.is_empty()
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && tok.chars().any(|c| c.is_ascii_digit());
    match tok.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(Error::ProblemFile {
            line,
            message: format!("malformed number `{tok}`"),
        }),
    }
}

fn parse_piecewise(rest: &str, line: usize) -> Result<PiecewiseFn> {
    let at_line = |e: Error| match e {
        Error::ProblemFile { .. } => e,
        other => Error::ProblemFile {
            line,
            message: other.to_string(),
        },
    };
    let rest = rest.trim();
    let (bps, exprs) = match rest.strip_prefix("piecewise") {
        Some(body) => {
            let (bps, exprs) = body.split_once('|').ok_or_else(|| Error::ProblemFile {
                line,
                message: "expected `|` after breakpoints".into(),
            })?;
            let bps = bps
                .split_whitespace()
                .map(|t| parse_real(t, line))
                .collect::<Result<Vec<_>>>()?;
            (bps, exprs)
        }
        None => (Vec::new(), rest),
    };
    let segs = exprs
        .split(';')
        .map(|s| {
            Expr::parse(s.trim()).map_err(|e| Error::ProblemFile {
                line,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseFn::new(bps, segs).map_err(at_line)
}

fn parse_growth(rest: &str, line: usize) -> Result<GrowthTag> {
    let toks: Vec<&str> = rest.split_whitespace().collect();
    let bad = || Error::ProblemFile {
        line,
        message: format!("malformed growth tag `{}`", rest.trim()),
    };
    let side = match toks.first() {
        Some(&"plus") => Side::Plus,
        Some(&"minus") => Side::Minus,
        _ => return Err(bad()),
    };
    let class = match &toks[1..] {
        ["power", e] => GrowthClass::Power(parse_real(e, line)?),
        ["exponential", r] => GrowthClass::Exponential(parse_real(r, line)?),
        ["bounded"] => GrowthClass::Bounded,
        ["unspecified"] => GrowthClass::Unspecified,
        _ => return Err(bad()),
    };
    Ok(GrowthTag { side, class })
}

fn parse_jumps(rest: &str, line: usize) -> Result<StepFn> {
    let mut jumps = Vec::new();
    for part in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let toks: Vec<&str> = part.split_whitespace().collect();
        let [x, h] = toks[..] else {
            return Err(Error::ProblemFile {
                line,
                message: format!("jump `{part}` needs a location and a height"),
            });
        };
        jumps.push((parse_real(x, line)?, parse_real(h, line)?));
    }
    StepFn::new(jumps).map_err(|e| Error::ProblemFile {
        line,
        message: e.to_string(),
    })
}

impl Problem {
    pub fn parse(text: &str) -> Result<Problem> {
        let mut coeffs = CoefficientSet::free();
        let mut domain = None;
        let mut have_p = false;
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let unique_key = if key == "p.growth" {
                format!("{key} {}", rest.split_whitespace().next().unwrap_or(""))
            } else {
                key.to_string()
            };
            if seen.contains(&unique_key) {
                return Err(Error::ProblemFile {
                    line,
                    message: format!("duplicate `{unique_key}`"),
                });
            }
            seen.push(unique_key);
            match key {
                "domain" => {
                    let toks: Vec<&str> = rest.split_whitespace().collect();
                    let [a, b] = toks[..] else {
                        return Err(Error::ProblemFile {
                            line,
                            message: "domain needs two reals".into(),
                        });
                    };
                    let iv = Interval::new(parse_real(a, line)?, parse_real(b, line)?).map_err(|e| Error::ProblemFile {
                        line,
                        message: e.to_string(),
                    })?;
                    domain = Some(iv);
                }
                "p" => {
                    coeffs.p = parse_piecewise(rest, line)?;
                    have_p = true;
                }
                "p.growth" => {
                    let tag = parse_growth(rest, line)?;
                    match tag.side {
                        Side::Plus => coeffs.p_growth[0] = tag,
                        Side::Minus => coeffs.p_growth[1] = tag,
                    }
                }
                "Q.ac" => coeffs.q_ac = parse_piecewise(rest, line)?,
                "Q.jump" => coeffs.q_jump = parse_jumps(rest, line)?,
                "s" => coeffs.s = parse_piecewise(rest, line)?,
                "r" => coeffs.r = parse_piecewise(rest, line)?,
                other => {
                    return Err(Error::ProblemFile {
                        line,
                        message: format!("unknown key `{other}`"),
                    });
                }
            }
        }
        let last = text.lines().count().max(1);
        if !have_p {
            return Err(Error::ProblemFile {
                line: last,
                message: "missing `p`".into(),
            });
        }
        let domain = domain.ok_or(Error::ProblemFile {
            line: last,
            message: "missing `domain`".into(),
        })?;
        Ok(Problem { coeffs, domain })
    }

    /// Re-emits the problem-file format; reals use shortest round-trip form.
    pub fn to_text(&self) -> String {
        let c = &self.coeffs;
        let mut out = String::new();
        let _ = writeln!(out, "domain {:?} {:?}", self.domain.lo, self.domain.hi);
        let mut piecewise = |name: &str, f: &PiecewiseFn| {
            let bps: Vec<String> = f.breakpoints().iter().map(|b| format!("{b:?}")).collect();
            let segs: Vec<String> = f.segments().iter().map(Expr::to_string).collect();
            let sep = if bps.is_empty() { "" } else { " " };
            let _ = writeln!(out, "{name} piecewise {}{sep}| {}", bps.join(" "), segs.join(" ; "));
        };
        piecewise("p", &c.p);
        piecewise("Q.ac", &c.q_ac);
        piecewise("s", &c.s);
        piecewise("r", &c.r);
        if !c.q_jump.is_empty() {
            let jumps: Vec<String> = c.q_jump.jumps().iter().map(|(x, h)| format!("{x:?} {h:?}")).collect();
            let _ = writeln!(out, "Q.jump {}", jumps.join(" ; "));
        }
        for tag in &c.p_growth {
            let class = match tag.class {
                GrowthClass::Power(e) => format!("power {e:?}"),
                GrowthClass::Exponential(r) => format!("exponential {r:?}"),
                GrowthClass::Bounded => "bounded".into(),
                GrowthClass::Unspecified => "unspecified".into(),
            };
            let _ = writeln!(out, "p.growth {} {class}", tag.side.keyword());
        }
        out
    }
}

/// Above this a partial integral counts as divergent.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;
/// Growth factor across the last three window halvings flagging divergence.
pub const DIVERGENCE_GROWTH: f64 = 1.5;

enum Integrability {
    Finite(f64),
    Divergent(Vec<f64>),
    Unresolved(Vec<f64>),
}

/// Integrates `f` over `window`; on failure near an interior point `x*`,
/// integrates over `window` minus `(x* − ε, x* + ε)` for halving `ε` and
/// judges the partial sums.
fn probe_integral<F>(f: F, window: Interval, breaks: &[f64]) -> Result<Integrability>
where
    F: Fn(f64) -> Result<f64>,
{
    let cfg = QuadConfig {
        abs: 1e-12,
        rel: 1e-10,
        max_intervals: 400,
    };
    let singular_at = match integrate_split(&f, window.lo, window.hi, breaks, &cfg) {
        Ok(r) if r.converged && r.value.abs() < OVERFLOW_THRESHOLD => return Ok(Integrability::Finite(r.value)),
        Ok(r) if r.value.abs() >= OVERFLOW_THRESHOLD => return Ok(Integrability::Divergent(vec![r.value])),
        Ok(r) => {
            let (a, b) = r.worst;
            if a <= window.lo {
                window.lo
            } else if b >= window.hi {
                window.hi
            } else {
                0.5 * (a + b)
            }
        }
        Err(Error::NonFinite { x }) => x,
        Err(e) => return Err(e),
    };
    let mut partials = Vec::new();
    for k in 3..=22 {
        let eps = window.len() * 0.5f64.powi(k);
        let mut sum = 0.0;
        for (lo, hi) in [(window.lo, singular_at - eps), (singular_at + eps, window.hi)] {
            if hi > lo {
                let r = integrate_split(&f, lo, hi, breaks, &cfg)?;
                sum += r.value;
            }
        }
        partials.push(sum);
        if sum.abs() >= OVERFLOW_THRESHOLD {
            return Ok(Integrability::Divergent(partials));
        }
    }
    let n = partials.len();
    let grew = partials[n - 4].abs() > 0.0 && (partials[n - 1] / partials[n - 4]).abs() >= DIVERGENCE_GROWTH;
    Ok(if grew {
        Integrability::Divergent(partials)
    } else {
        Integrability::Unresolved(partials)
    })
}

/// Checks the local integrability assumptions on `window`:
/// `1/p`, `Q²/|p|`, `r²/|p|` and `|s|` integrable there, and `1/p ≠ 0`
/// at sample points.
pub fn validate_local_integrability(c: &CoefficientSet, window: Interval) -> Result<ConditionReport> {
    let mut report = ConditionReport::new("local_integrability");
    let breaks = c.breaks_in(window.lo, window.hi);
    type Integrand = fn(&CoeffValues<f64>) -> f64;
    let quantities: [(&str, Integrand); 4] = [
        ("int_inv_abs_p", |v| 1.0 / v.p.abs()),
        ("int_Q2_over_abs_p", |v| v.q * v.q / v.p.abs()),
        ("int_r2_over_abs_p", |v| v.r * v.r / v.p.abs()),
        ("int_abs_s", |v| v.s.abs()),
    ];
    let mut verdicts = Vec::new();
    for (label, g) in quantities {
        let outcome = probe_integral(|x| c.values(x).map(|v| g(&v)), window, &breaks)?;
        let v = match outcome {
            Integrability::Finite(value) => {
                report.push(label, value);
                Verdict::Satisfied
            }
            Integrability::Divergent(partials) => {
                report.push(label, f64::INFINITY);
                for (k, s) in partials.iter().enumerate() {
                    report.push(format!("{label}_partial_{k}"), *s);
                }
                report.note(format!("{label}: partial integrals diverge"));
                Verdict::Violated
            }
            Integrability::Unresolved(partials) => {
                report.push(label, f64::NAN);
                for (k, s) in partials.iter().enumerate() {
                    report.push(format!("{label}_partial_{k}"), *s);
                }
                report.note(format!("{label}: quadrature did not converge near an interior singularity"));
                Verdict::Inconclusive
            }
        };
        verdicts.push(v);
    }

    // sign and finiteness of p at sample points, both sides of every break
    let mut samples: Vec<f64> = Vec::new();
    for x in window.grid(1000) {
        samples.push(c.p.eval(x)?);
    }
    for &b in &breaks {
        samples.push(c.p.eval_left(b)?);
        samples.push(c.p.eval(b)?);
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let zeros = samples.iter().filter(|&&p| p == 0.0).count();
    report.push("p_sample_min", min);
    report.push("p_sample_max", max);
    report.push("p_zero_samples", zeros as f64);
    report.push("p_sign_changes", if min < 0.0 && max > 0.0 { 1.0 } else { 0.0 });
    report.note("1/p != 0 checked at sample points only; the a.e. statement is assumed between them");
    report.verdict = Verdict::all(verdicts);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_examples() {
        let one = PiecewiseFn::constant(1.0);
        assert_eq!(one.eval(7.3).unwrap(), 1.0);
        let f = PiecewiseFn::parse(&[0.0], &["1", "1+x^2"]).unwrap();
        assert_eq!(f.eval(2.0).unwrap(), 5.0);
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_eq!(f.eval(-3.0).unwrap(), 1.0);
        assert_eq!(f.eval_anchored(0.0, -0.1).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_validation() {
        assert!(matches!(
            PiecewiseFn::parse(&[1.0, 0.0], &["1", "2", "3"]),
            Err(Error::NotIncreasing { .. })
        ));
        assert!(PiecewiseFn::parse(&[0.0], &["1"]).is_err());
        let f = PiecewiseFn::parse(&[0.0], &["log(x)", "1"]).unwrap();
        assert!(matches!(f.eval(-1.0), Err(Error::Eval { segment: 0, .. })));
    }

    #[test]
    fn step_is_left_continuous() {
        let q = StepFn::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(q.eval(0.0), 0.0);
        assert_eq!(q.eval(0.5), 1.0);
        assert_eq!(q.eval(1.0), 1.0);
        assert_eq!(q.eval(1.0 + 1e-12), 3.0);
        assert!(StepFn::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn problem_file_examples() {
        let p = Problem::parse("# delta\ndomain 0 1\np 1\nQ.jump 0.5 10.0\n").unwrap();
        assert_eq!(p.domain, Interval { lo: 0.0, hi: 1.0 });
        assert_eq!(p.coeffs.q_jump.jumps(), &[(0.5, 10.0)]);
        assert_eq!(p.coeffs.q(0.75).unwrap(), 10.0);
        assert!(p.coeffs.s.is_zero() && p.coeffs.r.is_zero() && p.coeffs.q_ac.is_zero());

        let p = Problem::parse("domain -1 1\np piecewise | 1+x^2\np.growth plus power 2\np.growth minus power 2\n").unwrap();
        assert_eq!(p.coeffs.growth(Side::Plus), GrowthClass::Power(2.0));
        assert_eq!(p.coeffs.growth(Side::Minus), GrowthClass::Power(2.0));

        let err = Problem::parse("domain 0 1\np piecewise 1 0 | 1 ; 2 ; 3\n").unwrap_err();
        assert!(matches!(err, Error::ProblemFile { line: 2, .. }), "{err:?}");
        let err = Problem::parse("domain 0 1\np 1\nQ.jump 0.5 1 ; 0.2 1\n").unwrap_err();
        assert!(matches!(err, Error::ProblemFile { line: 3, .. }));
    }

    #[test]
    fn problem_file_errors() {
        assert!(matches!(Problem::parse("domain 0 1\n"), Err(Error::ProblemFile { .. })));
        assert!(matches!(Problem::parse("p 1\n"), Err(Error::ProblemFile { .. })));
        assert!(matches!(
            Problem::parse("domain 0 x\np 1"),
            Err(Error::ProblemFile { line: 1, .. })
        ));
        assert!(matches!(
            Problem::parse("domain 0 1\np 1 +\n"),
            Err(Error::ProblemFile { line: 2, .. })
        ));
        assert!(matches!(
            Problem::parse("domain 0 1\np 1\nzz 3"),
            Err(Error::ProblemFile { line: 3, .. })
        ));
        assert!(matches!(
            Problem::parse("domain 0 1\np 1\np 2"),
            Err(Error::ProblemFile { line: 3, .. })
        ));
        assert!(matches!(
            Problem::parse("domain 0 inf\np 1"),
            Err(Error::ProblemFile { line: 1, .. })
        ));
        assert!(matches!(
            Problem::parse("domain 0 1\np 1\np.growth up power 2"),
            Err(Error::ProblemFile { .. })
        ));
    }

    #[test]
    fn serialize_roundtrip() {
        let src = "domain -2 3.5\np piecewise -1 0.25 | 1 ; 2+sin(x) ; exp(-x^2)+1\n\
                   p.growth plus exponential 1.0\np.growth minus bounded\nQ.ac x/3\nQ.jump 0 1.5 ; 1e-3 -2\ns -1\nr 0.5*x\n";
        let p = Problem::parse(src).unwrap();
        let text = p.to_text();
        let q = Problem::parse(&text).unwrap();
        assert_eq!(q.to_text(), text);
        assert_eq!(p.coeffs.p_growth, q.coeffs.p_growth);
        for x in p.domain.grid(97) {
            assert_eq!(p.coeffs.values(x).unwrap(), q.coeffs.values(x).unwrap());
        }
    }

    #[test]
    fn integrability_free_case() {
        let r = validate_local_integrability(&CoefficientSet::free(), Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert!((r.evidence("int_inv_abs_p").unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.evidence("int_Q2_over_abs_p").unwrap(), 0.0);
        assert_eq!(r.evidence("int_abs_s").unwrap(), 0.0);
        assert_eq!(r.evidence("p_zero_samples").unwrap(), 0.0);
    }

    #[test]
    fn integrability_unit_step_q() {
        let c = CoefficientSet::free().with_q_jump(StepFn::new(vec![(0.0, 1.0)]).unwrap());
        let r = validate_local_integrability(&c, Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        // closed form: ∫_0^1 1 dx
        assert!((r.evidence("int_Q2_over_abs_p").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrability_abs_p_diverges() {
        let c = CoefficientSet::free().with_p(PiecewiseFn::parse(&[], &["abs(x)"]).unwrap());
        let w = Interval::new(-1.0, 1.0).unwrap();
        let r = validate_local_integrability(&c, w).unwrap();
        assert_ne!(r.verdict, Verdict::Satisfied);
        // nested-window oracle: ∫_{ε<|x|<1} |x|^{-1} dx = 2 ln(1/ε) grows without bound
        let partials: Vec<f64> = (0..20)
            .filter_map(|k| r.evidence(&format!("int_inv_abs_p_partial_{k}")))
            .collect();
        assert!(partials.len() >= 10);
        for (k, s) in partials.iter().enumerate() {
            let eps = 2.0 * 0.5f64.powi(k as i32 + 3);
            assert!((s - 2.0 * (1.0 / eps).ln()).abs() < 1e-6, "k={k}: {s}");
        }
        assert!(partials.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(r.evidence("p_zero_samples").unwrap(), 1.0);
    }

    #[test]
    fn integrability_explicit_divergence() {
        let c = CoefficientSet::free().with_p(PiecewiseFn::parse(&[], &["x^2"]).unwrap());
        let r = validate_local_integrability(&c, Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }
}
