//! Three-valued verdicts with numeric evidence, plus the shared number format.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any violation wins, then any inconclusive part.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Satisfied,
        }
    }

    pub fn all(it: impl IntoIterator<Item = Verdict>) -> Verdict {
        it.into_iter().fold(Verdict::Satisfied, Verdict::and)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub criterion: String,
    pub verdict: Verdict,
    pub evidence: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

pub const REPORT_CSV_HEADER: &str = "criterion,verdict,label,value";

impl ConditionReport {
    pub fn new(criterion: impl Into<String>) -> Self {
        ConditionReport {
            criterion: criterion.into(),
            verdict: Verdict::Inconclusive,
            evidence: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, value: f64) {
        self.evidence.push((label.into(), value));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn evidence(&self, label: &str) -> Option<f64> {
        self.evidence.iter().find(|(l, _)| l == label).map(|&(_, v)| v)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("criterion: {}\nverdict: {}\n", self.criterion, self.verdict);
        for (label, value) in &self.evidence {
            out.push_str(&format!("  {label} = {}\n", format_real(*value)));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }

    /// CSV rows without header; a report with no evidence still emits one row.
    pub fn to_csv_rows(&self) -> String {
        if self.evidence.is_empty() {
            return format!("{},{},,\n", self.criterion, self.verdict);
        }
        self.evidence
            .iter()
            .map(|(label, value)| format!("{},{},{},{}\n", self.criterion, self.verdict, label, format_real(*value)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        format!("{REPORT_CSV_HEADER}\n{}", self.to_csv_rows())
    }
}

/// Twelve significant digits, `%g` style: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
