use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use slq_core::bracket::{bracket_table, lagrange_residual, BRACKET_CSV_HEADER};
use slq_core::coeff::{load_problem, validate_local_integrability};
use slq_core::integrator::{fundamental_pair, solve_system};
use slq_core::quadform::{form_value, norm_squared, TestFunction, FORM_CSV_HEADER};
use slq_core::report::{format_real, ConditionReport};
use slq_core::sacheck::{
    check_clark, check_hartman_rellich, check_theorem_b, check_theorem_c, default_clark_grid, default_hr_windows,
    default_kernel_windows, kernel_probe, probe_lambda, rho_transform, IntervalSequence,
};
use slq_core::spectral::{eigenvalues_on_interval, Scan};
use slq_core::{Error, Interval, Problem, QuasiState, Result, Tolerances};

/// Quasi-derivative Sturm–Liouville toolkit.
///
/// Eigenvalues are those of the Dirichlet problem u(a) = u(b) = 0; the
/// quasi-derivative is left free at both ends.
#[derive(Parser, Debug)]
#[command(name = "slq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file
    #[arg(long, value_name = "PATH")]
    problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, value_name = "X", default_value_t = 1e-10)]
    tol_rel: f64,
    #[arg(long, value_name = "X", default_value_t = 1e-12)]
    tol_abs: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Criterion {
    Hr,
    Clark,
    #[value(name = "thmB")]
    ThmB,
    #[value(name = "thmC")]
    ThmC,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check local integrability of 1/p, Q²/p, r²/p and s on the domain
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate (u, u^[1]) across a span
    Solve {
        #[command(flatten)]
        common: Common,
        /// Start and end of the integration; the start carries the initial data
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        span: Option<Vec<f64>>,
        #[arg(long, value_name = "X", default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Initial u and u^[1]
        #[arg(long, num_args = 2, value_names = ["U", "U1"], allow_negative_numbers = true)]
        init: Option<Vec<f64>>,
    },
    /// Dirichlet eigenvalues on a finite span
    Eig {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        span: Option<Vec<f64>>,
        #[arg(long, value_name = "N", default_value_t = 1)]
        count: usize,
        /// Lowest and highest λ scanned and the scan step
        #[arg(long, num_args = 3, value_names = ["MIN", "MAX", "STEP"], allow_negative_numbers = true)]
        scan: Option<Vec<f64>>,
    },
    /// Lagrange bracket of the fundamental pair and the Lagrange-identity residual
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        span: Option<Vec<f64>>,
        #[arg(long, value_name = "X", default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Number of subintervals at which the bracket is tabulated
        #[arg(long, value_name = "N", default_value_t = 10)]
        points: usize,
    },
    /// Quadratic form and Rayleigh quotients of the first sine modes on a span
    Form {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        span: Option<Vec<f64>>,
        #[arg(long, value_name = "N", default_value_t = 5)]
        count: usize,
    },
    /// Audit a self-adjointness condition
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// CSV `n,a,b` of intervals, required for thmC
        #[arg(long, value_name = "PATH")]
        intervals: Option<PathBuf>,
    },
    /// Search for solutions of l[v] = λ v square-integrable on both sides
    Probe {
        #[command(flatten)]
        common: Common,
        /// Defaults to the smallest sine-mode Rayleigh quotient on [-16, 16] minus one
        #[arg(long, value_name = "X", allow_negative_numbers = true)]
        lambda: Option<f64>,
    },
    /// ρ(x) = ∫_0^x p^{-1/2}
    Rho {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        span: Option<Vec<f64>>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Validate { common }
            | Command::Solve { common, .. }
            | Command::Eig { common, .. }
            | Command::Bracket { common, .. }
            | Command::Form { common, .. }
            | Command::Check { common, .. }
            | Command::Probe { common, .. }
            | Command::Rho { common, .. } => common,
        }
    }
}

fn span_of(span: &Option<Vec<f64>>, problem: &Problem) -> Result<(f64, f64)> {
    match span.as_deref() {
        Some(&[a, b]) => {
            if !(a.is_finite() && b.is_finite()) || a == b {
                return Err(Error::Invalid(format!("span [{a}, {b}] must be finite and nondegenerate")));
            }
            Ok((a, b))
        }
        _ => Ok((problem.domain.lo, problem.domain.hi)),
    }
}

fn interval_of(span: &Option<Vec<f64>>, problem: &Problem) -> Result<Interval> {
    let (a, b) = span_of(span, problem)?;
    Interval::new(a.min(b), a.max(b))
}

fn report_out(r: &ConditionReport, format: Format) -> String {
    match format {
        Format::Text => r.to_text(),
        Format::Csv => r.to_csv(),
    }
}

fn run(cmd: &Command) -> Result<String> {
    let common = cmd.common();
    let problem = load_problem(&common.problem)?;
    let c = &problem.coeffs;
    let tol = Tolerances::new(common.tol_rel, common.tol_abs)?;
    let format = common.format;
    let out = match cmd {
        Command::Validate { .. } => report_out(&validate_local_integrability(c, problem.domain)?, format),
        Command::Solve { span, lambda, init, .. } => {
            let (a, b) = span_of(span, &problem)?;
            let (u, u1) = match init.as_deref() {
                Some(&[u, u1]) => (u, u1),
                _ => (0.0, 1.0),
            };
            let t = solve_system::<f64>(c, *lambda, (a, b), QuasiState::real(a, u, u1), None, &tol)?;
            match format {
                Format::Csv => t.to_csv(),
                Format::Text => {
                    let last = t.last();
                    format!(
                        "lambda: {}\nsteps: {}\nx: {}\nu: {} {}\nu1: {} {}\n",
                        format_real(*lambda),
                        t.step_count(),
                        format_real(last.x),
                        format_real(last.u.re),
                        format_real(last.u.im),
                        format_real(last.u1.re),
                        format_real(last.u1.im)
                    )
                }
            }
        }
        Command::Eig { span, count, scan, .. } => {
            let iv = interval_of(span, &problem)?;
            let scan = match scan.as_deref() {
                Some(&[lo, hi, step]) => Some(Scan::new(lo, hi, step)?),
                _ => None,
            };
            let r = eigenvalues_on_interval::<f64>(c, iv, *count, scan, &tol)?;
            match format {
                Format::Csv => r.to_csv(),
                Format::Text => {
                    let mut s = String::new();
                    if r.experimental {
                        s.push_str("note: r != 0, values are minima of |u(b; lambda)| (experimental)\n");
                    }
                    for i in 0..r.len() {
                        s.push_str(&format!(
                            "{} {} residual {} bracket [{}, {}]\n",
                            r.indices[i],
                            format_real(r.values[i]),
                            format_real(r.residuals[i]),
                            format_real(r.brackets[i].0),
                            format_real(r.brackets[i].1)
                        ));
                    }
                    s
                }
            }
        }
        Command::Bracket {
            span, lambda, points, ..
        } => {
            let iv = interval_of(span, &problem)?;
            let (th, ph) = fundamental_pair::<f64>(c, *lambda, iv, &tol)?;
            let table = bracket_table(&th, &ph, iv.lo, iv.hi, *points)?;
            let residual = lagrange_residual(c, &th, None, &ph, None, iv.lo, iv.hi)?;
            match format {
                Format::Csv => {
                    let mut s = format!("{BRACKET_CSV_HEADER}\n");
                    for b in &table {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            format_real(b.t),
                            format_real(b.value.re),
                            format_real(b.value.im)
                        ));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("lagrange residual: {}\n", format_real(residual));
                    for b in &table {
                        s.push_str(&format!(
                            "[theta, phi]({}) = {} {}\n",
                            format_real(b.t),
                            format_real(b.value.re),
                            format_real(b.value.im)
                        ));
                    }
                    s
                }
            }
        }
        Command::Form { span, count, .. } => {
            let iv = interval_of(span, &problem)?;
            let mut rows = Vec::new();
            for k in 1..=(*count).max(1) {
                let u = TestFunction::sine_mode(k as u32, iv)?;
                let f: f64 = form_value(c, &u)?;
                let n: f64 = norm_squared(&u)?;
                rows.push((k, f, n, f / n));
            }
            let min = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
            match format {
                Format::Csv => {
                    let mut s = format!("{FORM_CSV_HEADER}\n");
                    for (k, f, n, q) in &rows {
                        s.push_str(&format!("{k},{},{},{}\n", format_real(*f), format_real(*n), format_real(*q)));
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for (k, f, n, q) in &rows {
                        s.push_str(&format!(
                            "{k} form {} norm2 {} quotient {}\n",
                            format_real(*f),
                            format_real(*n),
                            format_real(*q)
                        ));
                    }
                    s.push_str(&format!(
                        "min quotient (upper estimate of the form's lower bound): {}\n",
                        format_real(min)
                    ));
                    s
                }
            }
        }
        Command::Check {
            criterion, intervals, ..
        } => {
            let r = match criterion {
                Criterion::Hr => check_hartman_rellich(c, &default_hr_windows())?,
                Criterion::Clark => check_clark(c, &default_clark_grid())?,
                Criterion::ThmB => check_theorem_b(c)?,
                Criterion::ThmC => {
                    let path = intervals
                        .as_ref()
                        .ok_or_else(|| Error::Invalid("--criterion thmC needs --intervals PATH".into()))?;
                    let seq = IntervalSequence::parse_csv(&fs::read_to_string(path)?)?;
                    check_theorem_c(c, &seq)?
                }
            };
            report_out(&r, format)
        }
        Command::Probe { lambda, .. } => {
            let windows = default_kernel_windows();
            let l = match lambda {
                Some(l) => *l,
                None => probe_lambda(c, *windows.last().expect("nonempty"))?,
            };
            report_out(&kernel_probe::<f64>(c, l, &windows, &tol)?, format)
        }
        Command::Rho { span, .. } => {
            let iv = interval_of(span, &problem)?;
            let m = rho_transform::<f64>(c, iv, &tol)?;
            match format {
                Format::Csv => m.to_csv(),
                Format::Text => {
                    let (lo, hi) = m.domain();
                    format!(
                        "nodes: {}\nrho({}) = {}\nrho({}) = {}\n",
                        m.len(),
                        format_real(lo),
                        format_real(m.eval(lo)?),
                        format_real(hi),
                        format_real(m.eval(hi)?)
                    )
                }
            }
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            let mut cmd = Cli::command();
            let name = std::env::args().nth(1).unwrap_or_default();
            let usage = match cmd.find_subcommand_mut(&name) {
                Some(sub) => sub.clone().bin_name(format!("slq {name}")).render_usage(),
                None => cmd.render_usage(),
            };
            eprintln!("\n{usage}");
            return ExitCode::from(2);
        }
    };
    let result = run(&cli.command).and_then(|text| match &cli.command.common().output {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
