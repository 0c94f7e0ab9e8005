//! Command-line front end.
//!
//! Exit codes: 0 when every executed check passed, 1 when a check failed,
//! 2 on argument or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::builders::{builtin, realize, AlgebraPair, BUILTIN_NAMES};
use crate::casas::c_from_recurrence;
use crate::coeffs::{f_bch, g_center, g_left, g_right, gamma_swap, zass_coeff, CoeffValue, Scalar};
use crate::matcore::{infer_uvc, CMatrix};
use crate::verify::{
    self, integrate_gr, run_check, run_suite, scalar_json, CheckReport, CheckResult, SUITE_CHECKS,
};

/// Fit residual above which file-supplied pairs are refused.
pub const MAX_FIT_RESIDUAL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "zassenhaus",
    version,
    about = "Closed-form Zassenhaus/BCH coefficients for [X,Y] = uX + vY + c1 and their matrix verification"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct UvArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long = "u-im", default_value_t = 0.0, allow_hyphen_values = true)]
    pub u_im: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long = "v-im", default_value_t = 0.0, allow_hyphen_values = true)]
    pub v_im: f64,
}

impl UvArgs {
    fn u(&self) -> Scalar {
        Scalar::new(self.u, self.u_im)
    }

    fn v(&self) -> Scalar {
        Scalar::new(self.v, self.v_im)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print g_r, g_c, g_l, f and gamma at (u, v).
    Coeff {
        #[command(flatten)]
        uv: UvArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate C_n from the closed form and from the recurrence.
    CnTable {
        #[command(flatten)]
        uv: UvArgs,
        #[arg(long = "max-n", value_parser = clap::value_parser!(u64).range(2..=170))]
        max_n: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the identity suite on a built-in pair or on matrices from files.
    Verify {
        #[arg(long, conflicts_with_all = ["x", "y"], required_unless_present_all = ["x", "y"])]
        pair: Option<String>,
        #[arg(long, requires = "y")]
        x: Option<PathBuf>,
        #[arg(long, requires = "x")]
        y: Option<PathBuf>,
        #[arg(long, value_parser = positive_f64)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Residual of one check over a (u, v) lattice, written as CSV.
    Sweep {
        #[arg(long, value_parser = SUITE_CHECKS)]
        check: String,
        #[arg(long = "u-min", allow_hyphen_values = true)]
        u_min: f64,
        #[arg(long = "u-max", allow_hyphen_values = true)]
        u_max: f64,
        #[arg(long = "v-min", allow_hyphen_values = true)]
        v_min: f64,
        #[arg(long = "v-max", allow_hyphen_values = true)]
        v_max: f64,
        /// Lattice points per axis.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1000))]
        steps: u64,
        /// Constant imaginary part of every u.
        #[arg(long = "u-im", default_value_t = 0.0, allow_hyphen_values = true)]
        u_im: f64,
        /// Constant imaginary part of every v.
        #[arg(long = "v-im", default_value_t = 0.0, allow_hyphen_values = true)]
        v_im: f64,
        #[arg(long, value_parser = positive_f64, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the quadrature of the integrand with the closed form.
    Integral {
        #[command(flatten)]
        uv: UvArgs,
        #[arg(long, value_parser = positive_f64, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s} is not a positive number"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CliConfig::try_parse_from(args) {
        Ok(config) => run(&config, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            code
        }
    }
}

/// Runs a parsed configuration and returns the exit code.
pub fn run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = match &config.command {
        Command::Coeff { uv, format } => cmd_coeff(uv, *format, out),
        Command::CnTable { uv, max_n, format } => cmd_cn_table(uv, *max_n as usize, *format, out),
        Command::Verify {
            pair,
            x,
            y,
            tol,
            format,
        } => cmd_verify(
            pair.as_deref(),
            x.as_ref().zip(y.as_ref()),
            *tol,
            *format,
            out,
        ),
        Command::Sweep {
            check,
            u_min,
            u_max,
            v_min,
            v_max,
            steps,
            u_im,
            v_im,
            tol,
            out: path,
        } => {
            let lattice = Lattice {
                u: (*u_min, *u_max),
                v: (*v_min, *v_max),
                steps: *steps as usize,
                u_im: *u_im,
                v_im: *v_im,
            };
            cmd_sweep(check, &lattice, *tol, path, out)
        }
        Command::Integral { uv, tol, format } => cmd_integral(uv, *tol, *format, out),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

enum CliError {
    Usage(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<i32, CliError>;

/// Human-readable number with six significant digits, `%g` style.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

pub fn fmt_scalar(z: Scalar) -> String {
    if z.im == 0.0 {
        fmt_real(z.re)
    } else if z.re == 0.0 {
        format!("{}i", fmt_real(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", fmt_real(z.re), fmt_real(z.im.abs()))
    }
}

/// 17 significant digits.
fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

fn coeff_entry(c: &CoeffValue) -> Value {
    json!({
        "value": scalar_json(c.value),
        "method": c.method.as_str(),
        "terms_used": c.terms_used,
    })
}

fn cmd_coeff(uv: &UvArgs, format: Format, out: &mut dyn Write) -> CliResult {
    let (u, v) = (uv.u(), uv.v());
    let rows: Vec<(&str, Result<CoeffValue, String>)> = vec![
        ("g_r", Ok(g_right(u, v))),
        ("g_c", Ok(g_center(u, v))),
        ("g_l", Ok(g_left(u, v))),
        ("f", f_bch(u, v).map_err(|e| e.to_string())),
        ("gamma", Ok(gamma_swap(u, v))),
    ];
    match format {
        Format::Json => {
            let mut coeffs = serde_json::Map::new();
            for (name, value) in &rows {
                let entry = match value {
                    Ok(c) => coeff_entry(c),
                    Err(e) => json!({ "error": e }),
                };
                coeffs.insert((*name).into(), entry);
            }
            let doc = json!({ "u": scalar_json(u), "v": scalar_json(v), "coefficients": coeffs });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["name", "re", "im", "method", "terms_used"])
                .map_err(csv_io)?;
            for (name, value) in &rows {
                match value {
                    Ok(c) => w.write_record([
                        name.to_string(),
                        fmt_exact(c.value.re),
                        fmt_exact(c.value.im),
                        c.method.as_str().into(),
                        c.terms_used.to_string(),
                    ]),
                    Err(_) => w.write_record([
                        name.to_string(),
                        "".into(),
                        "".into(),
                        "pole".into(),
                        "".into(),
                    ]),
                }
                .map_err(csv_io)?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "u = {}, v = {}", fmt_scalar(u), fmt_scalar(v))?;
            for (name, value) in &rows {
                match value {
                    Ok(c) => writeln!(
                        out,
                        "{name:<6} = {:<24} [{}, terms_used = {}]",
                        fmt_scalar(c.value),
                        c.method.as_str(),
                        c.terms_used
                    )?,
                    Err(e) => writeln!(out, "{name:<6} = error: {e}")?,
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn cmd_cn_table(uv: &UvArgs, max_n: usize, format: Format, out: &mut dyn Write) -> CliResult {
    let (u, v) = (uv.u(), uv.v());
    let rows: Vec<(usize, Scalar, Scalar)> = (2..=max_n)
        .map(|n| (n, zass_coeff(n, u, v), c_from_recurrence(n, u, v)))
        .collect();
    match format {
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|&(n, closed, rec)| {
                    json!({
                        "n": n,
                        "closed_form": scalar_json(closed),
                        "recurrence": scalar_json(rec),
                        "difference": (closed - rec).norm(),
                    })
                })
                .collect();
            let doc = json!({ "u": scalar_json(u), "v": scalar_json(v), "rows": table });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "n",
                "closed_re",
                "closed_im",
                "recurrence_re",
                "recurrence_im",
                "difference",
            ])
            .map_err(csv_io)?;
            for &(n, closed, rec) in &rows {
                w.write_record([
                    n.to_string(),
                    fmt_exact(closed.re),
                    fmt_exact(closed.im),
                    fmt_exact(rec.re),
                    fmt_exact(rec.im),
                    fmt_exact((closed - rec).norm()),
                ])
                .map_err(csv_io)?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "u = {}, v = {}", fmt_scalar(u), fmt_scalar(v))?;
            writeln!(
                out,
                "{:>4}  {:>24}  {:>24}  {:>12}",
                "n", "closed_form", "recurrence", "difference"
            )?;
            for &(n, closed, rec) in &rows {
                writeln!(
                    out,
                    "{n:>4}  {:>24}  {:>24}  {:>12}",
                    fmt_scalar(closed),
                    fmt_scalar(rec),
                    fmt_real((closed - rec).norm())
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn load_matrix(path: &PathBuf) -> Result<CMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    CMatrix::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn pair_from_files(
    x_path: &PathBuf,
    y_path: &PathBuf,
    out: &mut dyn Write,
) -> Result<AlgebraPair, CliError> {
    let x = load_matrix(x_path)?;
    let y = load_matrix(y_path)?;
    if x.dim() != y.dim() {
        return Err(CliError::Usage(format!(
            "dimension mismatch: --x has dim {}, --y has dim {}",
            x.dim(),
            y.dim()
        )));
    }
    let fit = infer_uvc(&x, &y).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(
        out,
        "inferred u = {}, v = {}, c = {}, fit_residual = {:.3e}{}",
        fmt_scalar(fit.u),
        fmt_scalar(fit.v),
        fmt_scalar(fit.c),
        fit.fit_residual,
        if fit.rank_deficient() {
            " (rank-deficient Gram system, minimum-norm solution)"
        } else {
            ""
        }
    )?;
    if fit.fit_residual.is_nan() || fit.fit_residual > MAX_FIT_RESIDUAL {
        return Err(CliError::Usage(format!(
            "[X, Y] is not in span{{X, Y, 1}}: fit_residual = {:.3e} exceeds {MAX_FIT_RESIDUAL:e}",
            fit.fit_residual
        )));
    }
    let name = format!("files({}, {})", x_path.display(), y_path.display());
    AlgebraPair::from_matrices(name, x, y, fit.u, fit.v, fit.c)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_verify(
    pair: Option<&str>,
    files: Option<(&PathBuf, &PathBuf)>,
    tol: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> CliResult {
    // inference notes go to the text stream only; keep JSON output clean
    let mut notes = Vec::new();
    let pair = match (pair, files) {
        (Some(name), _) => builtin(name).map_err(|_| {
            CliError::Usage(format!(
                "unknown pair \"{name}\"; expected one of {}",
                BUILTIN_NAMES.join(", ")
            ))
        })?,
        (None, Some((x, y))) => {
            let result = pair_from_files(x, y, &mut notes);
            if let Err(CliError::Usage(_)) = &result {
                out.write_all(&notes)?;
            }
            result?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "either --pair or --x/--y is required".into(),
            ))
        }
    };
    let tol = tol.unwrap_or_else(|| verify::default_tolerance(&pair));
    let report = run_suite(&pair, tol);
    match format {
        Format::Json => writeln!(out, "{}", report.to_json())?,
        Format::Text | Format::Csv => {
            out.write_all(&notes)?;
            write_report_text(&report, out)?;
        }
    }
    Ok(if report.all_passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn write_report_text(report: &CheckReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "pair: {}", report.pair_name)?;
    for r in &report.results {
        writeln!(
            out,
            "  {:<20} {:<4} residual = {:<12} tol = {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            fmt_real(r.residual),
            fmt_real(r.tolerance)
        )?;
        if let Some(e) = r.metadata.get("error") {
            writeln!(out, "      error: {}", e.as_str().unwrap_or_default())?;
        }
    }
    writeln!(out, "all_passed: {}", report.all_passed)
}

/// Real lattice of `steps × steps` points with fixed imaginary offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub steps: usize,
    pub u_im: f64,
    pub v_im: f64,
}

impl Lattice {
    fn axis((lo, hi): (f64, f64), steps: usize) -> Vec<f64> {
        if steps == 1 {
            return vec![lo];
        }
        (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect()
    }

    /// Points in row-major order: `u` outer, `v` inner.
    pub fn points(&self) -> Vec<(Scalar, Scalar)> {
        let us = Self::axis(self.u, self.steps);
        let vs = Self::axis(self.v, self.steps);
        us.iter()
            .flat_map(|&u| vs.iter().map(move |&v| (u, v)))
            .map(|(u, v)| (Scalar::new(u, self.u_im), Scalar::new(v, self.v_im)))
            .collect()
    }
}

/// One sweep row per lattice point, in lattice order.
pub fn sweep(check: &str, lattice: &Lattice, tol: f64) -> Vec<(Scalar, Scalar, CheckResult)> {
    lattice
        .points()
        .into_par_iter()
        .map(|(u, v)| {
            let result = match realize(u, v) {
                Ok(pair) => match run_check(&pair, check, tol).expect("validated check name") {
                    Ok(r) => r,
                    Err(e) => CheckResult::from_error(check, tol, &e),
                },
                Err(e) => CheckResult::from_error(check, tol, &e),
            };
            (u, v, result)
        })
        .collect()
}

fn cmd_sweep(
    check: &str,
    lattice: &Lattice,
    tol: f64,
    path: &PathBuf,
    out: &mut dyn Write,
) -> CliResult {
    let rows = sweep(check, lattice, tol);
    let file = fs::File::create(path)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["u_re", "u_im", "v_re", "v_im", "residual", "passed"])
        .map_err(csv_io)?;
    for (u, v, r) in &rows {
        w.write_record([
            fmt_exact(u.re),
            fmt_exact(u.im),
            fmt_exact(v.re),
            fmt_exact(v.im),
            fmt_exact(r.residual),
            r.passed.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|(_, _, r)| !r.passed).count();
    writeln!(
        out,
        "{check}: {} points, {} passed, {failed} failed -> {}",
        rows.len(),
        rows.len() - failed,
        path.display()
    )?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_integral(uv: &UvArgs, tol: f64, format: Format, out: &mut dyn Write) -> CliResult {
    let (u, v) = (uv.u(), uv.v());
    let closed = g_right(u, v);
    let rows: Vec<(usize, Scalar)> = [8usize, 16, 32]
        .iter()
        .map(|&n| (n, integrate_gr(u, v, n)))
        .collect();
    let fine = rows.last().expect("rows").1;
    let passed = (fine - closed.value).norm() <= tol;
    match format {
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|&(n, q)| json!({ "nodes": n, "integral": scalar_json(q), "error": (q - closed.value).norm() }))
                .collect();
            let doc = json!({
                "u": scalar_json(u),
                "v": scalar_json(v),
                "closed_form": coeff_entry(&closed),
                "quadrature": table,
                "tolerance": tol,
                "passed": passed,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["nodes", "re", "im", "error"])
                .map_err(csv_io)?;
            for &(n, q) in &rows {
                w.write_record([
                    n.to_string(),
                    fmt_exact(q.re),
                    fmt_exact(q.im),
                    fmt_exact((q - closed.value).norm()),
                ])
                .map_err(csv_io)?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "u = {}, v = {}", fmt_scalar(u), fmt_scalar(v))?;
            writeln!(
                out,
                "closed form g_r = {} [{}]",
                fmt_scalar(closed.value),
                closed.method.as_str()
            )?;
            writeln!(out, "{:>6}  {:>24}  {:>12}", "nodes", "integral", "|error|")?;
            for &(n, q) in &rows {
                writeln!(
                    out,
                    "{n:>6}  {:>24}  {:>12}",
                    fmt_scalar(q),
                    fmt_real((q - closed.value).norm())
                )?;
            }
            writeln!(out, "{}", if passed { "PASS" } else { "FAIL" })?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}
