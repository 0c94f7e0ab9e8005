//! Matrix verification of the disentangling identities.
//!
//! Each check exponentiates matrices from an [`AlgebraPair`] and compares
//! both sides of an identity with [`rel_residual`]. Coefficients always
//! multiply the computed commutator `W`, never `uX + vY + c·1`, so the
//! central (Glauber) case is testable in finite dimension.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::builders::{lindblad_pair, AlgebraPair};
use crate::casas::{c_from_recurrence, partial_sum_gr};
use crate::coeffs::{f_bch, g_center, g_left, g_right, gamma_swap, integrand, CoeffValue, Scalar};
use crate::error::{Error, Result};
use crate::matcore::{commutator, conjugate_series, expm, rel_residual, CMatrix};
use crate::quadrature::GaussLegendre;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relaxed tolerance for pairs whose exponentials are large.
pub const RELAXED_TOL: f64 = 1e-9;
/// Norm of `e^{X+Y}` above which [`RELAXED_TOL`] applies.
pub const LARGE_EXP_NORM: f64 = 1e6;

/// Truncation order of the Zassenhaus product in [`run_suite`].
pub const SUITE_PRODUCT_ORDER: usize = 30;
/// Hadamard parameters used by [`run_suite`].
pub const SUITE_HADAMARD_T: f64 = 0.5;
pub const SUITE_HADAMARD_TERMS: usize = 40;

const QUAD_NODES: usize = 32;
const QUAD_NODES_COARSE: usize = 16;

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            tolerance,
            // NaN compares false, so a NaN residual fails
            passed: residual <= tolerance,
            metadata: BTreeMap::new(),
        }
    }

    /// Failed result carrying the error in its metadata.
    pub fn from_error(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        let mut r = CheckResult::new(name, f64::INFINITY, tolerance);
        r.metadata.insert("error".into(), json!(err.to_string()));
        r
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.into(), value);
        self
    }
}

/// Ordered list of check results for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    #[serde(rename = "pair")]
    pub pair_name: String,
    #[serde(rename = "checks")]
    pub results: Vec<CheckResult>,
    pub all_passed: bool,
}

impl CheckReport {
    pub fn new(pair_name: impl Into<String>, results: Vec<CheckResult>) -> Self {
        let all_passed = results.iter().all(|r| r.passed);
        CheckReport {
            pair_name: pair_name.into(),
            results,
            all_passed,
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub(crate) fn scalar_json(z: Scalar) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn coeff_json(c: &CoeffValue) -> Value {
    json!({
        "value": scalar_json(c.value),
        "method": c.method.as_str(),
        "terms_used": c.terms_used,
    })
}

fn product(factors: &[&CMatrix]) -> CMatrix {
    let (first, rest) = factors.split_first().expect("at least one factor");
    rest.iter().fold((*first).clone(), |acc, m| &acc * m)
}

/// Side on which the disentangled factor `e^{gW}` is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Center,
    Left,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Right => "disentangle_right",
            Side::Center => "disentangle_center",
            Side::Left => "disentangle_left",
        }
    }
}

/// `e^{X+Y}` against the right, centered or left disentangled product.
pub fn check_disentangle(pair: &AlgebraPair, side: Side, tol: f64) -> Result<CheckResult> {
    let (u, v) = (pair.u(), pair.v());
    let coeff = match side {
        Side::Right => g_right(u, v),
        Side::Center => g_center(u, v),
        Side::Left => g_left(u, v),
    };
    let lhs = expm(&(pair.x() + pair.y()))?;
    let ex = expm(pair.x())?;
    let ey = expm(pair.y())?;
    let eg = expm(&pair.w().scale(coeff.value))?;
    let rhs = match side {
        Side::Right => product(&[&ex, &ey, &eg]),
        Side::Center => product(&[&ex, &eg, &ey]),
        Side::Left => product(&[&eg, &ex, &ey]),
    };
    Ok(
        CheckResult::new(side.label(), rel_residual(&lhs, &rhs)?, tol)
            .with("coefficient", coeff_json(&coeff)),
    )
}

/// `e^X e^Y = e^Y e^X e^{γW}`.
pub fn check_swap(pair: &AlgebraPair, tol: f64) -> Result<CheckResult> {
    let gamma = gamma_swap(pair.u(), pair.v());
    let ex = expm(pair.x())?;
    let ey = expm(pair.y())?;
    let eg = expm(&pair.w().scale(gamma.value))?;
    let lhs = &ex * &ey;
    let rhs = product(&[&ey, &ex, &eg]);
    Ok(CheckResult::new("swap", rel_residual(&lhs, &rhs)?, tol)
        .with("coefficient", coeff_json(&gamma)))
}

/// `e^X e^Y = e^{X + Y + f(u,v) W}`.
pub fn check_bch(pair: &AlgebraPair, tol: f64) -> Result<CheckResult> {
    let f = f_bch(pair.u(), pair.v())?;
    let lhs = &expm(pair.x())? * &expm(pair.y())?;
    let exponent = &(pair.x() + pair.y()) + &pair.w().scale(f.value);
    let rhs = expm(&exponent)?;
    Ok(CheckResult::new("bch", rel_residual(&lhs, &rhs)?, tol).with("coefficient", coeff_json(&f)))
}

/// `A = g_l W`, `B = X + Y + f W` satisfy `[A, B] = (u - v) A`.
pub fn check_ab_structure(pair: &AlgebraPair, tol: f64) -> Result<CheckResult> {
    let (u, v) = (pair.u(), pair.v());
    let gl = g_left(u, v);
    let f = f_bch(u, v)?;
    let a = pair.w().scale(gl.value);
    let b = &(pair.x() + pair.y()) + &pair.w().scale(f.value);
    let lhs = commutator(&a, &b)?;
    let rhs = a.scale(u - v);
    Ok(
        CheckResult::new("ab_structure", rel_residual(&lhs, &rhs)?, tol)
            .with("g_left", coeff_json(&gl))
            .with("f", coeff_json(&f)),
    )
}

/// `∫_0^1 h(s) ds` by Gauss–Legendre with `n` nodes.
pub fn integrate_gr(u: Scalar, v: Scalar, nodes: usize) -> Scalar {
    GaussLegendre::new(nodes).integrate(0.0, 1.0, |s| integrand(Scalar::new(s, 0.0), u, v))
}

/// The integral representation: the quadrature of `h` must reproduce
/// `g_r`, and `e^X e^Y e^{IW}` must reproduce `e^{X+Y}`.
///
/// The integrand values at different `s` are all multiples of `W`, so the
/// ordered exponential reduces to the ordinary exponential of the integral.
pub fn check_integral(pair: &AlgebraPair, tol: f64) -> Result<CheckResult> {
    let (u, v) = (pair.u(), pair.v());
    let fine = integrate_gr(u, v, QUAD_NODES);
    let coarse = integrate_gr(u, v, QUAD_NODES_COARSE);
    let closed = g_right(u, v);
    let scalar_gap = (fine - closed.value).norm();

    let lhs = expm(&(pair.x() + pair.y()))?;
    let rhs = product(&[
        &expm(pair.x())?,
        &expm(pair.y())?,
        &expm(&pair.w().scale(fine))?,
    ]);
    let matrix_residual = rel_residual(&lhs, &rhs)?;

    Ok(
        CheckResult::new("integral", scalar_gap.max(matrix_residual), tol)
            .with("integral", scalar_json(fine))
            .with("integral_16", scalar_json(coarse))
            .with("quadrature_error_estimate", json!((fine - coarse).norm()))
            .with("closed_form", coeff_json(&closed))
            .with("scalar_gap", json!(scalar_gap))
            .with("matrix_residual", json!(matrix_residual)),
    )
}

/// `e^{X+Y}` against `e^X e^Y Π_{n=2}^{N} e^{C_n W}` with `C_n` from the
/// recurrence.
pub fn check_truncated_product(pair: &AlgebraPair, max_n: usize, tol: f64) -> Result<CheckResult> {
    if max_n < 2 {
        return Err(Error::Order { n: max_n, order: 2 });
    }
    let (u, v) = (pair.u(), pair.v());
    let lhs = expm(&(pair.x() + pair.y()))?;
    let mut rhs = &expm(pair.x())? * &expm(pair.y())?;
    let mut sequence = Vec::with_capacity(max_n - 1);
    let mut residual = f64::NAN;
    for n in 2..=max_n {
        let cn = c_from_recurrence(n, u, v);
        rhs = &rhs * &expm(&pair.w().scale(cn))?;
        residual = rel_residual(&lhs, &rhs)?;
        sequence.push(residual);
    }

    // order-of-magnitude bound from the coefficient tail; recorded only
    let g = g_right(u, v).value;
    let tail = (g - partial_sum_gr(u, v, max_n)).norm();
    let w_norm = pair.w().frobenius();
    let growth = (pair.x().frobenius() + pair.y().frobenius() + g.norm() * w_norm).exp();

    Ok(CheckResult::new("truncated_product", residual, tol)
        .with("max_n", json!(max_n))
        .with("residual_sequence", json!(sequence))
        .with("tail_bound_estimate", json!(tail * w_norm * growth)))
}

/// Hadamard's lemma: `Σ_k (-t)^k ad_X^k(Y)/k!` against `e^{-tX} Y e^{tX}`.
pub fn check_hadamard(
    pair: &AlgebraPair,
    t: Scalar,
    terms: usize,
    tol: f64,
) -> Result<CheckResult> {
    let series = conjugate_series(pair.x(), pair.y(), t, terms)?;
    let direct = product(&[
        &expm(&pair.x().scale(-t))?,
        pair.y(),
        &expm(&pair.x().scale(t))?,
    ]);
    Ok(
        CheckResult::new("hadamard", rel_residual(&series, &direct)?, tol)
            .with("t", scalar_json(t))
            .with("terms", json!(terms)),
    )
}

/// Which coefficient identifications of the Lindblad splitting hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladVerdict {
    PrintedForm,
    StructureConstantForm,
    Both,
    Neither,
}

pub const LINDBLAD_PRINTED: &str = "lindblad_printed_form";
pub const LINDBLAD_STRUCTURE: &str = "lindblad_structure_constant_form";

/// Coefficient of `D↑ - D↓` in the printed splitting: `-(e^{αβ} - 1)²/(2αβ)`.
pub fn lindblad_printed_coefficient(alpha: Scalar, beta: Scalar) -> Scalar {
    let ab = alpha * beta;
    let e = ab.exp() - 1.0;
    -(e * e) / (ab * 2.0)
}

/// Coefficient of `D↑ - D↓` from the structure constants of
/// `X = αD↑`, `Y = βD↓`: `[X, Y] = βX - αY`, hence `g_r(β, -α)·αβ`.
pub fn lindblad_structure_coefficient(alpha: Scalar, beta: Scalar) -> Scalar {
    g_right(beta, -alpha).value * alpha * beta
}

/// Tests `e^{αD↑ + βD↓}` against `e^{αD↑} e^{βD↓} e^{κ(D↑ - D↓)}` for both
/// candidate coefficients `κ`.
pub fn check_lindblad_application(alpha: Scalar, beta: Scalar, tol: f64) -> Result<CheckReport> {
    if (alpha * beta).norm() == 0.0 {
        return Err(Error::Degenerate("alpha * beta = 0".into()));
    }
    let pair = lindblad_pair()?;
    let (up, down) = (pair.x(), pair.y());
    let lhs = expm(&(&up.scale(alpha) + &down.scale(beta)))?;
    let head = &expm(&up.scale(alpha))? * &expm(&down.scale(beta))?;
    let diff = up - down;

    let forms = [
        (LINDBLAD_PRINTED, lindblad_printed_coefficient(alpha, beta)),
        (
            LINDBLAD_STRUCTURE,
            lindblad_structure_coefficient(alpha, beta),
        ),
    ];
    let mut results = Vec::with_capacity(2);
    for (name, kappa) in forms {
        let rhs = &head * &expm(&diff.scale(kappa))?;
        results.push(
            CheckResult::new(name, rel_residual(&lhs, &rhs)?, tol)
                .with("coefficient", scalar_json(kappa))
                .with("convention", json!(pair.name())),
        );
    }
    let verdict = verdict_of(results[0].passed, results[1].passed);
    for r in &mut results {
        r.metadata.insert("verdict".into(), json!(verdict));
    }
    let label = format!("lindblad(alpha={alpha}, beta={beta})");
    Ok(CheckReport::new(label, results))
}

fn verdict_of(printed: bool, structure: bool) -> LindbladVerdict {
    match (printed, structure) {
        (true, true) => LindbladVerdict::Both,
        (true, false) => LindbladVerdict::PrintedForm,
        (false, true) => LindbladVerdict::StructureConstantForm,
        (false, false) => LindbladVerdict::Neither,
    }
}

/// Verdict recorded in a report from [`check_lindblad_application`].
pub fn lindblad_verdict(report: &CheckReport) -> LindbladVerdict {
    let passed = |name| report.get(name).is_some_and(|r| r.passed);
    verdict_of(passed(LINDBLAD_PRINTED), passed(LINDBLAD_STRUCTURE))
}

/// Tolerance for a pair: [`DEFAULT_TOL`], or [`RELAXED_TOL`] when
/// `‖e^{X+Y}‖_F` exceeds [`LARGE_EXP_NORM`].
pub fn default_tolerance(pair: &AlgebraPair) -> f64 {
    match expm(&(pair.x() + pair.y())) {
        Ok(e) if e.frobenius() <= LARGE_EXP_NORM => DEFAULT_TOL,
        _ => RELAXED_TOL,
    }
}

/// Names of the suite checks, in report order.
pub const SUITE_CHECKS: [&str; 9] = [
    "disentangle_right",
    "disentangle_center",
    "disentangle_left",
    "swap",
    "bch",
    "ab_structure",
    "integral",
    "truncated_product",
    "hadamard",
];

/// Runs a single suite check by name.
pub fn run_check(pair: &AlgebraPair, name: &str, tol: f64) -> Option<Result<CheckResult>> {
    let result = match name {
        "disentangle_right" => check_disentangle(pair, Side::Right, tol),
        "disentangle_center" => check_disentangle(pair, Side::Center, tol),
        "disentangle_left" => check_disentangle(pair, Side::Left, tol),
        "swap" => check_swap(pair, tol),
        "bch" => check_bch(pair, tol),
        "ab_structure" => check_ab_structure(pair, tol),
        "integral" => check_integral(pair, tol),
        "truncated_product" => check_truncated_product(pair, SUITE_PRODUCT_ORDER, tol),
        "hadamard" => check_hadamard(
            pair,
            Scalar::new(SUITE_HADAMARD_T, 0.0),
            SUITE_HADAMARD_TERMS,
            tol,
        ),
        _ => return None,
    };
    Some(result)
}

/// All identity checks on one pair. Checks run in parallel; the report keeps
/// the order of [`SUITE_CHECKS`], and a check that errors becomes a failed
/// result carrying the error.
pub fn run_suite(pair: &AlgebraPair, tol: f64) -> CheckReport {
    let results = SUITE_CHECKS
        .par_iter()
        .map(
            |&name| match run_check(pair, name, tol).expect("known check") {
                Ok(r) => r,
                Err(e) => CheckResult::from_error(name, tol, &e),
            },
        )
        .collect();
    CheckReport::new(pair.name(), results)
}
