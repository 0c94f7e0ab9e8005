//! Scalar coefficients of the closed-form Zassenhaus and BCH formulas.
//!
//! All coefficient functions are entire in `(u, v)` apart from the poles of
//! the BCH coefficient, but their textbook closed forms are `0/0` on the
//! lines `u = 0`, `v = 0` and `u = v`. Near those lines the evaluators switch
//! to paths without cancellation:
//!
//! * `g_r(u, v) = -exp[0, u, u - v]`, the second divided difference of the
//!   exponential. When all three nodes are close a power series is summed;
//!   when only one pair is close the divided-difference recursion is used
//!   with a stable first difference `exp[p, q] = e^q φ1(p - q)`.
//! * `φ1(x) = (e^x - 1)/x` is summed from its Taylor series for small `|x|`.
//!
//! Every evaluator returns a [`CoeffValue`] that records the path taken.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Complex double-precision scalar used for every parameter and coefficient.
pub type Scalar = Complex64;

/// Distance from a singular line below which the closed forms are abandoned.
pub const BRANCH_SWITCH: f64 = 0.25;

/// Relative size of the last retained series term.
pub const SERIES_REL_TOL: f64 = 1e-18;

/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 64;

/// Largest node spread for which the full `g_r` series is summed.
const SERIES_SPREAD: f64 = 1.0;

/// Evaluation path taken by a coefficient function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Series,
    DividedDifference,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Series => "series",
            Method::DividedDifference => "divided_difference",
        }
    }
}

/// A coefficient together with the path used to compute it.
///
/// `terms_used` is zero exactly when `method` is [`Method::ClosedForm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffValue {
    pub value: Scalar,
    pub method: Method,
    pub terms_used: usize,
}

impl CoeffValue {
    fn closed(value: Scalar) -> Self {
        CoeffValue {
            value,
            method: Method::ClosedForm,
            terms_used: 0,
        }
    }

    fn approx(value: Scalar, method: Method, terms: usize) -> Self {
        debug_assert!(method != Method::ClosedForm);
        CoeffValue {
            value,
            method,
            terms_used: terms.max(1),
        }
    }

    fn scaled(self, factor: Scalar) -> Self {
        CoeffValue {
            value: self.value * factor,
            ..self
        }
    }
}

#[inline]
fn c(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

/// `(e^x - 1)/x`, continued analytically through `x = 0`.
pub fn phi1(x: Scalar) -> Scalar {
    phi1_eval(x).0
}

/// `φ1(x)` and the number of Taylor terms used (zero for the closed form).
pub(crate) fn phi1_eval(x: Scalar) -> (Scalar, usize) {
    if x.norm() > BRANCH_SWITCH {
        return ((x.exp() - 1.0) / x, 0);
    }
    // Σ x^k/(k+1)!; for |x| < 1 the terms shrink monotonically.
    let mut sum = c(1.0);
    let mut term = c(1.0);
    let mut terms = 1;
    for k in 1..SERIES_MAX_TERMS {
        term = term * x / (k as f64 + 1.0);
        sum += term;
        terms += 1;
        if term.norm() < SERIES_REL_TOL * sum.norm() {
            break;
        }
    }
    (sum, terms)
}

/// Distances between the divided-difference nodes `0`, `u` and `u - v`.
fn node_distances(u: Scalar, v: Scalar) -> (f64, f64) {
    let d = [u.norm(), v.norm(), (u - v).norm()];
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let max = d.iter().copied().fold(0.0, f64::max);
    (min, max)
}

/// Right-sided coefficient `g_r(u, v)` in `e^{X+Y} = e^X e^Y e^{g_r W}`.
pub fn g_right(u: Scalar, v: Scalar) -> CoeffValue {
    let (min, max) = node_distances(u, v);
    let method = if min >= BRANCH_SWITCH {
        Method::ClosedForm
    } else if max < SERIES_SPREAD {
        Method::Series
    } else {
        Method::DividedDifference
    };
    g_right_via(u, v, method)
}

/// `g_r(u, v)` evaluated along a forced path.
///
/// The closed form is undefined on the singular lines, the series loses
/// accuracy once `|u|` or `|u - v|` grows past a few units, and the
/// divided-difference path needs at least one node well separated from the
/// other two. [`g_right`] picks the appropriate one; this entry point exists
/// so the paths can be compared against each other.
pub fn g_right_via(u: Scalar, v: Scalar, method: Method) -> CoeffValue {
    match method {
        Method::ClosedForm => CoeffValue::closed(g_right_closed(u, v)),
        Method::Series => {
            let (value, terms) = g_right_series(u, v);
            CoeffValue::approx(value, Method::Series, terms)
        }
        Method::DividedDifference => {
            let (value, terms) = g_right_divided(u, v);
            CoeffValue::approx(value, Method::DividedDifference, terms)
        }
    }
}

fn g_right_closed(u: Scalar, v: Scalar) -> Scalar {
    let eu = u.exp();
    let num = u * ((u - v).exp() - eu) + v * (eu - 1.0);
    num / (u * v * (u - v))
}

/// `-Σ_{k≥0} h_k(u, u - v)/(k + 2)!` with `h_k(a, b) = Σ_j a^j b^{k-j}`.
fn g_right_series(u: Scalar, v: Scalar) -> (Scalar, usize) {
    let a = u;
    let b = u - v;
    let radius = a.norm().max(b.norm());

    let mut h = c(1.0);
    let mut b_pow = c(1.0);
    let mut factorial = 2.0;
    let mut sum = h / factorial;
    let mut bound = 0.5;
    let mut terms = 1;
    for k in 1..SERIES_MAX_TERMS {
        // bound on |h_k|/(k+2)!, from |h_k| <= (k+1) R^k
        bound *= radius * (k as f64 + 1.0) / (k as f64 * (k as f64 + 2.0));
        if bound < SERIES_REL_TOL * sum.norm() {
            break;
        }
        b_pow *= b;
        h = a * h + b_pow;
        factorial *= k as f64 + 2.0;
        sum += h / factorial;
        terms += 1;
    }
    (-sum, terms)
}

/// `-exp[0, u, u - v]` through the divided-difference recursion, pairing the
/// two closest nodes.
fn g_right_divided(u: Scalar, v: Scalar) -> (Scalar, usize) {
    let zero = c(0.0);
    let w = u - v;
    // (distance, close pair p, q, far node r)
    let candidates = [
        (u.norm(), zero, u, w),
        (w.norm(), zero, w, u),
        (v.norm(), u, w, zero),
    ];
    let (_, p, q, r) = candidates
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("three candidate pairs");

    let (close, t1) = phi1_eval(p - q);
    let (far, t2) = phi1_eval(q - r);
    let dd_pq = q.exp() * close;
    let dd_qr = r.exp() * far;
    (-(dd_pq - dd_qr) / (p - r), t1 + t2)
}

/// Left-sided coefficient, `g_l(u, v) = g_r(v, u)`.
pub fn g_left(u: Scalar, v: Scalar) -> CoeffValue {
    g_right(v, u)
}

/// Centered coefficient in `e^{X+Y} = e^X e^{g_c W} e^Y`, `g_c(u, v) = e^{-v} g_l(u, v)`.
pub fn g_center(u: Scalar, v: Scalar) -> CoeffValue {
    g_left(u, v).scaled((-v).exp())
}

/// Whether `e^u = e^v` with `u != v`, i.e. `u - v` is a nonzero multiple of `2πi`.
fn is_bch_pole(u: Scalar, v: Scalar) -> bool {
    let d = u - v;
    let turns = (d.im / std::f64::consts::TAU).round();
    if turns == 0.0 {
        return false;
    }
    let lattice = Scalar::new(0.0, turns * std::f64::consts::TAU);
    (d - lattice).norm() <= 1e-12 * lattice.norm()
}

/// BCH coefficient `f(u, v)` in `e^X e^Y = e^{X + Y + f(u,v) W}`.
///
/// Returns [`Error::Pole`] when `e^u = e^v` but `u != v`.
pub fn f_bch(u: Scalar, v: Scalar) -> Result<CoeffValue> {
    if is_bch_pole(u, v) {
        return Err(Error::Pole { u, v });
    }
    let (min, _) = node_distances(u, v);
    if min >= BRANCH_SWITCH {
        let (eu, ev) = (u.exp(), v.exp());
        let num = u * eu * (ev - 1.0) - v * ev * (eu - 1.0);
        let den = u * v * (eu - ev);
        return Ok(CoeffValue::closed(num / den));
    }
    // f = -g_l(u, v) e^{u-v} / φ1(u - v), regular on all three lines
    let g = g_left(u, v);
    let (p, t) = phi1_eval(u - v);
    let value = -g.value * (u - v).exp() / p;
    let method = match g.method {
        Method::Series => Method::Series,
        _ => Method::DividedDifference,
    };
    Ok(CoeffValue::approx(value, method, g.terms_used + t))
}

/// Swap coefficient in `e^X e^Y = e^Y e^X e^{γ W}`.
///
/// `γ(u, v) = -(g_r(-v, -u) + g_r(u, v))`, which factors as `φ1(u) φ1(-v)`.
pub fn gamma_swap(u: Scalar, v: Scalar) -> CoeffValue {
    let (a, ta) = phi1_eval(u);
    let (b, tb) = phi1_eval(-v);
    let value = a * b;
    if ta + tb == 0 {
        CoeffValue::closed(value)
    } else {
        CoeffValue::approx(value, Method::Series, ta + tb)
    }
}

/// Zassenhaus exponent `C_n(u, v)`, the multiple of `W` in the `n`-th factor.
///
/// Uses `C_n = -h_{n-2}(u, u - v)/n!`, which has no singularity at `v = 0`.
///
/// # Panics
///
/// Panics if `n < 2`.
pub fn zass_coeff(n: usize, u: Scalar, v: Scalar) -> Scalar {
    assert!(n >= 2, "Zassenhaus exponents start at n = 2, got {n}");
    let a = u;
    let b = u - v;
    let mut h = c(1.0);
    let mut b_pow = c(1.0);
    for _ in 1..=(n - 2) {
        b_pow *= b;
        h = a * h + b_pow;
    }
    let factorial: f64 = (2..=n).map(|k| k as f64).product();
    -h / factorial
}

/// Integrand `h(s) = (e^{s(u-v)} - e^{su})/v` whose integral over `[0, 1]` is `g_r(u, v)`.
pub fn integrand(s: Scalar, u: Scalar, v: Scalar) -> Scalar {
    -s * (s * u).exp() * phi1(-s * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn r(x: f64) -> Scalar {
        c(x)
    }

    fn rel(a: Scalar, b: Scalar) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn phi1_values() {
        assert_eq!(phi1(r(0.0)), r(1.0));
        assert!(rel(phi1(r(1.0)), r(E - 1.0)) < 1e-15);
        // 40-digit reference: 1.000000005000000016666666708...
        assert!(rel(phi1(r(1e-8)), r(1.000_000_005_000_000_1)) <= 1e-13);
    }

    #[test]
    fn g_right_reference_points() {
        let g = g_right(r(0.0), r(0.0));
        assert_eq!(g.value, r(-0.5));
        assert_ne!(g.method, Method::ClosedForm);

        let expected = (3.0 * (-2.0f64).exp() - 1.0) / 4.0;
        assert!(rel(g_right(r(-2.0), r(0.0)).value, r(expected)) < 1e-14);
        let expected = -(E * E + 1.0) / 4.0;
        assert!(rel(g_right(r(2.0), r(0.0)).value, r(expected)) < 1e-14);
    }

    #[test]
    fn g_right_diagonal_and_near_origin() {
        assert!(rel(g_right(r(1.0), r(1.0)).value, r(2.0 - E)) < 1e-14);
        assert!(rel(g_right(r(2.0), r(2.0)).value, r((3.0 - E * E) / 4.0)) < 1e-14);
        let g = g_right(r(1e-9), r(2e-9));
        assert!((g.value - r(-0.5)).norm() < 1e-9);
    }

    #[test]
    fn g_left_and_center_points() {
        assert_eq!(g_left(r(0.0), r(0.0)).value, r(-0.5));
        let expected = (3.0 * (-2.0f64).exp() - 1.0) / 4.0;
        assert!(rel(g_left(r(0.0), r(-2.0)).value, r(expected)) < 1e-14);
        assert!(rel(g_left(r(1.0), r(1.0)).value, r(2.0 - E)) < 1e-14);

        assert_eq!(g_center(r(0.0), r(0.0)).value, r(-0.5));
        assert!(rel(g_center(r(1.0), r(0.0)).value, r(-1.0 / E)) < 1e-14);
        assert!(rel(g_center(r(0.0), r(1.0)).value, r(-1.0 / E)) < 1e-14);
    }

    #[test]
    fn f_bch_points() {
        assert!(rel(f_bch(r(0.0), r(0.0)).unwrap().value, r(0.5)) < 1e-15);
        // e/(e-1) - 1
        assert!(
            rel(
                f_bch(r(1.0), r(0.0)).unwrap().value,
                r(0.581_976_706_869_326_4)
            ) < 1e-14
        );
        // (e - 2) along u = v
        assert!(rel(f_bch(r(1.0), r(1.0)).unwrap().value, r(E - 2.0)) < 1e-14);
    }

    #[test]
    fn f_bch_pole() {
        let u = Scalar::new(0.3, 0.0);
        let v = Scalar::new(0.3, -std::f64::consts::TAU);
        assert_eq!(f_bch(u, v), Err(Error::Pole { u, v }));
        // near but not on the pole the value is large and finite
        let v = Scalar::new(0.3, -std::f64::consts::TAU + 1e-6);
        let f = f_bch(u, v).unwrap();
        assert!(f.value.norm() > 1e4 && f.value.norm().is_finite());
    }

    #[test]
    fn gamma_swap_points() {
        let g = gamma_swap(r(0.0), r(0.0));
        assert_eq!(g.value, r(1.0));
        assert!(rel(gamma_swap(r(1.0), r(0.0)).value, r(E - 1.0)) < 1e-15);
        assert!(rel(gamma_swap(r(1.0), r(1.0)).value, r(1.086_161_269_630_487_6)) < 1e-14);
    }

    #[test]
    fn gamma_swap_matches_explicit_expression() {
        let pts = [(1.3, -0.7), (2.0, 0.5), (-1.1, 2.4), (0.9, 0.4)];
        for (u, v) in pts {
            let (u, v) = (r(u), r(v));
            let explicit = (v * ((-v).exp() - 1.0) * (u.exp() - 1.0)
                + u * ((-v).exp() - 1.0) * (1.0 - u.exp()))
                / (v * u * (u - v));
            let via_g = -(g_right(-v, -u).value + g_right(u, v).value);
            let gamma = gamma_swap(u, v).value;
            assert!(rel(gamma, explicit) < 1e-12);
            assert!(rel(gamma, via_g) < 1e-12);
        }
    }

    #[test]
    fn zass_coeff_low_orders() {
        let (u, v) = (Scalar::new(0.7, -0.2), Scalar::new(-1.3, 0.4));
        assert_eq!(zass_coeff(2, u, v), r(-0.5));
        assert!(rel(zass_coeff(3, u, v), (v - 2.0 * u) / 6.0) < 1e-15);
        assert_eq!(zass_coeff(3, r(0.0), r(0.0)), r(0.0));
    }

    #[test]
    #[should_panic]
    fn zass_coeff_rejects_n_below_two() {
        zass_coeff(1, r(0.0), r(0.0));
    }

    #[test]
    fn integrand_points() {
        assert_eq!(integrand(r(0.0), r(1.3), r(-0.7)), r(0.0));
        assert_eq!(integrand(r(1.0), r(0.0), r(0.0)), r(-1.0));
        let (s, u, v) = (r(0.6), r(1.3), r(-0.7));
        let direct = ((s * (u - v)).exp() - (s * u).exp()) / v;
        assert!(rel(integrand(s, u, v), direct) < 1e-14);
    }

    #[test]
    fn method_tags_are_consistent() {
        let cases = [(0.0, 0.0), (2.0, 0.0), (1.3, -0.7), (0.1, 0.05), (5.0, 5.1)];
        for (u, v) in cases {
            let g = g_right(r(u), r(v));
            assert_eq!(g.terms_used == 0, g.method == Method::ClosedForm);
            assert!(g.value.re.is_finite() && g.value.im.is_finite());
        }
        assert_eq!(g_right(r(1.3), r(-0.7)).method, Method::ClosedForm);
        assert_eq!(g_right(r(0.1), r(0.05)).method, Method::Series);
        assert_eq!(g_right(r(2.0), r(0.0)).method, Method::DividedDifference);
    }

    #[test]
    fn series_stops_on_bound_not_on_vanishing_term() {
        // h_1(1, -1) = 0; a raw-term criterion would stop after one term
        let (value, terms) = g_right_series(r(1.0), r(2.0));
        assert!(terms > 10);
        assert!(rel(value, g_right_closed(r(1.0), r(2.0))) < 1e-13);
    }

    #[test]
    fn large_arguments_stay_finite_and_accurate() {
        // the far node dominates; u = -40, v ~ 0 sits on the divided-difference path
        let g = g_right(r(-40.0), r(1e-3));
        assert_eq!(g.method, Method::DividedDifference);
        let reference = (phi1(r(-40.0 - 1e-3)) - phi1(r(-40.0))) / r(1e-3);
        assert!(rel(g.value, reference) < 1e-9);
        for (u, v) in [(50.0, -50.0), (-50.0, 50.0), (50.0, 49.9), (-50.0, 0.0)] {
            let g = g_right(r(u), r(v)).value;
            assert!(g.re.is_finite() && g.im.is_finite(), "({u}, {v})");
        }
    }
}
