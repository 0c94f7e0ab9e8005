//! Zassenhaus exponents from the power-series recurrence.
//!
//! For the affine commutator class the recurrence for the logarithmic
//! derivatives `F_n(t)` stays proportional to `W = [X, Y]`, `F_n = β_n(t) W`,
//! and reduces to a scalar recurrence on the power series `β_n`:
//!
//! ```text
//! β_1(t)     = e^{tu} (e^{-tv} - 1)/v
//! β_{n+1}(t) = β_n(t) - t^n/n! · β_n^{(n)}(0)
//! C_{n+1}    = β_n^{(n)}(0)/(n + 1)!
//! ```
//!
//! This module executes that recurrence step by step on truncated series.
//! It shares no code with [`crate::coeffs::zass_coeff`] and serves as its
//! independent check.

use crate::coeffs::Scalar;
use crate::error::{Error, Result};

/// Default truncation order of the `β_n` series.
pub const DEFAULT_ORDER: usize = 32;

/// Power series in `t` truncated after `t^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Scalar>,
}

impl TruncatedSeries {
    /// Series with the given coefficients; `coeffs[k]` multiplies `t^k`.
    ///
    /// # Panics
    ///
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series holds at least t^0");
        TruncatedSeries { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![Scalar::new(0.0, 0.0); order + 1],
        }
    }

    /// `e^{a t}` up to `t^order`.
    pub fn exp_scaled(a: Scalar, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = Scalar::new(1.0, 0.0);
        coeffs.push(term);
        for k in 1..=order {
            term = term * a / k as f64;
            coeffs.push(term);
        }
        TruncatedSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of `t^k`, or `None` beyond the truncation order.
    pub fn coeff(&self, k: usize) -> Option<Scalar> {
        self.coeffs.get(k).copied()
    }

    /// `k`-th derivative at `t = 0`, i.e. `k! · coeff(k)`.
    pub fn derivative_at_zero(&self, k: usize) -> Option<Scalar> {
        self.coeff(k).map(|a| a * factorial(k))
    }

    /// Cauchy product truncated to the smaller of the two orders.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| (0..=k).map(|s| self.coeffs[s] * other.coeffs[k - s]).sum())
            .collect();
        TruncatedSeries { coeffs }
    }
}

/// `k!` accumulated iteratively in double precision (exact through `22!`,
/// finite through `170!`).
fn factorial(k: usize) -> f64 {
    (2..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// `β_1(t) = e^{tu} (e^{-tv} - 1)/v` as the Cauchy product of `e^{tu}` with
/// `(e^{-tv} - 1)/v = Σ_{k≥1} (-1)^k v^{k-1} t^k/k!`, which is regular at `v = 0`.
pub fn beta1_series(u: Scalar, v: Scalar, order: usize) -> TruncatedSeries {
    let mut quotient = TruncatedSeries::zeros(order);
    if order >= 1 {
        let mut term = Scalar::new(-1.0, 0.0);
        quotient.coeffs[1] = term;
        for k in 2..=order {
            term = term * (-v) / k as f64;
            quotient.coeffs[k] = term;
        }
    }
    TruncatedSeries::exp_scaled(u, order).mul(&quotient)
}

/// One recurrence step: `β_{n+1}(t) = β_n(t) - t^n/n! · β_n^{(n)}(0)`.
///
/// Equivalently, the degree-`n` coefficient is zeroed and every other
/// coefficient is left as is.
pub fn beta_step(beta_n: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    if n == 0 || n > beta_n.order() {
        return Err(Error::Order {
            n,
            order: beta_n.order(),
        });
    }
    let derivative = beta_n.derivative_at_zero(n).expect("n within order");
    let mut next = beta_n.clone();
    next.coeffs[n] -= derivative / factorial(n);
    Ok(next)
}

/// `β_n` obtained from `β_1` by `n - 1` recurrence steps.
pub fn beta_n_series(n: usize, u: Scalar, v: Scalar, order: usize) -> Result<TruncatedSeries> {
    let mut beta = beta1_series(u, v, order);
    for k in 1..n {
        beta = beta_step(&beta, k)?;
    }
    Ok(beta)
}

/// `C_n(u, v) = β_{n-1}^{(n-1)}(0)/n!` from the recurrence.
///
/// # Panics
///
/// Panics if `n < 2`.
pub fn c_from_recurrence(n: usize, u: Scalar, v: Scalar) -> Scalar {
    assert!(n >= 2, "Zassenhaus exponents start at n = 2, got {n}");
    let order = DEFAULT_ORDER.max(n - 1);
    let beta = beta_n_series(n - 1, u, v, order).expect("order covers n - 1");
    let derivative = beta.derivative_at_zero(n - 1).expect("order covers n - 1");
    derivative / factorial(n)
}

/// `Σ_{n=2}^{N} C_n(u, v)`, the exponent of the truncated Zassenhaus product.
pub fn partial_sum_gr(u: Scalar, v: Scalar, max_n: usize) -> Scalar {
    (2..=max_n).map(|n| c_from_recurrence(n, u, v)).sum()
}
