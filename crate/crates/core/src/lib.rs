//! Disentangling operator exponentials for pairs with `[X, Y] = uX + vY + c·1`.
//!
//! For this commutator class every nested commutator collapses onto a
//! multiple of `W = [X, Y]`, so
//!
//! ```text
//! e^{X+Y} = e^X e^Y e^{g_r(u,v) W} = e^X e^{g_c(u,v) W} e^Y = e^{g_l(u,v) W} e^X e^Y
//! ```
//!
//! holds with scalar coefficients. [`coeffs`] evaluates those coefficients
//! (and the related BCH and swap coefficients) stably over the complex
//! plane, [`casas`] recomputes the Zassenhaus exponents through the
//! power-series recurrence, and [`verify`] checks every identity on exact
//! matrix realizations from [`builders`].

pub mod builders;
pub mod casas;
pub mod cli;
pub mod coeffs;
mod error;
pub mod matcore;
pub mod quadrature;
pub mod verify;

pub use coeffs::{CoeffValue, Method, Scalar};
pub use error::{Error, Result};
pub use matcore::CMatrix;
