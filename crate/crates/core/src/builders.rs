//! Exact finite-dimensional realizations of the affine commutator class.
//!
//! Every identity in the harness only uses the adjoint relations
//! `[X, W] = vW` and `[Y, W] = -uW` for `W = [X, Y]`, so each builder
//! guarantees those relations and stores `W` alongside the pair.

use std::fmt;

use crate::coeffs::Scalar;
use crate::error::{Error, Result};
use crate::matcore::{commutator, rel_residual, CMatrix};

/// Residual bound for the adjoint relations of builder outputs.
pub const PAIR_TOLERANCE: f64 = 1e-12;

fn r(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// A matrix pair with `[X, Y] = uX + vY + c·1` (or, for central pairs,
/// `[X, Y] = W` with `W` commuting with both).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPair {
    name: String,
    x: CMatrix,
    y: CMatrix,
    w: CMatrix,
    u: Scalar,
    v: Scalar,
    c: Scalar,
}

impl AlgebraPair {
    /// Pair with declared structure constants; `W` is computed from the matrices.
    ///
    /// Fails on mismatched dimensions or a vanishing commutator. The adjoint
    /// relations are not checked here; see [`AlgebraPair::ad_residuals`].
    pub fn from_matrices(
        name: impl Into<String>,
        x: CMatrix,
        y: CMatrix,
        u: Scalar,
        v: Scalar,
        c: Scalar,
    ) -> Result<Self> {
        let w = commutator(&x, &y)?;
        if w.frobenius() == 0.0 {
            return Err(Error::Degenerate("[X, Y] = 0".into()));
        }
        Ok(AlgebraPair {
            name: name.into(),
            x,
            y,
            w,
            u,
            v,
            c,
        })
    }

    fn checked(self) -> Result<Self> {
        let (rx, ry) = self.ad_residuals();
        if rx > PAIR_TOLERANCE || ry > PAIR_TOLERANCE {
            return Err(Error::Degenerate(format!(
                "{}: adjoint relations violated ({rx:.3e}, {ry:.3e})",
                self.name
            )));
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    /// Cached commutator `[X, Y]`.
    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn u(&self) -> Scalar {
        self.u
    }

    pub fn v(&self) -> Scalar {
        self.v
    }

    pub fn c(&self) -> Scalar {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Residuals of `[X, W] = vW` and `[Y, W] = -uW`, relative to
    /// `max(1, ‖lhs‖, ‖G‖‖W‖)` with `G` the generator.
    pub fn ad_residuals(&self) -> (f64, f64) {
        let xw = commutator(&self.x, &self.w).expect("dims agree");
        let yw = commutator(&self.y, &self.w).expect("dims agree");
        let wn = self.w.frobenius();
        let gap = |lhs: &CMatrix, rhs: &CMatrix, g: &CMatrix| {
            (lhs - rhs).frobenius() / 1f64.max(lhs.frobenius()).max(g.frobenius() * wn)
        };
        (
            gap(&xw, &self.w.scale(self.v), &self.x),
            gap(&yw, &self.w.scale(-self.u), &self.y),
        )
    }

    /// Whether `W` commutes with both generators (the Glauber case).
    pub fn is_central(&self) -> bool {
        self.u == r(0.0) && self.v == r(0.0)
    }
}

impl fmt::Display for AlgebraPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name, self.dim())
    }
}

/// 2×2 pair `X = [[v, b], [0, 0]]`, `Y = [[-u, d], [0, 0]]` with
/// `[X, Y] = (ub + vd) E12 = uX + vY`.
pub fn affine_2x2(u: Scalar, v: Scalar, b: Scalar, d: Scalar) -> Result<AlgebraPair> {
    let top = u * b + v * d;
    if top.norm() <= f64::EPSILON * ((u * b).norm() + (v * d).norm()) {
        return Err(Error::Degenerate(format!(
            "ub + vd = 0 for u = {u}, v = {v}"
        )));
    }
    let zero = r(0.0);
    let x = CMatrix::from_rows(&[vec![v, b], vec![zero, zero]])?;
    let y = CMatrix::from_rows(&[vec![-u, d], vec![zero, zero]])?;
    AlgebraPair::from_matrices(format!("affine2(u={u}, v={v})"), x, y, u, v, zero)?.checked()
}

/// Any `(u, v)`: the affine 2×2 pair whose `(b, d)` makes `|ub + vd|`
/// largest relative to `|b| + |d|`, or the Heisenberg pair when `u = v = 0`.
pub fn realize(u: Scalar, v: Scalar) -> Result<AlgebraPair> {
    if u == r(0.0) && v == r(0.0) {
        return heisenberg_3x3(r(1.0));
    }
    let score = |(b, d): (f64, f64)| (u * b + v * d).norm() / (b.abs() + d.abs());
    let mut best = (1.0, 1.0);
    for bd in [(1.0, 2.0), (2.0, 1.0), (1.0, -1.0)] {
        if score(bd) > score(best) {
            best = bd;
        }
    }
    affine_2x2(u, v, r(best.0), r(best.1))
        .map_err(|_| Error::Degenerate(format!("no 2x2 realization for u = {u}, v = {v}")))
}

/// Adds `c·1` to the commutator by shifting one generator by a multiple of
/// the identity, which leaves `W` unchanged.
pub fn shift_center(pair: &AlgebraPair, c: Scalar) -> Result<AlgebraPair> {
    if c == r(0.0) {
        return Ok(pair.clone());
    }
    let id = CMatrix::identity(pair.dim());
    let (x, y) = if pair.u != r(0.0) {
        (&pair.x - &id.scale(c / pair.u), pair.y.clone())
    } else if pair.v != r(0.0) {
        (pair.x.clone(), &pair.y - &id.scale(c / pair.v))
    } else {
        return Err(Error::Degenerate(
            "[X, Y] = c1 with c != 0 has no finite-dimensional realization".into(),
        ));
    };
    let name = format!("{}+shift(c={c})", pair.name);
    AlgebraPair::from_matrices(name, x, y, pair.u, pair.v, pair.c + c)?.checked()
}

/// `X = c E12`, `Y = E23` in dimension 3: `W = c E13` is central, so
/// `u = v = 0`. The central element plays the role of `c·1`.
pub fn heisenberg_3x3(c: Scalar) -> Result<AlgebraPair> {
    if c == r(0.0) {
        return Err(Error::Degenerate("Heisenberg pair needs c != 0".into()));
    }
    let x = CMatrix::unit(3, 0, 1).scale(c);
    let y = CMatrix::unit(3, 1, 2);
    AlgebraPair::from_matrices(format!("heisenberg3(c={c})"), x, y, r(0.0), r(0.0), c)?.checked()
}

/// Which squared ladder operator pairs with the number operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Su11Kind {
    /// `X = a†²`, `[X, n] = -2X`.
    RaiseSq,
    /// `X = a²`, `[X, n] = 2X`.
    LowerSq,
}

/// Truncated Fock-space pair `(a†², a†a)` or `(a², a†a)` for `4 <= N <= 16`.
///
/// The shift-versus-diagonal structure makes `[X, n] = ∓2X` exact after
/// truncation.
pub fn su11_pair(which: Su11Kind, n: usize) -> Result<AlgebraPair> {
    if !(4..=16).contains(&n) {
        return Err(Error::Dimension(n));
    }
    let number = CMatrix::diag(&(0..n).map(|k| r(k as f64)).collect::<Vec<_>>());
    let mut x = CMatrix::zeros(n);
    for k in 0..n - 2 {
        let amp = r((((k + 1) * (k + 2)) as f64).sqrt());
        match which {
            Su11Kind::RaiseSq => x[(k + 2, k)] = amp,
            Su11Kind::LowerSq => x[(k, k + 2)] = amp,
        }
    }
    let (u, label) = match which {
        Su11Kind::RaiseSq => (-2.0, "su11-raise"),
        Su11Kind::LowerSq => (2.0, "su11-lower"),
    };
    AlgebraPair::from_matrices(format!("{label}(N={n})"), x, number, r(u), r(0.0), r(0.0))?
        .checked()
}

/// How the qubit dissipators are written before vectorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorConvention {
    /// `σ_l^T ⊗ σ_k - ½ 1 ⊗ σ_l σ_k - ½ (σ_k σ_l)^T ⊗ 1` with `σ/√2`.
    TransposedProductNormalized,
    /// Same expression with unnormalized Pauli matrices.
    TransposedProductUnit,
    /// Vectorization of `σ_k ρ σ_l - ½{σ_l σ_k, ρ}`, i.e. last term
    /// `(σ_l σ_k)^T ⊗ 1`, with `σ/√2`.
    DissipatorNormalized,
    /// Same expression with unnormalized Pauli matrices.
    DissipatorUnit,
}

impl DissipatorConvention {
    pub const ALL: [DissipatorConvention; 4] = [
        DissipatorConvention::TransposedProductNormalized,
        DissipatorConvention::TransposedProductUnit,
        DissipatorConvention::DissipatorNormalized,
        DissipatorConvention::DissipatorUnit,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DissipatorConvention::TransposedProductNormalized => "transposed-product,sigma/sqrt2",
            DissipatorConvention::TransposedProductUnit => "transposed-product,sigma",
            DissipatorConvention::DissipatorNormalized => "dissipator,sigma/sqrt2",
            DissipatorConvention::DissipatorUnit => "dissipator,sigma",
        }
    }

    fn normalized(self) -> bool {
        matches!(
            self,
            DissipatorConvention::TransposedProductNormalized
                | DissipatorConvention::DissipatorNormalized
        )
    }

    /// Vectorized `D_kl` under this convention (column stacking, `AρB ↦ (B^T ⊗ A)`).
    pub fn dissipator(self, sk: &CMatrix, sl: &CMatrix) -> CMatrix {
        let id = CMatrix::identity(2);
        let jump = sl.transpose().kron(sk);
        let left = id.kron(&(sl * sk));
        let right_product = match self {
            DissipatorConvention::TransposedProductNormalized
            | DissipatorConvention::TransposedProductUnit => sk * sl,
            DissipatorConvention::DissipatorNormalized | DissipatorConvention::DissipatorUnit => {
                sl * sk
            }
        };
        let right = right_product.transpose().kron(&id);
        &(&jump - &left.scale(r(0.5))) - &right.scale(r(0.5))
    }

    /// `(D↑, D↓)` built from `σ_1`, `σ_2`.
    pub fn raising_lowering(self) -> (CMatrix, CMatrix) {
        let scale = if self.normalized() {
            0.5f64.sqrt()
        } else {
            1.0
        };
        let i = Scalar::new(0.0, 1.0);
        let s1 = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]])
            .expect("2x2")
            .scale(r(scale));
        let s2 = CMatrix::from_rows(&[vec![r(0.0), -i], vec![i, r(0.0)]])
            .expect("2x2")
            .scale(r(scale));
        let d11 = self.dissipator(&s1, &s1);
        let d22 = self.dissipator(&s2, &s2);
        let d12 = self.dissipator(&s1, &s2);
        let d21 = self.dissipator(&s2, &s1);
        let diag = &d11 + &d22;
        let cross = &d21 - &d12;
        let up = (&diag + &cross.scale(i)).scale(r(0.5));
        let down = (&diag - &cross.scale(i)).scale(r(0.5));
        (up, down)
    }

    /// Residual of `[D↑, D↓] = D↑ - D↓`.
    pub fn commutator_residual(self) -> f64 {
        let (up, down) = self.raising_lowering();
        let lhs = commutator(&up, &down).expect("4x4");
        rel_residual(&lhs, &(&up - &down)).expect("4x4")
    }
}

/// Vectorized qubit dissipators `(D↑, D↓)` with `[D↑, D↓] = D↑ - D↓`,
/// i.e. `(u, v, c) = (1, -1, 0)`.
///
/// Conventions are tried in the order of [`DissipatorConvention::ALL`]; the
/// first one satisfying the commutator is used and named in the pair label.
pub fn lindblad_pair() -> Result<AlgebraPair> {
    lindblad_pair_with_convention().map(|(pair, _)| pair)
}

/// [`lindblad_pair`] together with the accepted convention.
pub fn lindblad_pair_with_convention() -> Result<(AlgebraPair, DissipatorConvention)> {
    let mut tried = Vec::new();
    for conv in DissipatorConvention::ALL {
        let residual = conv.commutator_residual();
        if residual <= PAIR_TOLERANCE {
            let (up, down) = conv.raising_lowering();
            let name = format!("lindblad[{}]", conv.label());
            let pair =
                AlgebraPair::from_matrices(name, up, down, r(1.0), r(-1.0), r(0.0))?.checked()?;
            return Ok((pair, conv));
        }
        tried.push(format!("{}: {residual:.3e}", conv.label()));
    }
    Err(Error::Convention(tried.join("; ")))
}

/// Built-in pairs addressable by name.
pub const BUILTIN_NAMES: [&str; 5] = [
    "affine2",
    "heisenberg3",
    "su11-raise",
    "su11-lower",
    "lindblad",
];

pub fn builtin(name: &str) -> Result<AlgebraPair> {
    match name {
        "affine2" => affine_2x2(r(1.0), r(2.0), r(1.0), r(1.0)),
        "heisenberg3" => heisenberg_3x3(r(1.0)),
        "su11-raise" => su11_pair(Su11Kind::RaiseSq, 8),
        "su11-lower" => su11_pair(Su11Kind::LowerSq, 8),
        "lindblad" => lindblad_pair(),
        other => Err(Error::Degenerate(format!(
            "unknown pair \"{other}\" (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{expm, infer_uvc};

    #[test]
    fn affine_examples() {
        let p = affine_2x2(r(1.0), r(2.0), r(1.0), r(1.0)).unwrap();
        assert_eq!(p.w(), &CMatrix::unit(2, 0, 1).scale(r(3.0)));
        assert_eq!(p.w(), &(&p.x().scale(r(1.0)) + &p.y().scale(r(2.0))));

        assert!(matches!(
            affine_2x2(r(0.0), r(0.0), r(1.0), r(1.0)),
            Err(Error::Degenerate(_))
        ));

        let p = affine_2x2(r(2.0), r(0.0), r(1.0), r(0.0)).unwrap();
        assert_eq!(p.w(), &CMatrix::unit(2, 0, 1).scale(r(2.0)));
        assert_eq!(p.w(), &p.x().scale(r(2.0)));
    }

    #[test]
    fn shift_examples() {
        let base = affine_2x2(r(1.0), r(2.0), r(1.0), r(1.0)).unwrap();
        let shifted = shift_center(&base, r(5.0)).unwrap();
        assert_eq!(shifted.w(), base.w());
        let fit = infer_uvc(shifted.x(), shifted.y()).unwrap();
        assert!((fit.u - r(1.0)).norm() < 1e-13);
        assert!((fit.v - r(2.0)).norm() < 1e-13);
        assert!((fit.c - r(5.0)).norm() < 1e-13);
        assert!(fit.fit_residual <= 1e-14);

        assert_eq!(shift_center(&base, r(0.0)).unwrap(), base);

        let h = heisenberg_3x3(r(1.0)).unwrap();
        assert!(matches!(
            shift_center(&h, r(1.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn shift_along_v_when_u_vanishes() {
        let base = affine_2x2(r(0.0), r(1.5), r(1.0), r(1.0)).unwrap();
        let shifted = shift_center(&base, r(-1.0)).unwrap();
        let fit = infer_uvc(shifted.x(), shifted.y()).unwrap();
        assert!((fit.c - r(-1.0)).norm() < 1e-13);
        assert!(fit.fit_residual <= 1e-14);
    }

    #[test]
    fn heisenberg_examples() {
        let p = heisenberg_3x3(r(1.0)).unwrap();
        assert_eq!(p.w(), &CMatrix::unit(3, 0, 2));
        assert_eq!(commutator(p.x(), p.w()).unwrap(), CMatrix::zeros(3));
        assert_eq!(commutator(p.y(), p.w()).unwrap(), CMatrix::zeros(3));
        assert!(p.is_central());

        let glauber = &(&expm(p.x()).unwrap() * &expm(p.y()).unwrap())
            * &expm(&p.w().scale(r(-0.5))).unwrap();
        let lhs = expm(&(p.x() + p.y())).unwrap();
        assert!(rel_residual(&lhs, &glauber).unwrap() <= 1e-14);

        let p2 = heisenberg_3x3(r(2.0)).unwrap();
        assert_eq!(p2.w(), &CMatrix::unit(3, 0, 2).scale(r(2.0)));
        assert!(matches!(heisenberg_3x3(r(0.0)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn su11_truncation_is_exact() {
        for which in [Su11Kind::RaiseSq, Su11Kind::LowerSq] {
            for n in [4, 6, 12, 16] {
                let p = su11_pair(which, n).unwrap();
                let lhs = commutator(p.x(), p.y()).unwrap();
                let rhs = p.x().scale(p.u());
                assert!(rel_residual(&lhs, &rhs).unwrap() < 1e-14, "{which:?} N={n}");
                let (rx, ry) = p.ad_residuals();
                assert!(rx < 1e-14 && ry < 1e-14, "{which:?} N={n}: {rx} {ry}");
            }
        }
        assert_eq!(su11_pair(Su11Kind::RaiseSq, 3), Err(Error::Dimension(3)));
        assert_eq!(su11_pair(Su11Kind::LowerSq, 17), Err(Error::Dimension(17)));
    }

    #[test]
    fn su11_infer() {
        let p = su11_pair(Su11Kind::RaiseSq, 6).unwrap();
        let fit = infer_uvc(p.x(), p.y()).unwrap();
        assert!((fit.u - r(-2.0)).norm() < 1e-13);
        assert!(fit.v.norm() < 1e-13 && fit.c.norm() < 1e-13);
        assert!(fit.fit_residual <= 1e-14);
    }

    #[test]
    fn lindblad_convention() {
        let (pair, conv) = lindblad_pair_with_convention().unwrap();
        assert_eq!(conv, DissipatorConvention::DissipatorNormalized);
        assert_eq!(pair.dim(), 4);
        assert!(pair.name().contains(conv.label()));
        let fit = infer_uvc(pair.x(), pair.y()).unwrap();
        assert!((fit.u - r(1.0)).norm() < 1e-12);
        assert!((fit.v - r(-1.0)).norm() < 1e-12);
        assert!(fit.c.norm() < 1e-12);
        assert!(fit.fit_residual <= 1e-12);
        // the transposed-product form does not close on D↑ - D↓ at any scale
        assert!(DissipatorConvention::TransposedProductNormalized.commutator_residual() > 0.5);
        assert!(DissipatorConvention::TransposedProductUnit.commutator_residual() > 0.5);
    }

    #[test]
    fn builtins_resolve() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap();
        }
        assert!(builtin("sl2").is_err());
    }
}
