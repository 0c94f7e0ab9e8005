//! Small dense complex matrices and the operations the verification harness
//! needs: commutators, the matrix exponential, the Hadamard conjugation
//! series, residual norms and recovery of `(u, v, c)` from a matrix pair.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::coeffs::Scalar;
use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// Refuse to exponentiate beyond this 1-norm; `e^700` is close to `f64::MAX`.
pub const EXPM_MAX_NORM: f64 = 700.0;

const EXPM_REL_TOL: f64 = 1e-18;
const EXPM_MAX_TERMS: usize = 60;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Scalar>,
}

fn zero() -> Scalar {
    Scalar::new(0.0, 0.0)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::Dimension(dim))
    } else {
        Ok(())
    }
}

impl CMatrix {
    /// # Panics
    ///
    /// Panics unless `1 <= dim <= MAX_DIM`.
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("matrix dimension");
        CMatrix {
            dim,
            data: vec![zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Scalar::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Matrix from a list of rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Scalar>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::MatrixFormat(format!(
                "row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        Ok(CMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Real matrix from rows of `f64`.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(entries: &[Scalar]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix unit `E_ij` (zero-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = Scalar::new(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: Scalar) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Scalar {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let n = other.dim;
        CMatrix::from_fn(self.dim * n, |i, j| {
            self[(i / n, j / n)] * other[(i % n, j % n)]
        })
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(self^H other)`.
    pub fn inner(&self, other: &CMatrix) -> Scalar {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn same_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Scalar, Scalar) -> Scalar) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Scalar;

    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        &mut self.data[i * self.dim + j]
    }
}

// Operators panic on mismatched dimensions; the public free functions check
// dimensions and return `Error::DimensionMismatch` instead.
impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(Scalar::new(-1.0, 0.0))
    }
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// Matrix exponential by scaling and squaring around a Taylor series.
///
/// With `s = max(0, ⌈log2 ‖A‖₁⌉)` the series for `e^{A/2^s}` is summed until
/// the added term is negligible in 1-norm (at most 60 terms), then squared
/// `s` times. The zero matrix maps to the identity exactly.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let norm = a.norm1();
    if !norm.is_finite() || norm > EXPM_MAX_NORM {
        return Err(Error::Overflow(norm));
    }
    let n = a.dim();
    if norm == 0.0 {
        return Ok(CMatrix::identity(n));
    }
    let squarings = if norm <= 1.0 {
        0
    } else {
        norm.log2().ceil() as i32
    };
    let scaled = a.scale(Scalar::new(0.5f64.powi(squarings), 0.0));

    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=EXPM_MAX_TERMS {
        term = (&term * &scaled).scale(Scalar::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm1() < EXPM_REL_TOL * sum.norm1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Truncated Hadamard series `Σ_{k=0}^{K} (-t)^k ad_A^k(B)/k!`, which
/// converges to `e^{-tA} B e^{tA}`.
pub fn conjugate_series(a: &CMatrix, b: &CMatrix, t: Scalar, terms: usize) -> Result<CMatrix> {
    a.same_dim(b)?;
    let mut term = b.clone();
    let mut sum = b.clone();
    for k in 1..=terms {
        term = commutator(a, &term)?.scale(-t / k as f64);
        sum = &sum + &term;
    }
    Ok(sum)
}

/// `‖A - B‖_F / max(1, ‖A‖_F, ‖B‖_F)`.
pub fn rel_residual(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    a.same_dim(b)?;
    let scale = 1f64.max(a.frobenius()).max(b.frobenius());
    Ok((a - b).frobenius() / scale)
}

/// Pivot ratio beyond which the Gram system is treated as rank deficient.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Least-squares fit of `[X, Y]` onto `span{X, Y, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureFit {
    pub u: Scalar,
    pub v: Scalar,
    pub c: Scalar,
    /// `‖[X,Y] - (uX + vY + c1)‖_F / ‖[X,Y]‖_F`, zero when the commutator vanishes.
    pub fit_residual: f64,
    /// Numerical rank of the Gram matrix of `{X, Y, 1}`.
    pub rank: usize,
    /// Ratio of the largest to the smallest accepted pivot; infinite when rank deficient.
    pub condition_estimate: f64,
}

impl StructureFit {
    /// Whether the minimum-norm solution was used because `{X, Y, 1}` is
    /// (numerically) dependent.
    pub fn rank_deficient(&self) -> bool {
        self.rank < 3
    }
}

/// Recover `(u, v, c)` with `[X, Y] ≈ uX + vY + c1`.
///
/// The 3×3 Gram system is factored by a pivoted Cholesky decomposition
/// `G = F F^H`; pivots below `1/GRAM_CONDITION_LIMIT` of the leading pivot are
/// dropped and the minimum-norm solution `F (F^H F)^{-2} F^H b` is returned.
pub fn infer_uvc(x: &CMatrix, y: &CMatrix) -> Result<StructureFit> {
    let w = commutator(x, y)?;
    let basis = [x.clone(), y.clone(), CMatrix::identity(x.dim())];
    let mut gram = [[zero(); 3]; 3];
    let mut rhs = [zero(); 3];
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = basis[i].inner(&basis[j]);
        }
        rhs[i] = basis[i].inner(&w);
    }

    let factor = pivoted_cholesky(gram);
    let coeffs = min_norm_solve(&factor.columns, &rhs);

    let fitted =
        &(&basis[0].scale(coeffs[0]) + &basis[1].scale(coeffs[1])) + &basis[2].scale(coeffs[2]);
    let w_norm = w.frobenius();
    let fit_residual = if w_norm == 0.0 {
        0.0
    } else {
        (&w - &fitted).frobenius() / w_norm
    };
    Ok(StructureFit {
        u: coeffs[0],
        v: coeffs[1],
        c: coeffs[2],
        fit_residual,
        rank: factor.columns.len(),
        condition_estimate: factor.condition_estimate,
    })
}

struct GramFactor {
    /// Columns of `F` in the original index order.
    columns: Vec<[Scalar; 3]>,
    condition_estimate: f64,
}

fn pivoted_cholesky(mut s: [[Scalar; 3]; 3]) -> GramFactor {
    let leading = (0..3).map(|i| s[i][i].re).fold(0.0, f64::max);
    let mut remaining = vec![0usize, 1, 2];
    let mut columns = Vec::new();
    let mut last_pivot = leading;
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| s[*a.1][*a.1].re.total_cmp(&s[*b.1][*b.1].re))
            .expect("nonempty");
        let pivot = s[p][p].re;
        if pivot <= leading / GRAM_CONDITION_LIMIT {
            break;
        }
        let root = pivot.sqrt();
        let mut l = [zero(); 3];
        for &i in &remaining {
            l[i] = s[i][p] / root;
        }
        for &i in &remaining {
            for &j in &remaining {
                s[i][j] -= l[i] * l[j].conj();
            }
        }
        remaining.remove(pos);
        columns.push(l);
        last_pivot = pivot;
    }
    let condition_estimate = if columns.len() < 3 {
        f64::INFINITY
    } else {
        leading / last_pivot
    };
    GramFactor {
        columns,
        condition_estimate,
    }
}

/// `x = F M^{-1} M^{-1} F^H b` with `M = F^H F`.
fn min_norm_solve(columns: &[[Scalar; 3]], b: &[Scalar; 3]) -> [Scalar; 3] {
    let r = columns.len();
    if r == 0 {
        return [zero(); 3];
    }
    let m: Vec<Vec<Scalar>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| (0..3).map(|k| columns[i][k].conj() * columns[j][k]).sum())
                .collect()
        })
        .collect();
    let y: Vec<Scalar> = (0..r)
        .map(|i| (0..3).map(|k| columns[i][k].conj() * b[k]).sum())
        .collect();
    let z = solve_small(&m, &y);
    let w = solve_small(&m, &z);
    let mut x = [zero(); 3];
    for (col, wi) in columns.iter().zip(&w) {
        for k in 0..3 {
            x[k] += col[k] * wi;
        }
    }
    x
}

/// Gaussian elimination with partial pivoting on a small nonsingular system.
fn solve_small(a: &[Vec<Scalar>], b: &[Scalar]) -> Vec<Scalar> {
    let n = b.len();
    let mut a: Vec<Vec<Scalar>> = a.to_vec();
    let mut b = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("nonempty");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, &src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![zero(); n];
    for row in (0..n).rev() {
        let s: Scalar = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// On-disk matrix format: `{"dim": n, "re": [[...]], "im": [[...]]}`, with
/// `im` optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        check_dim(n).map_err(|_| {
            Error::MatrixFormat(format!("field \"dim\": {n} is outside 1..={MAX_DIM}"))
        })?;
        check_grid("re", &self.re, n)?;
        if let Some(im) = &self.im {
            check_grid("im", im, n)?;
        }
        let m = CMatrix::from_fn(n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |g| g[i][j]);
            Scalar::new(self.re[i][j], im)
        });
        if !m.is_finite() {
            return Err(Error::MatrixFormat("entries must be finite".into()));
        }
        Ok(m)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.dim();
        let grid = |f: fn(&Scalar) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixFile {
            dim: n,
            re: grid(|z| z.re),
            im: Some(grid(|z| z.im)),
        }
    }
}

fn check_grid(field: &str, grid: &[Vec<f64>], n: usize) -> Result<()> {
    if grid.len() != n {
        return Err(Error::MatrixFormat(format!(
            "field \"{field}\": {} rows, expected {n}",
            grid.len()
        )));
    }
    if let Some((i, row)) = grid.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::MatrixFormat(format!(
            "field \"{field}\": row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    Ok(())
}

impl CMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::MatrixFormat(e.to_string()))?;
        file.to_matrix()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile::from_matrix(self)).expect("matrix serializes")
    }
}
