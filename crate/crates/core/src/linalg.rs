//! Dense real matrices, induced operator norms and spectral radius.
//!
//! Storage is row-major: `data[i * cols + j]` holds entry `(i, j)`.
//!
//! The slice kernels at the bottom of the module are what the enumeration
//! engine calls directly. [`Matrix`] methods delegate to the same kernels, so
//! a product formed through either path is bit-for-bit identical.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squarings performed by the Gelfand iteration before giving up on convergence.
const MAX_SQUARINGS: u32 = 64;

/// Relative pivot threshold below which a matrix is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-14;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl From<Matrix> for RawMatrix {
    fn from(m: Matrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting empty shapes, wrong
    /// lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidData {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
                value: data[k],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::InvalidData {
                    expected: ncols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (i, &x) in entries.iter().enumerate() {
            data[i * n + i] = x;
        }
        Self::new(n, n, data)
    }

    /// Wraps a buffer produced by a kernel. The caller guarantees the shape.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Matrix::from_parts(self.cols, self.rows, data)
    }

    pub fn scale(&self, factor: f64) -> Result<Matrix> {
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * factor).collect(),
        )
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix::new(self.rows, self.cols, data)
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        mat_mul(self, other)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = 0.0;
                for (a, b) in self.row(i).iter().zip(x) {
                    acc += a * b;
                }
                acc
            })
            .collect())
    }

    /// True when every entry is strictly greater than zero.
    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|&x| x > 0.0)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting, or `None`
    /// when a pivot falls below a relative threshold.
    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        invert(self.rows, &self.data).map(|d| Matrix::from_parts(self.rows, self.cols, d))
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        op_norm(self, kind)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Operator norms induced by vector norms on R^N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Induced by the vector max-norm: largest absolute row sum.
    #[default]
    RowSum,
    /// Induced by the vector 1-norm: largest absolute column sum.
    ColSum,
    /// Induced by the Euclidean norm: largest singular value.
    Spectral,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::RowSum, NormKind::ColSum, NormKind::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::RowSum => "row-sum",
            NormKind::ColSum => "col-sum",
            NormKind::Spectral => "spectral",
        }
    }

    /// The vector norm this operator norm is induced by.
    pub fn vector_norm(self, x: &[f64]) -> f64 {
        match self {
            NormKind::RowSum => x.iter().fold(0.0, |m, v| f64::max(m, v.abs())),
            NormKind::ColSum => x.iter().map(|v| v.abs()).sum(),
            NormKind::Spectral => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "row-sum" => Ok(NormKind::RowSum),
            "col-sum" => Ok(NormKind::ColSum),
            "spectral" => Ok(NormKind::Spectral),
            other => Err(format!(
                "unknown norm '{other}', expected row-sum, col-sum or spectral"
            )),
        }
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "mat_mul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = vec![0.0; a.rows * b.cols];
    mul_into(a.rows, a.cols, b.cols, &a.data, &b.data, &mut out);
    Ok(Matrix::from_parts(a.rows, b.cols, out))
}

pub fn op_norm(m: &Matrix, kind: NormKind) -> f64 {
    norm_of(m.rows, m.cols, &m.data, kind)
}

/// Largest eigenvalue modulus of a square matrix.
///
/// 1x1 and 2x2 inputs use the characteristic polynomial directly. Larger
/// matrices run the Gelfand iteration `M <- M^2 / |M^2|` with row-sum
/// renormalization, tracking `log(|M^(2^j)|) / 2^j` so long products never
/// overflow.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    Ok(spectral_radius_of(m.rows, &m.data))
}

/// `1 / |M^-1|` in the given induced norm, the largest `c` with
/// `|M X| >= c |X|` for every `X`. Zero for singular or non-square input.
pub fn co_norm(m: &Matrix, kind: NormKind) -> f64 {
    match m.inverse() {
        Some(inv) => {
            let n = op_norm(&inv, kind);
            if n > 0.0 && n.is_finite() {
                1.0 / n
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

// ---------------------------------------------------------------------------
// slice kernels

/// `out = a * b` with `a` of shape `r x k` and `b` of shape `k x c`.
#[inline]
pub(crate) fn mul_into(r: usize, k: usize, c: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..r {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..c {
            let mut acc = 0.0;
            for (l, &x) in arow.iter().enumerate() {
                acc += x * b[l * c + j];
            }
            out[i * c + j] = acc;
        }
    }
}

pub(crate) fn norm_of(rows: usize, cols: usize, data: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::RowSum => (0..rows)
            .map(|i| data[i * cols..(i + 1) * cols].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::ColSum => (0..cols)
            .map(|j| (0..rows).map(|i| data[i * cols + j].abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Spectral => {
            // sqrt of the largest eigenvalue of m^T m
            let mut gram = vec![0.0; cols * cols];
            for p in 0..cols {
                for q in p..cols {
                    let mut acc = 0.0;
                    for i in 0..rows {
                        acc += data[i * cols + p] * data[i * cols + q];
                    }
                    gram[p * cols + q] = acc;
                    gram[q * cols + p] = acc;
                }
            }
            spectral_radius_of(cols, &gram).sqrt()
        }
    }
}

pub(crate) fn spectral_radius_of(n: usize, data: &[f64]) -> f64 {
    match n {
        1 => data[0].abs(),
        2 => {
            let (a, b, c, d) = (data[0], data[1], data[2], data[3]);
            if b * c == 0.0 {
                // triangular: eigenvalues are the diagonal entries
                return a.abs().max(d.abs());
            }
            let half_trace = 0.5 * (a + d);
            let half_gap = 0.5 * (a - d);
            let disc = half_gap * half_gap + b * c;
            if disc >= 0.0 {
                half_trace.abs() + disc.sqrt()
            } else {
                (half_trace * half_trace - disc).sqrt()
            }
        }
        _ => gelfand(n, data),
    }
}

fn gelfand(n: usize, data: &[f64]) -> f64 {
    let tol = crate::config::Tolerances::default().iteration;
    let s0 = norm_of(n, n, data, NormKind::RowSum);
    if s0 == 0.0 {
        return 0.0;
    }
    let mut x: Vec<f64> = data.iter().map(|v| v / s0).collect();
    let mut y = vec![0.0; n * n];
    // log of the current estimate |M^(2^j)|^(1/2^j)
    let mut log_est = s0.ln();
    let mut weight = 1.0_f64;
    // A nilpotent matrix reaches zero after ceil(log2 n) squarings; checking
    // convergence before then can stop on a spurious plateau.
    let min_squarings = (usize::BITS - (n - 1).leading_zeros()) + 2;
    for j in 1..=MAX_SQUARINGS {
        mul_into(n, n, n, &x, &x, &mut y);
        let s = norm_of(n, n, &y, NormKind::RowSum);
        if s == 0.0 || !s.is_finite() {
            return 0.0;
        }
        weight *= 0.5;
        let step = s.ln() * weight;
        log_est += step;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / s;
        }
        if j >= min_squarings && step.exp_m1().abs() < tol {
            break;
        }
    }
    log_est.exp()
}

/// Gauss-Jordan inverse of an `n x n` row-major matrix.
pub(crate) fn invert(n: usize, data: &[f64]) -> Option<Vec<f64>> {
    let scale = data.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    if n == 2 {
        let (a, b, c, d) = (data[0], data[1], data[2], data[3]);
        let det = a * d - b * c;
        if det.abs() <= SINGULAR_PIVOT * scale * scale || !det.is_finite() {
            return None;
        }
        return Some(vec![d / det, -b / det, -c / det, a / det]);
    }
    let mut a = data.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .expect("non-empty range");
        let pivot = a[pivot_row * n + col];
        if pivot.abs() <= SINGULAR_PIVOT * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(pivot_row * n + k, col * n + k);
                inv.swap(pivot_row * n + k, col * n + k);
            }
        }
        for k in 0..n {
            a[col * n + k] /= pivot;
            inv[col * n + k] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f != 0.0 {
                for k in 0..n {
                    a[r * n + k] -= f * a[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    inv.iter().all(|x| x.is_finite()).then_some(inv)
}
