//! Dense matrices, Kronecker products and least-squares solvers.

mod kron_lsq;
mod qr;

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub use kron_lsq::BlockBandedQr;
pub use qr::PivotedQr;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Wraps row-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::from_vec"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch("matrix sum".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { data, ..*self })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..*self
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Largest `|i - j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self[(i, j)] != 0.0 {
                    b = b.max(i.abs_diff(j));
                }
            }
        }
        b
    }

    /// Cholesky factorization succeeds, i.e. the matrix is numerically
    /// symmetric positive definite.
    pub fn is_positive_definite(&self) -> bool {
        if self.rows != self.cols || !self.is_symmetric(1e-12 * self.frobenius_norm()) {
            return false;
        }
        let n = self.rows;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Materialized Kronecker product `outer ⊗ inner`.
pub fn kron(outer: &DenseMatrix, inner: &DenseMatrix) -> DenseMatrix {
    let (p, q) = inner.shape();
    DenseMatrix::from_fn(outer.rows * p, outer.cols * q, |i, j| {
        outer[(i / p, j / q)] * inner[(i % p, j % q)]
    })
}

/// `(outer ⊗ inner) vec(X)` without forming the product.
///
/// `x` is `outer.cols × inner.cols` and its row-major flattening is the
/// vector (outer index slow, inner index fast). The result is
/// `outer · X · innerᵀ`, again read row-major.
pub fn kron_apply(outer: &DenseMatrix, inner: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.rows != outer.cols || x.cols != inner.cols {
        return Err(Error::ShapeMismatch(format!(
            "coefficients {}x{} against factors with {} and {} columns",
            x.rows, x.cols, outer.cols, inner.cols
        )));
    }
    outer.matmul(&x.matmul(&inner.transpose())?)
}

/// `Σ_t outer_t ⊗ inner_t`, kept in factored form.
#[derive(Debug, Clone)]
pub struct KroneckerSystem {
    terms: Vec<(DenseMatrix, DenseMatrix)>,
}

impl KroneckerSystem {
    pub fn new(terms: Vec<(DenseMatrix, DenseMatrix)>) -> Result<Self> {
        let Some((o0, i0)) = terms.first() else {
            return Err(Error::ShapeMismatch("empty Kronecker sum".into()));
        };
        if terms
            .iter()
            .any(|(o, i)| o.shape() != o0.shape() || i.shape() != i0.shape())
        {
            return Err(Error::ShapeMismatch("Kronecker terms differ in shape".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(DenseMatrix, DenseMatrix)] {
        &self.terms
    }

    pub fn outer_shape(&self) -> (usize, usize) {
        self.terms[0].0.shape()
    }

    pub fn inner_shape(&self) -> (usize, usize) {
        self.terms[0].1.shape()
    }

    pub fn rows(&self) -> usize {
        self.outer_shape().0 * self.inner_shape().0
    }

    pub fn cols(&self) -> usize {
        self.outer_shape().1 * self.inner_shape().1
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, oc) = self.outer_shape();
        let (_, ic) = self.inner_shape();
        let xm = DenseMatrix::from_vec(oc, ic, x.to_vec())?;
        let mut out: Option<DenseMatrix> = None;
        for (o, i) in &self.terms {
            let y = kron_apply(o, i, &xm)?;
            out = Some(match out {
                None => y,
                Some(acc) => acc.add(&y)?,
            });
        }
        Ok(out.expect("at least one term").into_vec())
    }

    pub fn materialize(&self) -> DenseMatrix {
        let mut acc = DenseMatrix::zeros(self.rows(), self.cols());
        for (o, i) in &self.terms {
            acc = acc.add(&kron(o, i)).expect("shapes checked on construction");
        }
        acc
    }
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresReport {
    pub residual_norm: f64,
    /// Ratio of the largest to the smallest `|R_ii|`.
    pub condition_estimate: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Operator accepted by [`lstsq_solve`].
#[derive(Debug, Clone, Copy)]
pub enum LsqOperator<'a> {
    Dense(&'a DenseMatrix),
    Kronecker(&'a KroneckerSystem),
}

fn residual(op: LsqOperator<'_>, x: &[f64], rhs: &[f64]) -> Result<f64> {
    let ax = match op {
        LsqOperator::Dense(a) => a.matvec(x)?,
        LsqOperator::Kronecker(k) => k.apply(x)?,
    };
    Ok(ax.iter().zip(rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// Minimizes `‖op·x − rhs‖₂` with Householder QR and column pivoting.
///
/// Kronecker systems whose outer factors are banded and whose inner factors
/// have at least as many rows as columns are factored block by block without
/// materializing the product; anything else goes through the dense solver.
/// Columns with a negligible pivot are dropped (set to zero) and flagged.
pub fn lstsq_solve(op: LsqOperator<'_>, rhs: &[f64]) -> Result<(Vec<f64>, LeastSquaresReport)> {
    let (rows, x, diag) = match op {
        LsqOperator::Dense(a) => {
            check_rhs(a.rows(), rhs)?;
            let qr = PivotedQr::factor(a);
            (a.rows(), qr.solve(rhs)?, qr.r_diagonal())
        }
        LsqOperator::Kronecker(k) => {
            check_rhs(k.rows(), rhs)?;
            if BlockBandedQr::applicable(k) {
                let qr = BlockBandedQr::factor(k, rhs)?;
                (k.rows(), qr.solution(), qr.r_diagonal().to_vec())
            } else {
                let a = k.materialize();
                let qr = PivotedQr::factor(&a);
                (a.rows(), qr.solve(rhs)?, qr.r_diagonal())
            }
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lstsq_solve"));
    }
    let cols = x.len();
    let tol = rank_tolerance(rows, cols, &diag);
    let rank = diag.iter().filter(|d| d.abs() > tol).count();
    let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let dmin = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let condition_estimate = if diag.is_empty() {
        1.0
    } else if dmin == 0.0 {
        f64::INFINITY
    } else {
        dmax / dmin
    };
    let report = LeastSquaresReport {
        residual_norm: residual(op, &x, rhs)?,
        condition_estimate,
        rank,
        rank_deficient: rank < cols,
    };
    Ok((x, report))
}

fn check_rhs(rows: usize, rhs: &[f64]) -> Result<()> {
    if rhs.len() != rows {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side of length {} for {rows} rows",
            rhs.len()
        )));
    }
    Ok(())
}

/// Pivots at or below this magnitude are treated as zero.
pub(crate) fn rank_tolerance(rows: usize, cols: usize, diag: &[f64]) -> f64 {
    let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    rows.max(cols) as f64 * f64::EPSILON * dmax
}
