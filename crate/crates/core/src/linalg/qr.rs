use super::{rank_tolerance, DenseMatrix};
use crate::error::{Error, Result};

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    // column-major; R on and above the diagonal, reflector tails below
    packed: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

pub(crate) struct Reflector {
    pub beta: f64,
    pub tau: f64,
}

/// Turns `x` into the Householder vector (implicit leading 1) and returns
/// `beta` (the new leading entry) and `tau`, so that
/// `(I - tau v vᵀ) x = beta e₁`.
pub(crate) fn make_reflector(x: &mut [f64]) -> Reflector {
    let alpha = x[0];
    let tail: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail == 0.0 {
        return Reflector { beta: alpha, tau: 0.0 };
    }
    let norm = (alpha * alpha + tail).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = 1.0;
    Reflector {
        beta,
        tau: (beta - alpha) / beta,
    }
}

/// `y ← (I - tau v vᵀ) y` where `v[0]` is taken as 1.
#[inline]
pub(crate) fn apply_reflector(v: &[f64], tau: f64, y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let mut w = y[0];
    for (a, b) in v[1..].iter().zip(&y[1..]) {
        w += a * b;
    }
    let s = tau * w;
    y[0] -= s;
    for (a, b) in v[1..].iter().zip(&mut y[1..]) {
        *b -= s * a;
    }
}

impl PivotedQr {
    pub fn factor(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let mut packed = vec![0.0; m * n];
        for j in 0..n {
            for i in 0..m {
                packed[j * m + i] = a[(i, j)];
            }
        }
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n)
            .map(|j| packed[j * m..(j + 1) * m].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut reference = norms.clone();

        for k in 0..steps {
            let p = (k..n)
                .max_by(|&x, &y| norms[x].total_cmp(&norms[y]))
                .expect("non-empty range");
            if p != k {
                for i in 0..m {
                    packed.swap(k * m + i, p * m + i);
                }
                perm.swap(k, p);
                norms.swap(k, p);
                reference.swap(k, p);
            }
            let (head, rest) = packed.split_at_mut((k + 1) * m);
            let v = &mut head[k * m + k..(k + 1) * m];
            let refl = make_reflector(v);
            tau[k] = refl.tau;
            for j in k + 1..n {
                let col = &mut rest[(j - k - 1) * m + k..(j - k) * m];
                apply_reflector(v, refl.tau, col);
                // downdate the partial column norm, recomputing on cancellation
                let r = col[0];
                let t = 1.0 - (r / norms[j].max(f64::MIN_POSITIVE)).powi(2);
                let t = t.max(0.0);
                if t * (norms[j] / reference[j].max(f64::MIN_POSITIVE)).powi(2) <= 1e-8 {
                    let nn = col[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    norms[j] = nn;
                    reference[j] = nn;
                } else {
                    norms[j] *= t.sqrt();
                }
            }
            v[0] = refl.beta;
        }
        Self {
            rows: m,
            cols: n,
            packed,
            tau,
            perm,
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|k| self.packed[k * self.rows + k])
            .collect()
    }

    /// Upper-trapezoidal factor `R` (`min(m,n) × n`).
    pub fn r(&self) -> DenseMatrix {
        let k = self.rows.min(self.cols);
        DenseMatrix::from_fn(k, self.cols, |i, j| {
            if i <= j {
                self.packed[j * self.rows + i]
            } else {
                0.0
            }
        })
    }

    /// `Qᵀ y` in place.
    pub fn apply_qt(&self, y: &mut [f64]) {
        let m = self.rows;
        let mut v = vec![0.0; m];
        for k in 0..self.tau.len() {
            v[k] = 1.0;
            v[k + 1..m].copy_from_slice(&self.packed[k * m + k + 1..(k + 1) * m]);
            apply_reflector(&v[k..], self.tau[k], &mut y[k..]);
        }
    }

    /// Thin orthogonal factor `Q` (`m × min(m,n)`).
    pub fn q(&self) -> DenseMatrix {
        let m = self.rows;
        let k = m.min(self.cols);
        let mut q = DenseMatrix::zeros(m, k);
        let mut v = vec![0.0; m];
        for c in 0..k {
            let mut e = vec![0.0; m];
            e[c] = 1.0;
            for s in (0..self.tau.len()).rev() {
                v[s] = 1.0;
                v[s + 1..m].copy_from_slice(&self.packed[s * m + s + 1..(s + 1) * m]);
                apply_reflector(&v[s..], self.tau[s], &mut e[s..]);
            }
            for r in 0..m {
                q[(r, c)] = e[r];
            }
        }
        q
    }

    /// Basic least-squares solution: columns whose pivot falls below the rank
    /// tolerance are set to zero.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side of length {} for {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let m = self.rows;
        let mut y = rhs.to_vec();
        self.apply_qt(&mut y);
        let diag = self.r_diagonal();
        let tol = rank_tolerance(self.rows, self.cols, &diag);
        let steps = diag.len();
        let mut z = vec![0.0; self.cols];
        for k in (0..steps).rev() {
            if diag[k].abs() <= tol {
                continue;
            }
            let mut s = y[k];
            for j in k + 1..steps {
                s -= self.packed[j * m + k] * z[j];
            }
            z[k] = s / diag[k];
        }
        let mut x = vec![0.0; self.cols];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        Ok(x)
    }
}
