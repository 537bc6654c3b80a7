//! Spatial Dirichlet spline basis on `[0,1]` and temporal fractional-spline
//! translates on `[0,T]`.

use crate::error::{Error, Result};
use crate::frbspline::FractionalBSpline;

/// Splines of degree `n` on the uniform grid `h = 2^-j` that vanish at both
/// ends of `[0,1]`.
///
/// Built from the clamped (open-knot) B-spline family: the interior members
/// are the dyadic translates `B_n(2^j x - k)` and the boundary members are the
/// fixed combinations of cut translates that the open knot vector produces.
/// The first and last clamped functions, the only ones nonzero at an endpoint,
/// are dropped, leaving `2^j + n - 2` functions.
#[derive(Debug, Clone)]
pub struct SpatialBasis {
    level: u32,
    degree: usize,
    cells: usize,
    knots: Vec<f64>,
}

pub fn build_spatial(j: u32, n: usize) -> Result<SpatialBasis> {
    if n < 1 {
        return Err(Error::Precondition("spatial degree must be at least 1".into()));
    }
    if j > 24 || (1usize << j) < 2 * n {
        return Err(Error::InvalidLevel(format!(
            "level {j} gives too few cells for degree {n}"
        )));
    }
    let cells = 1usize << j;
    let mut knots = vec![0.0; n];
    knots.extend((0..=cells).map(|i| i as f64 / cells as f64));
    knots.extend(std::iter::repeat(1.0).take(n));
    Ok(SpatialBasis {
        level: j,
        degree: n,
        cells,
        knots,
    })
}

/// Nonzero basis values at a point: reduced index of the first entry plus
/// values and first derivatives. Entries whose index falls outside the
/// reduced basis are to be skipped by the caller.
#[derive(Debug, Clone)]
pub struct LocalValues {
    pub first: isize,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl SpatialBasis {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> usize {
        self.cells + self.degree - 2
    }

    pub fn mesh_width(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Support `[lo, hi]` of function `k`.
    pub fn support(&self, k: usize) -> (f64, f64) {
        let m = k + 1;
        (self.knots[m], self.knots[m + self.degree + 1])
    }

    /// Is function `k` an unmodified dyadic translate `B_n(2^j x - shift)`?
    /// Returns the shift if so.
    pub fn interior_shift(&self, k: usize) -> Option<usize> {
        let m = k + 1;
        (m >= self.degree && m < self.cells).then(|| m - self.degree)
    }

    fn span(&self, x: f64) -> usize {
        let c = ((x * self.cells as f64).floor() as usize).min(self.cells - 1);
        c + self.degree
    }

    // Cox-de Boor values of all degree-p functions nonzero on knot span `i`.
    fn basis_funs(&self, i: usize, x: f64, p: usize) -> Vec<f64> {
        let u = &self.knots;
        let mut out = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        out[0] = 1.0;
        for d in 1..=p {
            left[d] = x - u[i + 1 - d];
            right[d] = u[i + d] - x;
            let mut saved = 0.0;
            for r in 0..d {
                let tmp = out[r] / (right[r + 1] + left[d - r]);
                out[r] = saved + right[r + 1] * tmp;
                saved = left[d - r] * tmp;
            }
            out[d] = saved;
        }
        out
    }

    /// Values and derivatives of the `n+1` functions nonzero at `x ∈ [0,1]`.
    pub fn local(&self, x: f64) -> LocalValues {
        let n = self.degree;
        let i = self.span(x);
        let values = self.basis_funs(i, x, n);
        let lower = self.basis_funs(i, x, n - 1);
        let u = &self.knots;
        let nf = n as f64;
        let derivs = (0..=n)
            .map(|l| {
                let m = i - n + l;
                let mut d = 0.0;
                if l >= 1 {
                    let den = u[m + n] - u[m];
                    if den > 0.0 {
                        d += nf * lower[l - 1] / den;
                    }
                }
                if l < n {
                    let den = u[m + n + 1] - u[m + 1];
                    if den > 0.0 {
                        d -= nf * lower[l] / den;
                    }
                }
                d
            })
            .collect();
        LocalValues {
            first: (i - n) as isize - 1,
            values,
            derivs,
        }
    }

    /// `φ_k(x)` (`deriv = 0`) or `φ_k'(x)` (`deriv = 1`).
    pub fn eval(&self, k: usize, x: f64, deriv: u8) -> Result<f64> {
        if k >= self.size() {
            return Err(Error::IndexOutOfRange {
                index: k as i64,
                len: self.size(),
            });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            });
        }
        if deriv > 1 {
            return Err(Error::Precondition(format!(
                "only derivative orders 0 and 1 are available, got {deriv}"
            )));
        }
        let loc = self.local(x);
        let offset = k as isize - loc.first;
        if offset < 0 || offset as usize > self.degree {
            return Ok(0.0);
        }
        let src = if deriv == 0 { &loc.values } else { &loc.derivs };
        Ok(src[offset as usize])
    }
}

/// Dilated translates `χ_r(t) = B_β(2^s t - r)` restricted to `[0,T]`, for
/// `r_min <= r <= r_max` with `r_max = 2^s T - 1` and `r_min = -(S-1)`.
#[derive(Debug, Clone)]
pub struct TemporalBasis {
    level: u32,
    horizon: u32,
    spline: FractionalBSpline,
    r_min: i64,
    r_max: i64,
}

pub fn build_temporal(s: u32, beta: f64, horizon: u32, tail_tol: f64) -> Result<TemporalBasis> {
    let spline = FractionalBSpline::with_tail_tol(beta, tail_tol)?;
    TemporalBasis::from_spline(s, horizon, spline)
}

impl TemporalBasis {
    pub fn from_spline(s: u32, horizon: u32, spline: FractionalBSpline) -> Result<Self> {
        if s > 24 {
            return Err(Error::InvalidLevel(format!("temporal level {s} too large")));
        }
        if horizon == 0 {
            return Err(Error::Precondition("time horizon must be positive".into()));
        }
        let support = spline.effective_support() as i64;
        Ok(Self {
            level: s,
            horizon,
            r_min: -(support - 1),
            r_max: (1i64 << s) * horizon as i64 - 1,
            spline,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn spline(&self) -> &FractionalBSpline {
        &self.spline
    }

    pub fn translate_range(&self) -> (i64, i64) {
        (self.r_min, self.r_max)
    }

    pub fn size(&self) -> usize {
        (self.r_max - self.r_min + 1) as usize
    }

    /// Translate of the function stored at position `idx`.
    pub fn translate(&self, idx: usize) -> i64 {
        self.r_min + idx as i64
    }

    fn scale(&self) -> f64 {
        (1u64 << self.level) as f64
    }

    /// `χ_r(t)` for `order = 0`, otherwise the Caputo derivative of `χ_r` with
    /// lower terminal 0. Translates starting before 0 have their pre-history
    /// removed, so the value differs from `2^(sγ) D^γB(2^s t - r)` for `r < 0`.
    pub fn eval(&self, r: i64, t: f64, order: f64) -> Result<f64> {
        if r < self.r_min || r > self.r_max {
            return Err(Error::IndexOutOfRange {
                index: r - self.r_min,
                len: self.size(),
            });
        }
        if !(0.0..=self.horizon as f64).contains(&t) {
            return Err(Error::Domain {
                value: t,
                domain: "[0, T]",
            });
        }
        let v = self.scale() * t - r as f64;
        if order == 0.0 {
            return Ok(self.spline.eval(v));
        }
        let offset = (-r).max(0) as f64;
        let d = self.spline.caputo_derivative(order, v, offset)?;
        Ok(self.scale().powf(order) * d)
    }
}

/// Free-function form of [`SpatialBasis::eval`].
pub fn eval_spatial(basis: &SpatialBasis, k: usize, x: f64, deriv: u8) -> Result<f64> {
    basis.eval(k, x, deriv)
}

/// Free-function form of [`TemporalBasis::eval`].
pub fn eval_temporal(basis: &TemporalBasis, r: i64, t: f64, order: f64) -> Result<f64> {
    basis.eval(r, t, order)
}
