//! Fractional B-splines: truncated powers, generalized differences, point
//! evaluation and closed-form fractional derivatives.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::specfun::{gamma, gen_binomial};

/// Default tail tolerance. Chosen so that the degree-3.5 spline gets an
/// effective support of 10 units.
pub const DEFAULT_TAIL_TOL: f64 = 1.5e-7;

const MAX_SUPPORT: usize = 64;

/// `t_+^alpha`, with `0^0 = 1` and `0^alpha = 0` otherwise.
///
/// For negative `alpha` the value at `t = 0` is singular; it is reported as 0.
pub fn truncated_power(alpha: f64, t: f64) -> f64 {
    if t > 0.0 {
        if alpha == 0.0 {
            1.0
        } else {
            t.powf(alpha)
        }
    } else if t == 0.0 && alpha == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Weights `(-1)^k C(alpha, k)` of the generalized forward difference.
pub fn finite_diff_weights(alpha: f64, k_max: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(k_max + 1);
    let mut c = 1.0;
    w.push(c);
    for k in 1..=k_max {
        c *= -(alpha - k as f64 + 1.0) / k as f64;
        w.push(c);
    }
    w
}

/// Two-scale coefficients `2^-alpha C(alpha+1, k)`.
pub fn mask(alpha: f64, k_max: usize) -> Vec<f64> {
    let scale = 2f64.powf(-alpha);
    (0..=k_max).map(|k| scale * gen_binomial(alpha + 1.0, k)).collect()
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Causal fractional B-spline of real degree `alpha > -1/2`.
#[derive(Debug, Clone)]
pub struct FractionalBSpline {
    degree: f64,
    tail_tol: f64,
    support: usize,
    // weights (-1)^k C(alpha+1, k) up to the largest shift ever needed
    weights: Vec<f64>,
    inv_gamma: f64,
}

impl FractionalBSpline {
    pub fn new(degree: f64) -> Result<Self> {
        Self::with_tail_tol(degree, DEFAULT_TAIL_TOL)
    }

    pub fn with_tail_tol(degree: f64, tail_tol: f64) -> Result<Self> {
        if !(degree > -0.5) || !degree.is_finite() {
            return Err(Error::Precondition(format!(
                "spline degree must exceed -1/2, got {degree}"
            )));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::Precondition(format!(
                "tail tolerance must be positive, got {tail_tol}"
            )));
        }
        let weights = finite_diff_weights(degree + 1.0, 1024);
        let mut spline = Self {
            degree,
            tail_tol,
            support: MAX_SUPPORT,
            weights,
            inv_gamma: 1.0 / gamma(degree + 1.0)?,
        };
        spline.support = spline.scan_support();
        Ok(spline)
    }

    /// Same spline with a prescribed support length instead of the scanned one.
    pub fn with_support(mut self, support: usize) -> Result<Self> {
        let min = self.degree.ceil().max(0.0) as usize + 1;
        if support < min {
            return Err(Error::Precondition(format!(
                "support {support} shorter than {min}"
            )));
        }
        self.support = support;
        Ok(self)
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Smallest integer `S` with `|B(t)| < tail_tol` for `t > S`.
    pub fn effective_support(&self) -> usize {
        self.support
    }

    fn scan_support(&self) -> usize {
        if is_integer(self.degree) {
            return self.degree as usize + 1;
        }
        let start = self.degree.ceil() as usize + 1;
        'outer: for s in start..MAX_SUPPORT {
            for window in s..(s + 12).min(MAX_SUPPORT) {
                for i in 0..=50 {
                    let t = window as f64 + i as f64 / 50.0;
                    if (self.raw_sum(0.0, t) * self.inv_gamma).abs() >= self.tail_tol {
                        continue 'outer;
                    }
                }
            }
            return s;
        }
        MAX_SUPPORT
    }

    fn weight(&self, k: usize) -> f64 {
        match self.weights.get(k) {
            Some(&w) => w,
            None => {
                let c = gen_binomial(self.degree + 1.0, k);
                if k % 2 == 0 {
                    c
                } else {
                    -c
                }
            }
        }
    }

    /// `sum_k w_k (t-k)_+^(alpha-order)`, without normalization.
    fn raw_sum(&self, order: f64, t: f64) -> f64 {
        let e = self.degree - order;
        let mut kmax = t.floor() as usize;
        if is_integer(self.degree) {
            kmax = kmax.min(self.degree as usize + 1);
        }
        let mut acc = 0.0;
        for k in 0..=kmax {
            acc += self.weight(k) * truncated_power(e, t - k as f64);
        }
        acc
    }

    /// `B_alpha(t)`. Zero for `t < 0` and beyond the effective support.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || (t == 0.0 && self.degree != 0.0) || t > self.support as f64 {
            return 0.0;
        }
        self.raw_sum(0.0, t) * self.inv_gamma
    }

    fn check_order(&self, order: f64) -> Result<()> {
        if !(order > 0.0) || !(order < self.degree + 0.5) {
            return Err(Error::Precondition(format!(
                "derivative order {order} outside (0, {})",
                self.degree + 0.5
            )));
        }
        Ok(())
    }

    /// `D^order B_alpha(t) = Δ^(alpha+1) t_+^(alpha-order) / Γ(alpha-order+1)`.
    ///
    /// The whole-line derivative. It is not cut at the effective support: for
    /// non-integer orders it decays only algebraically.
    pub fn frac_derivative(&self, order: f64, t: f64) -> Result<f64> {
        self.check_order(order)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        if is_integer(self.degree) && is_integer(order) && t >= self.degree + 1.0 {
            return Ok(0.0);
        }
        let e = self.degree - order;
        Ok(self.raw_sum(order, t) / gamma(e + 1.0)?)
    }

    /// Caputo derivative with lower terminal `-offset` in the spline's own
    /// variable, i.e. of `t ↦ B(t + offset)` from 0, evaluated at `v - offset`.
    ///
    /// For `offset = 0` this equals [`frac_derivative`](Self::frac_derivative).
    /// Otherwise the part of the spline lying before the terminal is removed:
    /// `D^γB(v) - [B(a)(v-a)^-γ - γ∫_0^a B(u)(v-u)^(-γ-1) du] / Γ(1-γ)`.
    pub fn caputo_derivative(&self, order: f64, v: f64, offset: f64) -> Result<f64> {
        self.check_order(order)?;
        if v <= offset {
            return Ok(0.0);
        }
        let whole = self.frac_derivative(order, v)?;
        if offset <= 0.0 || is_integer(order) {
            return Ok(whole);
        }
        if order > 1.0 {
            return Err(Error::Precondition(format!(
                "caputo derivative with a shifted terminal needs order <= 1, got {order}"
            )));
        }
        Ok(whole - self.prehistory(order, v, offset)?)
    }

    fn prehistory(&self, order: f64, v: f64, a: f64) -> Result<f64> {
        let rule = GaussLegendre::new(20);
        let kernel = |u: f64| (v - u).powf(-order - 1.0);
        let gap = v - a;
        let mut integral = 0.0;
        let cells = a.ceil() as usize;
        for c in 0..cells {
            let lo = c as f64;
            let hi = (lo + 1.0).min(a);
            let width = hi - lo;
            // u = lo + w^2 smooths the (u - lo)^alpha onset at the knot.
            let smooth_cell = |x0: f64, x1: f64| -> f64 {
                let (w0, w1) = ((x0 - lo).sqrt(), (x1 - lo).sqrt());
                rule.integrate(w0, w1, |w| {
                    let u = lo + w * w;
                    2.0 * w * self.eval(u) * kernel(u)
                })
            };
            if hi < a || gap >= width {
                integral += smooth_cell(lo, hi);
                continue;
            }
            // Grade geometrically toward the near-singular end u = a.
            let mut right = hi;
            let mut len = 0.5 * width;
            let mut pieces = Vec::new();
            while len > 0.25 * gap {
                pieces.push((right - len, right));
                right -= len;
                len *= 0.5;
            }
            integral += smooth_cell(lo, right);
            for (x0, x1) in pieces {
                integral += rule.integrate(x0, x1, |u| self.eval(u) * kernel(u));
            }
        }
        let boundary = self.eval(a) * (v - a).powf(-order);
        Ok((boundary - order * integral) / gamma(1.0 - order)?)
    }
}
