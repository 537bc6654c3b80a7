//! Manufactured-solution test problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{gamma, kummer_1f1};

pub type ForcingFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `D_t^γ u - u_xx = f` on `[0,T] × [0,1]` with zero initial and boundary data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub gamma: f64,
    pub horizon: f64,
    pub forcing: ForcingFn,
    pub exact: Option<ExactFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("gamma", &self.gamma)
            .field("horizon", &self.horizon)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>, gamma: f64, forcing: ForcingFn) -> Self {
        Self {
            name: name.into(),
            gamma,
            horizon: 1.0,
            forcing,
            exact: None,
        }
    }

    pub fn with_exact(mut self, exact: ExactFn) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Homogeneous problem; its solution is zero.
    pub fn zero(gamma: f64) -> Self {
        Self::new("zero", gamma, Arc::new(|_, _| Ok(0.0))).with_exact(Arc::new(|_, _| 0.0))
    }
}

/// `u = t² sin(2πx)`.
pub fn example1(order: f64) -> Result<ProblemSpec> {
    if !(order > 0.0 && order <= 1.0) {
        return Err(Error::Precondition(format!(
            "order must lie in (0, 1], got {order}"
        )));
    }
    let c = 2.0 / gamma(3.0 - order)?;
    let k2 = 4.0 * PI * PI;
    let forcing: ForcingFn = Arc::new(move |t, x| {
        let sx = (2.0 * PI * x).sin();
        Ok(c * t.powf(2.0 - order) * sx + k2 * t * t * sx)
    });
    Ok(ProblemSpec::new("example1", order, forcing)
        .with_exact(Arc::new(|t, x| t * t * (2.0 * PI * x).sin())))
}

/// Caputo derivative of `sin(πt)`:
/// `π t^(1-γ) / Γ(2-γ) · Re ₁F₁(1; 2-γ; iπt)`.
pub fn caputo_sin_pi(order: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let b = 2.0 - order;
    let h = kummer_1f1(1.0, b, Complex64::new(0.0, PI * t))?;
    Ok(PI * t.powf(1.0 - order) / (2.0 * gamma(b)?) * (2.0 * h.re))
}

/// `u = sin(πt) sin(πx)`.
pub fn example2(order: f64) -> Result<ProblemSpec> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::Precondition(format!(
            "order must lie in (0, 1), got {order}"
        )));
    }
    let forcing: ForcingFn = Arc::new(move |t, x| {
        let sx = (PI * x).sin();
        Ok(caputo_sin_pi(order, t)? * sx + PI * PI * (PI * t).sin() * sx)
    });
    Ok(ProblemSpec::new("example2", order, forcing)
        .with_exact(Arc::new(|t, x| (PI * t).sin() * (PI * x).sin())))
}
