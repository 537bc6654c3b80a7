//! Brute-force Caputo derivative by adaptive quadrature, used to check the
//! closed forms.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, AdaptiveOptions};
use crate::specfun::gamma;

/// `(1/Γ(1-γ)) ∫₀ᵗ f'(τ)(t-τ)^(-γ) dτ` with `f'` supplied directly.
///
/// The weak endpoint singularity is removed by `t - τ = σ^(1/(1-γ))`, which
/// turns the integral into `(1/Γ(2-γ)) ∫₀^(t^(1-γ)) f'(t - σ^(1/(1-γ))) dσ`.
pub fn caputo_oracle_with_derivative<D: Fn(f64) -> f64>(df: D, order: f64, t: f64) -> Result<f64> {
    if !(order > 0.0 && order <= 1.0) {
        return Err(Error::Precondition(format!(
            "caputo oracle needs an order in (0, 1], got {order}"
        )));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    if order == 1.0 {
        return Ok(df(t));
    }
    let p = 1.0 / (1.0 - order);
    let upper = t.powf(1.0 - order);
    let opts = AdaptiveOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 5000,
    };
    let integral = adaptive_integrate(|s| df(t - s.powf(p)), 0.0, upper, opts)?;
    Ok(integral / gamma(2.0 - order)?)
}

/// Same as [`caputo_oracle_with_derivative`], with `f'` from a five-point
/// central difference of `f`. `f` must be defined slightly outside `[0, t]`.
pub fn caputo_oracle<F: Fn(f64) -> f64>(f: F, order: f64, t: f64) -> Result<f64> {
    let h = 1e-3;
    let df = |x: f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
    caputo_oracle_with_derivative(df, order, t)
}
