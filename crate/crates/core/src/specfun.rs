//! Special functions: Euler gamma, generalized binomial coefficients and the
//! Kummer confluent hypergeometric series.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex argument/value type used by [`kummer_1f1`].
pub type ComplexValue = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's gamma function.
///
/// Lanczos approximation (g = 7, nine coefficients) for `x >= 0.5` and the
/// reflection formula below that. Non-positive integers are poles.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            value: x,
            domain: "finite reals",
        });
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole {
            function: "gamma",
            at: x,
        });
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Generalized binomial coefficient `C(alpha, k) = Γ(α+1) / (k! Γ(α−k+1))`.
///
/// Evaluated by the product recurrence `C(α,k) = C(α,k−1)·(α−k+1)/k`, which
/// stays finite (and exactly zero past `k = α`) for integer `alpha`.
pub fn gen_binomial(alpha: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 1..=k {
        c *= (alpha - (i as f64) + 1.0) / i as f64;
    }
    c
}

/// Settings for the `₁F₁` power series.
#[derive(Debug, Clone, Copy)]
pub struct KummerOptions {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub max_abs_z: f64,
}

impl Default for KummerOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 500,
            max_abs_z: 50.0,
        }
    }
}

/// Kummer's confluent hypergeometric function `₁F₁(a; b; z)` by direct series
/// summation with default options.
pub fn kummer_1f1(a: f64, b: f64, z: ComplexValue) -> Result<ComplexValue> {
    kummer_1f1_with(a, b, z, KummerOptions::default())
}

/// `₁F₁(a; b; z)` with explicit series settings.
pub fn kummer_1f1_with(
    a: f64,
    b: f64,
    z: ComplexValue,
    opts: KummerOptions,
) -> Result<ComplexValue> {
    if b <= 0.0 && b == b.floor() {
        return Err(Error::Pole {
            function: "kummer_1f1",
            at: b,
        });
    }
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > opts.max_abs_z {
        return Err(Error::Domain {
            value: z.norm(),
            domain: "|z| <= max_abs_z",
        });
    }

    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let peak = z.norm();
    for k in 0..opts.max_terms {
        let kf = k as f64;
        term = term * z * ((a + kf) / ((b + kf) * (kf + 1.0)));
        sum += term;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        // Terms may grow until k ~ |z|; only test past the peak.
        if kf + 1.0 > peak && term.norm() <= opts.rel_tol * sum.norm() {
            if !(sum.re.is_finite() && sum.im.is_finite()) {
                return Err(Error::NonFinite("kummer_1f1"));
            }
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        function: "kummer_1f1",
        iterations: opts.max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-11);
        let r = gamma(4.5).unwrap() / gamma(2.5).unwrap();
        assert!((r - 8.75).abs() < 1e-12);
    }

    #[test]
    fn gamma_negative_arguments() {
        // Γ(−0.5) = −2√π
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-12);
        // Γ(−9.5) = Γ(0.5) / ∏_{i=0}^{9}(−9.5+i)
        let mut denom = 1.0;
        for i in 0..10 {
            denom *= -9.5 + i as f64;
        }
        let expect = PI.sqrt() / denom;
        assert!(((gamma(-9.5).unwrap() - expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma(x), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn gamma_large_argument() {
        // Γ(30) = 29!
        let mut f = 1.0f64;
        for i in 2..30 {
            f *= i as f64;
        }
        assert!(((gamma(30.0).unwrap() - f) / f).abs() < 1e-12);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(gen_binomial(3.0, 2), 3.0);
        assert_eq!(gen_binomial(2.7, 0), 1.0);
        assert!((gen_binomial(3.5, 2) - 4.375).abs() < 1e-15);
        assert_eq!(gen_binomial(3.0, 5), 0.0);
    }

    #[test]
    fn kummer_reduces_to_exponential() {
        let v = kummer_1f1(1.0, 1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
        let z = Complex64::new(0.3, -2.0);
        let v = kummer_1f1(1.0, 1.0, z).unwrap();
        assert!((v - z.exp()).norm() < 1e-13);
    }

    #[test]
    fn kummer_at_origin() {
        let v = kummer_1f1(0.7, 1.3, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn kummer_errors() {
        let z = Complex64::new(1.0, 0.0);
        assert!(matches!(kummer_1f1(1.0, -2.0, z), Err(Error::Pole { .. })));
        assert!(matches!(
            kummer_1f1(1.0, 1.5, Complex64::new(60.0, 0.0)),
            Err(Error::Domain { .. })
        ));
        let opts = KummerOptions {
            max_terms: 5,
            ..KummerOptions::default()
        };
        assert!(matches!(
            kummer_1f1_with(1.0, 1.5, Complex64::new(0.0, 10.0), opts),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn kummer_terminating_series() {
        // a = −2 gives the polynomial 1 − 2z/b + z²/(b(b+1)).
        let b = 1.5;
        let z = Complex64::new(0.4, 0.9);
        let expect = 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0));
        let v = kummer_1f1(-2.0, b, z).unwrap();
        assert!((v - expect).norm() < 1e-15);
    }
}
