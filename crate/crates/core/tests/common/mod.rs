//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use fracspline::frbspline::FractionalBSpline;
use fracspline::quadrature::{adaptive_integrate, AdaptiveOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twofloat::TwoFloat;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// `₁F₁(a; b; z)` by the plain power series in double-double arithmetic,
/// summed until terms drop below 1e-34 relative.
pub fn kummer_dd(a: f64, b: f64, z_re: f64, z_im: f64) -> (TwoFloat, TwoFloat) {
    let (zr, zi) = (dd(z_re), dd(z_im));
    let (mut tr, mut ti) = (dd(1.0), dd(0.0));
    let (mut sr, mut si) = (dd(1.0), dd(0.0));
    for k in 0..2000 {
        let kf = k as f64;
        let c = (dd(a) + dd(kf)) / ((dd(b) + dd(kf)) * dd(kf + 1.0));
        let nr = (tr * zr - ti * zi) * c;
        let ni = (tr * zi + ti * zr) * c;
        tr = nr;
        ti = ni;
        sr += tr;
        si += ti;
        let tn = f64::from(tr).abs() + f64::from(ti).abs();
        let sn = f64::from(sr).abs() + f64::from(si).abs();
        if kf > z_re.hypot(z_im) && tn < 1e-34 * sn {
            break;
        }
    }
    (sr, si)
}

/// `B_alpha(t)` for half-integer `alpha` in double-double: the finite sum
/// with `(t-k)^alpha = (t-k)^floor(alpha) sqrt(t-k)` and
/// `Γ(alpha+1) = alpha (alpha-1) ... (1/2) sqrt(π)`.
pub fn half_integer_bspline_dd(alpha: f64, t: f64) -> f64 {
    assert_eq!(alpha.fract(), 0.5);
    if t <= 0.0 {
        return 0.0;
    }
    let n = alpha.floor() as i32;
    let mut g = twofloat::consts::PI.sqrt();
    let mut f = dd(0.5);
    while f64::from(f) <= alpha {
        g *= f;
        f += dd(1.0);
    }
    let mut w = dd(1.0);
    let mut acc = dd(0.0);
    let mut k = 0usize;
    while (k as f64) < t {
        let d = dd(t) - dd(k as f64);
        acc += w * d.powi(n) * d.sqrt();
        k += 1;
        w = -w * (dd(alpha + 1.0) - dd(k as f64) + dd(1.0)) / dd(k as f64);
    }
    f64::from(acc / g)
}

/// Least-squares solution from the normal equations `AᵀA x = Aᵀb`, formed and
/// solved (Gaussian elimination, partial pivoting) in double-double.
pub fn normal_equations_dd(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a[0].len();
    let mut m = vec![vec![dd(0.0); n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = dd(0.0);
            for r in 0..a.len() {
                s += dd(a[r][i]) * dd(a[r][j]);
            }
            m[i][j] = s;
        }
        let mut s = dd(0.0);
        for r in 0..a.len() {
            s += dd(a[r][i]) * dd(b[r]);
        }
        m[i][n] = s;
    }
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| f64::from(m[x][c]).abs().total_cmp(&f64::from(m[y][c]).abs()))
            .unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                let v = m[c][k];
                m[r][k] -= f * v;
            }
        }
    }
    let mut x = vec![dd(0.0); n];
    for c in (0..n).rev() {
        let mut s = m[c][n];
        for k in c + 1..n {
            s -= m[c][k] * x[k];
        }
        x[c] = s / m[c][c];
    }
    x.into_iter().map(f64::from).collect()
}

/// Derivative of a function that is smooth between integer knots, by a
/// fourth-order five-point stencil kept inside the piece containing `x`.
pub fn piecewise_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let below = x - x.floor();
    let above = x.floor() + 1.0 - x;
    if below >= 2.0 * h && above >= 2.0 * h {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    } else if above >= 4.0 * h || below < above {
        (-25.0 * f(x) + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h) + 16.0 * f(x + 3.0 * h)
            - 3.0 * f(x + 4.0 * h))
            / (12.0 * h)
    } else {
        (25.0 * f(x) - 48.0 * f(x - h) + 36.0 * f(x - 2.0 * h) - 16.0 * f(x - 3.0 * h)
            + 3.0 * f(x - 4.0 * h))
            / (12.0 * h)
    }
}

fn gamma_ref(x: f64) -> f64 {
    // Stirling series after shifting the argument past 12.
    let mut y = x;
    let mut prod = 1.0;
    while y < 12.0 {
        prod *= y;
        y += 1.0;
    }
    let ln = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * y)
        - 1.0 / (360.0 * y.powi(3))
        + 1.0 / (1260.0 * y.powi(5))
        - 1.0 / (1680.0 * y.powi(7));
    ln.exp() / prod
}

/// `(1/Γ(1-γ)) ∫₀ᵗ f'(τ)(t-τ)^(-γ) dτ` where `f'` may jump at the points in
/// `breaks`. Each smooth piece is mapped by `t - τ = σ^(1/(1-γ))` and
/// integrated adaptively.
pub fn caputo_reference<D: Fn(f64) -> f64>(df: D, gamma: f64, t: f64, breaks: &[f64]) -> f64 {
    let p = 1.0 / (1.0 - gamma);
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < t).collect();
    knots.push(0.0);
    knots.push(t);
    knots.sort_by(f64::total_cmp);
    let opts = AdaptiveOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (lo, hi) = ((t - w[1]).powf(1.0 - gamma), (t - w[0]).powf(1.0 - gamma));
        let width = w[1] - w[0];
        // evaluate f' strictly inside the piece
        let inner = |s: f64| {
            let tau = (t - s.powf(p)).clamp(w[0] + 1e-12 * width, w[1] - 1e-12 * width);
            df(tau)
        };
        total += adaptive_integrate(inner, lo, hi, opts).expect("reference quadrature");
    }
    total / gamma_ref(2.0 - gamma)
}

/// Caputo derivative (terminal 0) of `τ ↦ B(scale τ - shift)` from the
/// spline's values only, with a kink-aware numerical derivative.
pub fn caputo_of_translate(spline: &FractionalBSpline, scale: f64, shift: f64, gamma: f64, t: f64) -> f64 {
    let b = |u: f64| spline.eval(u);
    let h = 1e-3;
    let df = |tau: f64| scale * piecewise_derivative(&b, scale * tau - shift, h);
    let breaks: Vec<f64> = (-80..200).map(|k| (k as f64 + shift) / scale).collect();
    caputo_reference(df, gamma, t, &breaks)
}

pub fn uniform(r: &mut StdRng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}

/// Prints the criterion line and returns the flag for the assertion.
pub fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}
