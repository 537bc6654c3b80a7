//! Library values against independently computed references.

mod common;

use std::f64::consts::PI;

use common::{caputo_of_translate, caputo_reference, half_integer_bspline_dd, kummer_dd, normal_equations_dd, rng};
use fracspline::assembly::{assemble_collocation, assemble_load, assemble_stiffness, QuadratureRule};
use fracspline::basis::{build_spatial, build_temporal};
use fracspline::frbspline::{FractionalBSpline, DEFAULT_TAIL_TOL};
use fracspline::linalg::{lstsq_solve, DenseMatrix, LsqOperator, PivotedQr};
use fracspline::problems::{caputo_sin_pi, example1};
use fracspline::solver::{solve, SolveConfig};
use fracspline::specfun::{kummer_1f1, ComplexValue};
use rand::Rng;

#[test]
fn kummer_matches_extended_precision_series() {
    // ₁F₁(1; 3/2; iπ/2), summed in double-double
    let frozen = (4.382_591_473_903_548_2e-1, 7.798_934_003_768_227_5e-1);
    let got = kummer_1f1(1.0, 1.5, ComplexValue::new(0.0, PI / 2.0)).unwrap();
    assert!((got.re - frozen.0).abs() < 1e-14, "{}", got.re);
    assert!((got.im - frozen.1).abs() < 1e-14, "{}", got.im);

    for (a, b, zr, zi) in [(1.0, 1.25, 0.0, 3.0), (0.5, 2.5, -4.0, 1.0), (2.0, 1.75, 1.5, -6.0)] {
        let (wr, wi) = kummer_dd(a, b, zr, zi);
        let (wr, wi) = (f64::from(wr), f64::from(wi));
        let got = kummer_1f1(a, b, ComplexValue::new(zr, zi)).unwrap();
        let scale = wr.hypot(wi).max(1.0);
        assert!((got.re - wr).abs() < 1e-12 * scale, "{a} {b} {zr} {zi}");
        assert!((got.im - wi).abs() < 1e-12 * scale, "{a} {b} {zr} {zi}");
    }
}

#[test]
fn half_integer_spline_matches_extended_precision() {
    let b = FractionalBSpline::new(3.5).unwrap();
    for (t, want) in [
        (0.5, 7.598_900_579_074_908_26e-3),
        (1.25, 1.847_106_303_574_941_60e-1),
        (2.0, 5.857_864_168_316_981_87e-1),
        (3.7, 3.903_416_873_865_253_60e-2),
        (5.5, -1.020_764_589_370_017_00e-5),
    ] {
        assert!((b.eval(t) - want).abs() < 1e-13, "t={t}");
    }
    for i in 0..=120 {
        let t = i as f64 * 0.05;
        let want = half_integer_bspline_dd(3.5, t);
        assert!((b.eval(t) - want).abs() < 1e-12, "t={t}: {} vs {want}", b.eval(t));
    }
}

#[test]
fn half_derivative_matches_quadrature() {
    let b = FractionalBSpline::new(3.5).unwrap();
    for t in [0.5, 1.0, 2.0, 3.0, 4.4] {
        let want = caputo_of_translate(&b, 1.0, 0.0, 0.5, t);
        let got = b.frac_derivative(0.5, t).unwrap();
        assert!((got - want).abs() < 1e-7, "t={t}: {got} vs {want}");
    }
}

#[test]
fn cubic_space_reproduces_quadratic() {
    // x(1-x) lies in the space; interpolation must be exact and its energy
    // ∫ (1-2x)² = 1/3.
    let basis = build_spatial(3, 3).unwrap();
    let n = basis.size();
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let a = DenseMatrix::from_fn(n, n, |i, k| basis.eval(k, nodes[i], 0).unwrap());
    let rhs: Vec<f64> = nodes.iter().map(|x| x * (1.0 - x)).collect();
    let c = PivotedQr::factor(&a).solve(&rhs).unwrap();
    let mut r = rng(11);
    for _ in 0..20 {
        let x: f64 = r.gen_range(0.0..1.0);
        let u: f64 = (0..n).map(|k| c[k] * basis.eval(k, x, 0).unwrap()).sum();
        assert!((u - x * (1.0 - x)).abs() < 1e-10, "x={x}");
    }
    let l = assemble_stiffness(&basis, QuadratureRule::for_levels(3, 3)).unwrap();
    let lc = l.matvec(&c).unwrap();
    let energy: f64 = c.iter().zip(&lc).map(|(a, b)| a * b).sum();
    assert!((energy - 1.0 / 3.0).abs() < 1e-10, "{energy}");
}

#[test]
fn load_vector_matches_fine_trapezoid() {
    let p = example1(0.5).unwrap();
    let basis = build_spatial(3, 3).unwrap();
    let load = assemble_load(&basis, &*p.forcing, 1.0, QuadratureRule::for_levels(3, 3)).unwrap();
    let n = 1_000_000;
    let h = 1.0 / n as f64;
    for (k, &got) in load.iter().enumerate() {
        let g = |x: f64| (p.forcing)(1.0, x).unwrap() * basis.eval(k, x, 0).unwrap();
        let inner: f64 = (1..n).map(|i| g(i as f64 * h)).sum();
        let want = h * (inner + 0.5 * (g(0.0) + g(1.0)));
        assert!((got - want).abs() < 1e-9, "k={k}: {got} vs {want}");
    }
}

#[test]
fn collocation_columns_match_quadrature() {
    let (s, q, gamma) = (2, 3, 0.5);
    let tbasis = build_temporal(s, 3.5, 1, DEFAULT_TAIL_TOL).unwrap();
    let col = assemble_collocation(&tbasis, gamma, q, false).unwrap();
    let scale = (1u32 << s) as f64;
    for (p, &t) in col.nodes.iter().enumerate() {
        for idx in 0..tbasis.size() {
            let r = tbasis.translate(idx);
            let want = caputo_of_translate(tbasis.spline(), scale, r as f64, gamma, t);
            let got = col.a[(p, idx)];
            assert!((got - want).abs() < 1e-6, "t={t} r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut r = rng(50);
    let rows: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..20).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let b: Vec<f64> = (0..50).map(|_| r.gen_range(-1.0..1.0)).collect();
    let a = DenseMatrix::from_rows(&rows).unwrap();
    let (x, rep) = lstsq_solve(LsqOperator::Dense(&a), &b).unwrap();
    assert_eq!(rep.rank, 20);
    let want = normal_equations_dd(&rows, &b);
    for (u, v) in x.iter().zip(&want) {
        assert!((u - v).abs() < 1e-8, "{u} vs {v}");
    }
}

#[test]
fn example1_point_value() {
    let p = example1(0.5).unwrap();
    let (sol, _) = solve(&p, &SolveConfig::new(0.5, 3.5, 6, 6)).unwrap();
    // t² sin(2πx) at (1/2, 1/4)
    let u = sol.evaluate(0.5, 0.25).unwrap();
    assert!((u - 0.25).abs() < 2e-3, "{u}");
}

#[test]
fn caputo_of_sine_matches_quadrature() {
    for gamma in [0.25, 0.5, 0.75] {
        for t in [0.1, 0.4, 0.75, 1.0] {
            let want = caputo_reference(|tau| PI * (PI * tau).cos(), gamma, t, &[]);
            let got = caputo_sin_pi(gamma, t).unwrap();
            assert!((got - want).abs() < 1e-8, "gamma={gamma} t={t}: {got} vs {want}");
        }
    }
}
