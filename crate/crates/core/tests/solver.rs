use fracspline::problems::{example1, example2, ProblemSpec};
use fracspline::solver::{error_report, l2_error, solve, SolveConfig};
use fracspline::Error;

fn error_of(problem: &ProblemSpec, beta: f64, j: u32, s: u32) -> f64 {
    let (sol, _) = solve(problem, &SolveConfig::new(problem.gamma, beta, j, s)).unwrap();
    let exact = problem.exact.clone().unwrap();
    l2_error(&sol, |t, x| exact(t, x)).unwrap()
}

#[test]
fn classical_heat_equation() {
    let p = example1(1.0).unwrap();
    let e = error_of(&p, 3.5, 5, 5);
    assert!(e <= 5e-3, "{e}");
}

#[test]
fn spatial_refinement_converges_at_high_order() {
    let p = example1(0.5).unwrap();
    let errors: Vec<f64> = (3..=6).map(|j| error_of(&p, 3.5, j, 6)).collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=4.6).contains(&order), "{errors:?}");
    }
}

#[test]
fn least_squares_beats_zero_vector_and_counts_dof() {
    let p = example2(0.5).unwrap();
    for (beta, j, s) in [(3.5, 3, 4), (3.0, 4, 3), (2.5, 3, 3)] {
        let cfg = SolveConfig::new(0.5, beta, j, s);
        let (sol, rep) = solve(&p, &cfg).unwrap();
        let support = cfg.temporal_basis().unwrap().spline().effective_support();
        assert_eq!(sol.dof(), ((1 << j) + 1) * ((1 << s) + support - 1));

        let zero = fracspline::solver::Solution::zero(&cfg).unwrap();
        let r0 = error_report(&zero, &rep, &p).unwrap();
        let r = error_report(&sol, &rep, &p).unwrap();
        assert!(r.l2_error < r0.l2_error);
        assert!(rep.residual_norm >= 0.0 && rep.residual_norm.is_finite());
    }
}

#[test]
fn zero_forcing_and_boundary_values() {
    let p = ProblemSpec::zero(0.5);
    let (sol, rep) = solve(&p, &SolveConfig::new(0.5, 3.5, 3, 3)).unwrap();
    assert_eq!(rep.residual_norm, 0.0);
    assert!(sol.lambda.as_slice().iter().all(|&v| v == 0.0));

    let p = example1(0.5).unwrap();
    let (sol, _) = solve(&p, &SolveConfig::new(0.5, 3.5, 3, 4)).unwrap();
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        assert_eq!(sol.evaluate(t, 0.0).unwrap(), 0.0);
        assert_eq!(sol.evaluate(t, 1.0).unwrap(), 0.0);
    }
    assert!(matches!(sol.evaluate(1.5, 0.5), Err(Error::Domain { .. })));
    assert!(matches!(sol.evaluate(0.5, -0.1), Err(Error::Domain { .. })));
}

#[test]
fn mismatched_problem_is_rejected() {
    let p = example1(0.5).unwrap();
    assert!(solve(&p, &SolveConfig::new(0.25, 3.5, 3, 3)).is_err());
    let mut cfg = SolveConfig::new(0.5, 3.5, 3, 3);
    cfg.q = Some(2);
    assert!(solve(&p, &cfg).is_err());
}
