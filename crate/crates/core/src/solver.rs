//! End-to-end solve: bases, assembly, least squares, evaluation and errors.

use crate::assembly::{DiscreteSystem, QuadratureRule};
use crate::basis::{build_spatial, SpatialBasis, TemporalBasis};
use crate::error::{Error, Result};
use crate::frbspline::{FractionalBSpline, DEFAULT_TAIL_TOL};
use crate::linalg::{lstsq_solve, DenseMatrix, LeastSquaresReport, LsqOperator};
use crate::problems::ProblemSpec;
use crate::quadrature::CompositeRule;

pub use crate::caputo::{caputo_oracle, caputo_oracle_with_derivative};

/// Condition estimates above this are flagged as unreliable.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub gamma: f64,
    /// Spatial spline degree.
    pub alpha: usize,
    /// Temporal fractional-spline degree.
    pub beta: f64,
    pub j: u32,
    pub s: u32,
    /// Collocation level; `s + 1` when unset.
    pub q: Option<u32>,
    pub horizon: u32,
    pub tail_tol: f64,
    /// Overrides the scanned effective support of the temporal spline.
    pub support: Option<usize>,
    pub quad_points: usize,
    pub include_ic_row: bool,
}

impl SolveConfig {
    pub fn new(gamma: f64, beta: f64, j: u32, s: u32) -> Self {
        Self {
            gamma,
            alpha: 3,
            beta,
            j,
            s,
            q: None,
            horizon: 1,
            tail_tol: DEFAULT_TAIL_TOL,
            support: None,
            quad_points: QuadratureRule::DEFAULT_POINTS,
            include_ic_row: true,
        }
    }

    pub fn collocation_level(&self) -> u32 {
        self.q.unwrap_or(self.s + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Precondition(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.beta > self.gamma - 0.5) || !self.beta.is_finite() {
            return Err(Error::Precondition(format!(
                "beta must exceed gamma - 1/2, got {}",
                self.beta
            )));
        }
        if self.collocation_level() < self.s {
            return Err(Error::InvalidLevel(format!(
                "collocation level {} below temporal level {}",
                self.collocation_level(),
                self.s
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Precondition("horizon must be positive".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Precondition("tail tolerance must be positive".into()));
        }
        if self.quad_points == 0 {
            return Err(Error::Precondition("need at least one quadrature point".into()));
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureRule {
        QuadratureRule::for_levels(self.j, self.s).with_points(self.quad_points)
    }

    pub fn spatial_basis(&self) -> Result<SpatialBasis> {
        build_spatial(self.j, self.alpha)
    }

    pub fn temporal_basis(&self) -> Result<TemporalBasis> {
        let mut spline = FractionalBSpline::with_tail_tol(self.beta, self.tail_tol)?;
        if let Some(sup) = self.support {
            spline = spline.with_support(sup)?;
        }
        TemporalBasis::from_spline(self.s, self.horizon, spline)
    }
}

/// Coefficients `Λ[k, r]` of `u(t,x) = Σ Λ[k,r] χ_r(t) φ_k(x)`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub lambda: DenseMatrix,
    pub spatial: SpatialBasis,
    pub temporal: TemporalBasis,
    pub config: SolveConfig,
}

impl Solution {
    pub fn zero(config: &SolveConfig) -> Result<Self> {
        let spatial = config.spatial_basis()?;
        let temporal = config.temporal_basis()?;
        Ok(Self {
            lambda: DenseMatrix::zeros(spatial.size(), temporal.size()),
            spatial,
            temporal,
            config: config.clone(),
        })
    }

    pub fn dof(&self) -> usize {
        self.spatial.size() * self.temporal.size()
    }

    fn check_domain(&self, t: f64, x: f64) -> Result<()> {
        if !(0.0..=self.temporal.horizon() as f64).contains(&t) {
            return Err(Error::Domain {
                value: t,
                domain: "[0, T]",
            });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            });
        }
        Ok(())
    }

    /// Temporal coefficients `c_k(t) = Σ_r Λ[k,r] D^order χ_r(t)`.
    pub fn coefficients_at(&self, t: f64, order: f64) -> Result<Vec<f64>> {
        let nr = self.temporal.size();
        let chi: Vec<f64> = (0..nr)
            .map(|idx| self.temporal.eval(self.temporal.translate(idx), t, order))
            .collect::<Result<_>>()?;
        Ok((0..self.lambda.rows())
            .map(|k| self.lambda.row(k).iter().zip(&chi).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn combine(&self, coeffs: &[f64], x: f64, deriv: bool) -> f64 {
        let loc = self.spatial.local(x);
        let size = self.spatial.size() as isize;
        let src = if deriv { &loc.derivs } else { &loc.values };
        src.iter()
            .enumerate()
            .filter_map(|(l, v)| {
                let k = loc.first + l as isize;
                (k >= 0 && k < size).then(|| v * coeffs[k as usize])
            })
            .sum()
    }

    /// `u(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> Result<f64> {
        self.check_domain(t, x)?;
        Ok(self.combine(&self.coefficients_at(t, 0.0)?, x, false))
    }

    /// `∂ₓu(t, x)`.
    pub fn evaluate_dx(&self, t: f64, x: f64) -> Result<f64> {
        self.check_domain(t, x)?;
        Ok(self.combine(&self.coefficients_at(t, 0.0)?, x, true))
    }

    /// Caputo derivative `D_t^order u(t, x)`.
    pub fn evaluate_dt(&self, t: f64, x: f64, order: f64) -> Result<f64> {
        self.check_domain(t, x)?;
        Ok(self.combine(&self.coefficients_at(t, order)?, x, false))
    }

    /// Largest `|u|` on the boundary `x ∈ {0,1}` at the collocation nodes and
    /// on the initial line `t = 0` at the spatial quadrature points.
    pub fn condition_violation(&self) -> Result<f64> {
        let q = self.config.collocation_level();
        let per_unit = 1u64 << q;
        let mut worst = 0.0f64;
        for p in 0..=per_unit * self.temporal.horizon() as u64 {
            let t = p as f64 / per_unit as f64;
            let c = self.coefficients_at(t, 0.0)?;
            worst = worst.max(self.combine(&c, 0.0, false).abs());
            worst = worst.max(self.combine(&c, 1.0, false).abs());
        }
        let c0 = self.coefficients_at(0.0, 0.0)?;
        let grid = CompositeRule::dyadic(0.0, 1.0, self.spatial.level() + 1, 4);
        for &x in &grid.points {
            worst = worst.max(self.combine(&c0, x, false).abs());
        }
        Ok(worst)
    }
}

/// Assembles and solves the collocation–Galerkin least-squares problem.
pub fn solve(problem: &ProblemSpec, config: &SolveConfig) -> Result<(Solution, LeastSquaresReport)> {
    config.validate()?;
    if problem.gamma != config.gamma {
        return Err(Error::Precondition(format!(
            "problem order {} differs from configured order {}",
            problem.gamma, config.gamma
        )));
    }
    if problem.horizon != config.horizon as f64 {
        return Err(Error::Precondition(format!(
            "problem horizon {} differs from configured horizon {}",
            problem.horizon, config.horizon
        )));
    }
    let spatial = config.spatial_basis()?;
    let temporal = config.temporal_basis()?;
    let system = DiscreteSystem::assemble(
        &spatial,
        &temporal,
        problem.forcing.as_ref(),
        config.gamma,
        config.collocation_level(),
        config.include_ic_row,
        config.quadrature(),
    )?;
    let op = system.operator()?;
    let (x, report) = lstsq_solve(LsqOperator::Kronecker(&op), &system.rhs())?;
    let lambda = DenseMatrix::from_vec(spatial.size(), temporal.size(), x)?;
    Ok((
        Solution {
            lambda,
            spatial,
            temporal,
            config: config.clone(),
        },
        report,
    ))
}

/// Error figures for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Space–time L2 error over `[0,T] × [0,1]`.
    pub l2_error: f64,
    /// Spatial L2 error at `t = T`.
    pub final_time_error: f64,
    pub dof: usize,
    pub condition_estimate: f64,
    pub residual: f64,
}

// u on a tensor grid: rows are time points, columns space points.
fn grid_values(sol: &Solution, times: &[f64], xs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let locals: Vec<_> = xs.iter().map(|&x| sol.spatial.local(x)).collect();
    let size = sol.spatial.size() as isize;
    times
        .iter()
        .map(|&t| {
            let c = sol.coefficients_at(t, 0.0)?;
            Ok(locals
                .iter()
                .map(|loc| {
                    loc.values
                        .iter()
                        .enumerate()
                        .filter_map(|(l, v)| {
                            let k = loc.first + l as isize;
                            (k >= 0 && k < size).then(|| v * c[k as usize])
                        })
                        .sum()
                })
                .collect())
        })
        .collect()
}

fn error_rules(sol: &Solution) -> (CompositeRule, CompositeRule) {
    let level = sol.spatial.level().max(sol.temporal.level()) + 1;
    let horizon = sol.temporal.horizon();
    // one dyadic level per unit of time
    let tl = level + (horizon as f64).log2().ceil() as u32;
    let time = CompositeRule::dyadic(0.0, horizon as f64, tl, 4);
    let space = CompositeRule::dyadic(0.0, 1.0, level, 4);
    (time, space)
}

/// `‖u - u_h‖` in `L2([0,T] × [0,1])`, 4-point Gauss per dyadic cell at level
/// `max(j, s) + 1` in both directions.
pub fn l2_error<E: Fn(f64, f64) -> f64>(sol: &Solution, exact: E) -> Result<f64> {
    let (time, space) = error_rules(sol);
    let u = grid_values(sol, &time.points, &space.points)?;
    let mut acc = 0.0;
    for (it, &t) in time.points.iter().enumerate() {
        let mut row = 0.0;
        for (ix, &x) in space.points.iter().enumerate() {
            row += space.weights[ix] * (exact(t, x) - u[it][ix]).powi(2);
        }
        acc += time.weights[it] * row;
    }
    Ok(acc.sqrt())
}

/// Spatial L2 error at the final time.
pub fn final_time_error<E: Fn(f64, f64) -> f64>(sol: &Solution, exact: E) -> Result<f64> {
    let (_, space) = error_rules(sol);
    let t = sol.temporal.horizon() as f64;
    let u = grid_values(sol, &[t], &space.points)?;
    Ok(space
        .points
        .iter()
        .zip(&space.weights)
        .zip(&u[0])
        .map(|((&x, &w), &v)| w * (exact(t, x) - v).powi(2))
        .sum::<f64>()
        .sqrt())
}

pub fn error_report(
    sol: &Solution,
    report: &LeastSquaresReport,
    problem: &ProblemSpec,
) -> Result<ErrorReport> {
    let exact = problem.exact.as_ref().ok_or_else(|| {
        Error::Precondition(format!("problem {} has no exact solution", problem.name))
    })?;
    Ok(ErrorReport {
        l2_error: l2_error(sol, |t, x| exact(t, x))?,
        final_time_error: final_time_error(sol, |t, x| exact(t, x))?,
        dof: sol.dof(),
        condition_estimate: report.condition_estimate,
        residual: report.residual_norm,
    })
}
