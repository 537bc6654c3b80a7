//! Mass, stiffness and load assembly in space; collocation matrices in time.

use std::io::Write;

use rayon::prelude::*;

use crate::basis::{LocalValues, SpatialBasis, TemporalBasis};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, KroneckerSystem};
use crate::quadrature::CompositeRule;

/// Composite Gauss–Legendre on the dyadic cells of `[0,1]` at `cell_level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub points_per_cell: usize,
    pub cell_level: u32,
}

impl QuadratureRule {
    pub const DEFAULT_POINTS: usize = 8;

    /// Default rule for a discretization at space level `j` and time level `s`.
    pub fn for_levels(j: u32, s: u32) -> Self {
        Self {
            points_per_cell: Self::DEFAULT_POINTS,
            cell_level: j.max(s) + 2,
        }
    }

    pub fn with_points(self, points_per_cell: usize) -> Self {
        Self {
            points_per_cell,
            ..self
        }
    }
}

/// Basis values at every quadrature point, reusable across load evaluations.
#[derive(Debug, Clone)]
pub struct SpatialSamples {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub local: Vec<LocalValues>,
    size: usize,
}

impl SpatialSamples {
    pub fn new(basis: &SpatialBasis, quad: QuadratureRule) -> Result<Self> {
        if quad.points_per_cell == 0 {
            return Err(Error::Precondition("quadrature needs at least one point".into()));
        }
        if quad.cell_level < basis.level() {
            return Err(Error::InvalidLevel(format!(
                "quadrature level {} coarser than the spline grid {}",
                quad.cell_level,
                basis.level()
            )));
        }
        let rule = CompositeRule::dyadic(0.0, 1.0, quad.cell_level, quad.points_per_cell);
        let local = rule.points.iter().map(|&x| basis.local(x)).collect();
        Ok(Self {
            points: rule.points,
            weights: rule.weights,
            local,
            size: basis.size(),
        })
    }

    // (reduced index, value, derivative) of the functions alive at point q
    fn alive(&self, q: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let loc = &self.local[q];
        let size = self.size as isize;
        (0..loc.values.len()).filter_map(move |l| {
            let k = loc.first + l as isize;
            (k >= 0 && k < size).then(|| (k as usize, loc.values[l], loc.derivs[l]))
        })
    }

    fn gram(&self, deriv: bool) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.size, self.size);
        for q in 0..self.points.len() {
            let w = self.weights[q];
            let alive: Vec<_> = self.alive(q).collect();
            for &(k, vk, dk) in &alive {
                for &(i, vi, di) in &alive {
                    m[(k, i)] += w * if deriv { dk * di } else { vk * vi };
                }
            }
        }
        m
    }

    /// `∫ f(x) φ_k(x) dx` for all `k`.
    pub fn project<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.size];
        for q in 0..self.points.len() {
            let fx = f(self.points[q])?;
            if fx == 0.0 {
                continue;
            }
            if !fx.is_finite() {
                return Err(Error::NonFinite("forcing function"));
            }
            let w = self.weights[q] * fx;
            for (k, v, _) in self.alive(q) {
                out[k] += w * v;
            }
        }
        Ok(out)
    }
}

/// `∫₀¹ φ_k φ_i`.
pub fn assemble_mass(basis: &SpatialBasis, quad: QuadratureRule) -> Result<DenseMatrix> {
    Ok(SpatialSamples::new(basis, quad)?.gram(false))
}

/// `∫₀¹ φ_k' φ_i'`.
pub fn assemble_stiffness(basis: &SpatialBasis, quad: QuadratureRule) -> Result<DenseMatrix> {
    Ok(SpatialSamples::new(basis, quad)?.gram(true))
}

/// Forcing term signature: `f(t, x)`.
pub type Forcing<'a> = dyn Fn(f64, f64) -> Result<f64> + Send + Sync + 'a;

/// `∫₀¹ f(t, x) φ_k(x) dx` at a fixed time.
pub fn assemble_load(
    basis: &SpatialBasis,
    f: &Forcing<'_>,
    t: f64,
    quad: QuadratureRule,
) -> Result<Vec<f64>> {
    SpatialSamples::new(basis, quad)?.project(|x| f(t, x))
}

/// Time-collocation matrices and their nodes.
#[derive(Debug, Clone)]
pub struct Collocation {
    /// `D^γ χ_r(t_p)`
    pub a: DenseMatrix,
    /// `χ_r(t_p)`
    pub g: DenseMatrix,
    pub nodes: Vec<f64>,
    /// Row 0 is the initial-condition row at `t = 0`.
    pub ic_row: bool,
}

/// Rows at `t_p = p / 2^q`, `p = 1..=2^q T`, optionally preceded by a row at
/// `t = 0` that carries only the values (its derivative row is zero).
pub fn assemble_collocation(
    tbasis: &TemporalBasis,
    gamma: f64,
    q: u32,
    include_ic_row: bool,
) -> Result<Collocation> {
    let degree = tbasis.spline().degree();
    if !(gamma > 0.0 && gamma < degree + 0.5) {
        return Err(Error::Precondition(format!(
            "derivative order {gamma} outside (0, {})",
            degree + 0.5
        )));
    }
    if q > 24 {
        return Err(Error::InvalidLevel(format!("collocation level {q} too large")));
    }
    let per_unit = 1u64 << q;
    let count = per_unit * tbasis.horizon() as u64;
    let mut nodes: Vec<f64> = Vec::with_capacity(count as usize + 1);
    if include_ic_row {
        nodes.push(0.0);
    }
    nodes.extend((1..=count).map(|p| p as f64 / per_unit as f64));
    let nr = tbasis.size();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_iter()
        .enumerate()
        .map(|(row, &t)| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut a = vec![0.0; nr];
            let mut g = vec![0.0; nr];
            for (idx, (ar, gr)) in a.iter_mut().zip(g.iter_mut()).enumerate() {
                let r = tbasis.translate(idx);
                *gr = tbasis.eval(r, t, 0.0)?;
                if !(include_ic_row && row == 0) {
                    *ar = tbasis.eval(r, t, gamma)?;
                }
            }
            Ok((a, g))
        })
        .collect::<Result<_>>()?;
    let np = nodes.len();
    let (a, g): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(Collocation {
        a: DenseMatrix::from_vec(np, nr, a.concat())?,
        g: DenseMatrix::from_vec(np, nr, g.concat())?,
        nodes,
        ic_row: include_ic_row,
    })
}

/// All operators of the discrete problem.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub mass: DenseMatrix,
    pub stiffness: DenseMatrix,
    pub collocation: Collocation,
    /// `n_x × n_p`; the initial-condition column (if any) is zero.
    pub load: DenseMatrix,
}

impl DiscreteSystem {
    pub fn assemble(
        sbasis: &SpatialBasis,
        tbasis: &TemporalBasis,
        f: &Forcing<'_>,
        gamma: f64,
        q: u32,
        include_ic_row: bool,
        quad: QuadratureRule,
    ) -> Result<Self> {
        let samples = SpatialSamples::new(sbasis, quad)?;
        let mass = samples.gram(false);
        let stiffness = samples.gram(true);
        let collocation = assemble_collocation(tbasis, gamma, q, include_ic_row)?;
        let columns: Vec<Vec<f64>> = collocation
            .nodes
            .par_iter()
            .enumerate()
            .map(|(p, &t)| {
                if include_ic_row && p == 0 {
                    Ok(vec![0.0; sbasis.size()])
                } else {
                    samples.project(|x| f(t, x))
                }
            })
            .collect::<Result<_>>()?;
        let np = columns.len();
        let load = DenseMatrix::from_fn(sbasis.size(), np, |k, p| columns[p][k]);
        Ok(Self {
            mass,
            stiffness,
            collocation,
            load,
        })
    }

    /// `M ⊗ A + L ⊗ G`, rows ordered (space, time) with time fastest.
    pub fn operator(&self) -> Result<KroneckerSystem> {
        KroneckerSystem::new(vec![
            (self.mass.clone(), self.collocation.a.clone()),
            (self.stiffness.clone(), self.collocation.g.clone()),
        ])
    }

    /// Load flattened in the operator's row order.
    pub fn rhs(&self) -> Vec<f64> {
        self.load.as_slice().to_vec()
    }
}

/// Writes nonzero entries as `row col value` lines.
pub fn write_triplets<W: Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:e}")?;
            }
        }
    }
    Ok(())
}
