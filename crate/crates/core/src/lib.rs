//! Fractional-spline collocation in time and cubic-spline Galerkin in space
//! for the time-fractional diffusion equation
//! `D_t^γ u - u_xx = f` on `[0,T] × [0,1]` with homogeneous data.

pub mod assembly;
pub mod basis;
pub mod caputo;
pub mod cli;
pub mod error;
pub mod frbspline;
pub mod linalg;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
