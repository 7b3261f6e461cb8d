//! Linearized fractional Crank-Nicolson-Galerkin finite element solver for the
//! Kirchhoff-type time-fractional integro-differential equation
//!
//!   D_t^alpha u - (1 + ||grad u||^2) Lap u = f - int_0^t Lap u(s) ds
//!
//! on the unit square with homogeneous Dirichlet data, 0 < alpha < 1.
//!
//! The time discretization combines the L2-1_sigma Caputo operator on graded
//! meshes, a two-level extrapolation of the Kirchhoff coefficient, and a
//! compound rectangle/trapezoid rule for the memory integral; space uses P1
//! elements on a structured triangulation. The first time level is nonlinear
//! and solved by a rank-one-corrected Newton iteration, every later level is a
//! single SPD solve.
//!
//! Entry points:
//! - [`time_mesh::TimeMesh`], [`caputo::caputo_row`], [`memory::memory_weights`]
//!   for the discrete operators,
//! - [`fem2d::FemSpace`] for the spatial ingredients,
//! - [`stepper::run`] to advance a full solve,
//! - [`benchmark`] for the manufactured problem and convergence tables,
//! - [`cli`] for the `solve` / `table` / `verify` commands behind the binary.
//!
//! See the crate examples for one runnable program per capability.

pub mod benchmark;
pub mod caputo;
pub mod cli;
pub mod config;
pub mod error;
pub mod fem2d;
pub mod gamma;
pub mod linalg;
pub mod memory;
pub mod quad;
pub mod stepper;
pub mod time_mesh;

pub use error::{Error, Result};
