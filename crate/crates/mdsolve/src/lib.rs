//! Two-derivative implicit time integration for 2D conservation laws.
//!
//! This crate couples a nodal discontinuous Galerkin spectral element
//! discretization on periodic Cartesian meshes with the Hermite-Birkhoff
//! predictor-corrector family of implicit two-derivative time integrators.
//! The implicit stages are solved with a matrix-free Newton-Krylov method
//! (restarted GMRES, right preconditioning) using element-wise block
//! preconditioners tailored to the extended (state, first-derivative)
//! system.
//!
//! The main building blocks:
//! - [`basis`]: Gauss-Legendre collocation data (nodes, weights, weak-form
//!   derivative operator, boundary interpolation).
//! - [`mesh`]: periodic Cartesian meshes with face connectivity.
//! - [`equations`]: linear advection, compressible Euler and Navier-Stokes
//!   fluxes and their linearizations.
//! - [`dg`]: the spatial operators for the first and second time
//!   derivatives, including BR2 lifting for viscous terms.
//! - [`time`]: Butcher tableaux, the predictor-corrector stepper and an
//!   explicit RK4 reference integrator.
//! - [`solver`]: Newton/GMRES machinery, Jacobian-vector products and the
//!   extended block-Jacobi preconditioners.
//! - [`cases`]: manufactured test cases and error norms.
//! - [`harness`]: runs, convergence and iteration studies, CSV output.

pub mod basis;
pub mod cases;
pub mod config;
pub mod dg;
pub mod equations;
pub mod field;
pub mod harness;
pub mod mesh;
pub mod solver;
pub mod time;

pub use basis::Basis;
pub use cases::TestCase;
pub use config::RunConfig;
pub use dg::DiscreteSpace;
pub use equations::EquationSystem;
pub use field::{ExtendedState, NodalField};
pub use mesh::CartesianMesh;
pub use solver::{SolveSpec, SolverConfig};
pub use time::{ButcherTableau, HbpcConfig};
