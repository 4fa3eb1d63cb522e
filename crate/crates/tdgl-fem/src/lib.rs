//! Finite element library for the time-dependent Ginzburg-Landau equations
//! under the Lorentz gauge.
//!
//! The solver advances the complex order parameter psi with a Lagrange
//! space and the pair (sigma, A) = (curl A, magnetic potential) with a
//! Lagrange/Nedelec x Raviart-Thomas saddle system, linearized backward
//! Euler in time. A conventional vector-Lagrange discretization of the same
//! equations is included as the comparison path, and manufactured problems
//! on the unit square, an L-shape and the unit cube drive convergence
//! studies.

pub mod assembly;
pub mod error;
pub mod fespace;
pub mod harness;
pub mod linsolve;
pub mod manufactured;
pub mod mesh;
pub mod tdgl;

pub use error::{Error, Result};
