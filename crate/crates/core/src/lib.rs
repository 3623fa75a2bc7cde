//! Hybridisable discontinuous Galerkin (HDG) discretisation of 2D linear
//! elasticity written in Voigt notation.
//!
//! The symmetric stress is stored as a Voigt vector, so its symmetry holds by
//! construction. The crate covers the whole pipeline:
//!
//! - [`voigt`]: Voigt operators (`E_k`, `N`, `R`, `T`), the constitutive matrix
//!   `D` and its square root, and checks of the Voigt Gauss/Stokes identities.
//! - [`mesh`]: structured quadrilateral and triangular meshes, face topology.
//! - [`fespace`]: Lagrange reference elements, quadrature, isoparametric maps.
//! - [`assembly`]: element matrices, static condensation, local back-solve.
//! - [`global`]: trace DOF numbering, sparse global solve, field recovery.
//! - [`postprocess`]: element-by-element super-convergent displacement.
//! - [`manufactured`]: analytic test cases and `L2` error norms.
//! - [`harness`]: convergence, stabilisation and Poisson-ratio studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod fespace;
pub mod global;
pub mod harness;
pub mod manufactured;
pub mod mesh;
pub mod polynomial;
pub mod postprocess;
pub mod voigt;
pub mod vtk;

pub use error::{HdgError, Result};

/// 2D point / vector type used throughout the crate.
pub type Vec2 = nalgebra::Vector2<f64>;
