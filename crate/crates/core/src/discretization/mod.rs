//! P1 finite element operators.
//!
//! Everything here works on the full (unconstrained) vertex numbering.
//! Dirichlet conditions are imposed afterwards by [`apply_dirichlet`].

mod assembly;
mod function;

pub use assembly::{
    apply_dirichlet, assemble_load, assemble_mass, assemble_nonlinear_residual, assemble_slope_matrix,
    assemble_stiffness, p1_gradients, slope_weight, NEGATIVE_SLOPE_TOL,
};
pub use function::{interpolate, FemFunction};

use thiserror::Error;

use crate::mesh::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("source term is not finite at ({}, {}): {value}", x[0], x[1])]
    NonFiniteSource { x: Point, value: f64 },
    #[error("nonlinearity is not finite at ({}, {}) for u = {u}: {value}", x[0], x[1])]
    NonFiniteNonlinearity { x: Point, u: f64, value: f64 },
    #[error("negative slope weight {weight:e} at ({}, {}): nonlinearity is not monotone", x[0], x[1])]
    NegativeSlope { x: Point, weight: f64 },
    #[error("coefficient vector has length {got}, mesh has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("functions live on different meshes")]
    MeshMismatch,
}
