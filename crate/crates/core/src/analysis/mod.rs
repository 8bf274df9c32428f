//! Error measurement, Ritz projection and convergence studies.

mod eoc;
mod exact;
mod norms;
mod ritz;
mod study;

pub use eoc::{eoc, eoc_log_corrected};
pub use exact::{sine_product_rhs, ExactFn, ExactSolution, SineProduct};
pub use norms::{
    barycentric_lattice, error_h1semi, error_l2, error_linf, Truth, DEFAULT_LATTICE_DEGREE, MIN_ERROR_QUAD_DEGREE,
};
pub use ritz::{gradient_load, ritz_project, RITZ_CG_TOL};
pub use study::{
    run_convergence_study, LevelRecord, Problem, Reference, ReferenceKind, SourceFn, StudyError, StudyReport,
    CSV_HEADER,
};

use thiserror::Error;

use crate::mesh::MeshError;
use crate::solver::{CgError, SolveError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("quadrature degree {got} is below the required {need}")]
    QuadratureDegree { got: usize, need: usize },
    #[error("lattice degree must be at least 1")]
    LatticeDegree,
    #[error(transparent)]
    Cg(#[from] CgError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("level range is empty")]
    EmptyLevels,
    #[error("a fine-grid reference needs at least one extra refinement, got {0}")]
    ReferenceTooCoarse(usize),
}
