//! P1 finite elements for `-Δu + d(x, u) = f` with homogeneous Dirichlet
//! conditions on convex polygons, where `d` is monotone in `u` but may fail
//! to be Lipschitz.

pub mod analysis;
pub mod discretization;
pub mod mesh;
pub mod nonlinearity;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod cli;
pub mod config;
pub mod io;
pub mod validate;
