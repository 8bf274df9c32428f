//! Error norms against smooth or finer discrete reference solutions.
//!
//! A discrete reference must live on a uniform refinement of the mesh of
//! the approximation. The approximation is then prolongated onto the
//! reference mesh, where the difference is again P1 and its norms are
//! computed exactly (L² and H¹) or by lattice sampling (L∞).

use std::borrow::Cow;

use super::exact::ExactSolution;
use super::AnalysisError;
use crate::discretization::{p1_gradients, FemFunction};
use crate::quadrature::QuadRule;

/// Reference a discrete function is compared against.
#[derive(Clone, Copy)]
pub enum Truth<'a> {
    Exact(&'a dyn ExactSolution),
    Discrete(&'a FemFunction),
}

/// Minimum quadrature degree for errors against smooth references.
pub const MIN_ERROR_QUAD_DEGREE: usize = 4;

/// Default barycentric lattice degree for sampled maximum norms.
pub const DEFAULT_LATTICE_DEGREE: usize = 4;

fn prolongated<'a>(u_h: &'a FemFunction, reference: &FemFunction) -> Result<Cow<'a, FemFunction>, AnalysisError> {
    if std::sync::Arc::ptr_eq(u_h.mesh(), reference.mesh()) {
        return Ok(Cow::Borrowed(u_h));
    }
    Ok(Cow::Owned(u_h.prolongate(reference.mesh())?))
}

fn check_quad(quad: &QuadRule) -> Result<(), AnalysisError> {
    if quad.degree() < MIN_ERROR_QUAD_DEGREE {
        return Err(AnalysisError::QuadratureDegree { got: quad.degree(), need: MIN_ERROR_QUAD_DEGREE });
    }
    Ok(())
}

/// `‖truth - u_h‖_{L²(Ω)}`.
pub fn error_l2(u_h: &FemFunction, truth: Truth<'_>, quad: &QuadRule) -> Result<f64, AnalysisError> {
    let mut sum = 0.0;
    match truth {
        Truth::Exact(exact) => {
            check_quad(quad)?;
            let mesh = u_h.mesh();
            for t in 0..mesh.num_triangles() {
                let area = mesh.triangle_area(t);
                for (bary, w) in quad.iter() {
                    let e = exact.value(mesh.map_point(t, *bary)) - u_h.eval_in(t, *bary);
                    sum += area * w * e * e;
                }
            }
        }
        Truth::Discrete(reference) => {
            let u = prolongated(u_h, reference)?;
            let mesh = reference.mesh();
            let (a, b) = (u.coeffs(), reference.coeffs());
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let e = tri.map(|i| b[i] - a[i]);
                let s = e[0] + e[1] + e[2];
                let sq = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
                sum += mesh.triangle_area(t) / 12.0 * (sq + s * s);
            }
        }
    }
    Ok(sum.sqrt())
}

/// `‖∇(truth - u_h)‖_{L²(Ω)}`.
pub fn error_h1semi(u_h: &FemFunction, truth: Truth<'_>, quad: &QuadRule) -> Result<f64, AnalysisError> {
    let mut sum = 0.0;
    match truth {
        Truth::Exact(exact) => {
            check_quad(quad)?;
            let mesh = u_h.mesh();
            for t in 0..mesh.num_triangles() {
                let area = mesh.triangle_area(t);
                let g = u_h.gradient(t);
                for (bary, w) in quad.iter() {
                    let ge = exact.gradient(mesh.map_point(t, *bary));
                    sum += area * w * ((ge[0] - g[0]).powi(2) + (ge[1] - g[1]).powi(2));
                }
            }
        }
        Truth::Discrete(reference) => {
            let u = prolongated(u_h, reference)?;
            let mesh = reference.mesh();
            let (a, b) = (u.coeffs(), reference.coeffs());
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let (grads, area) = p1_gradients(mesh.triangle_points(t));
                let mut g = [0.0; 2];
                for k in 0..3 {
                    let e = b[tri[k]] - a[tri[k]];
                    g[0] += e * grads[k][0];
                    g[1] += e * grads[k][1];
                }
                sum += area * (g[0] * g[0] + g[1] * g[1]);
            }
        }
    }
    Ok(sum.sqrt())
}

/// Barycentric lattice `{(i, j, k) / n : i + j + k = n}`, vertices included.
pub fn barycentric_lattice(n: usize) -> Vec<[f64; 3]> {
    let n = n.max(1);
    let mut pts = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let k = n - i - j;
            pts.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
        }
    }
    pts
}

/// Sampled `max |truth - u_h|` over all vertices and a barycentric lattice
/// of degree `lattice_degree` in every triangle.
pub fn error_linf(u_h: &FemFunction, truth: Truth<'_>, lattice_degree: usize) -> Result<f64, AnalysisError> {
    if lattice_degree == 0 {
        return Err(AnalysisError::LatticeDegree);
    }
    let lattice = barycentric_lattice(lattice_degree);
    let mut worst: f64 = 0.0;
    match truth {
        Truth::Exact(exact) => {
            let mesh = u_h.mesh();
            for t in 0..mesh.num_triangles() {
                for bary in &lattice {
                    let e = exact.value(mesh.map_point(t, *bary)) - u_h.eval_in(t, *bary);
                    worst = worst.max(e.abs());
                }
            }
        }
        Truth::Discrete(reference) => {
            let u = prolongated(u_h, reference)?;
            let mesh = reference.mesh();
            for t in 0..mesh.num_triangles() {
                for bary in &lattice {
                    let e = reference.eval_in(t, *bary) - u.eval_in(t, *bary);
                    worst = worst.max(e.abs());
                }
            }
        }
    }
    Ok(worst)
}
