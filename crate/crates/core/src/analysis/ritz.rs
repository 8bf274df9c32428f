use std::sync::Arc;

use super::AnalysisError;
use crate::discretization::{apply_dirichlet, assemble_stiffness, p1_gradients, FemFunction};
use crate::mesh::{Point, TriMesh};
use crate::quadrature::QuadRule;
use crate::solver::cg_solve;

/// Relative CG tolerance used by [`ritz_project`].
pub const RITZ_CG_TOL: f64 = 1e-12;

/// `G_i = ∫ ∇u · ∇φ_i` for a function known through its gradient.
pub fn gradient_load(mesh: &TriMesh, grad: &dyn Fn(Point) -> [f64; 2], quad: &QuadRule) -> Vec<f64> {
    let mut g = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (phi, area) = p1_gradients(mesh.triangle_points(t));
        for (bary, w) in quad.iter() {
            let gu = grad(mesh.map_point(t, *bary));
            for k in 0..3 {
                g[tri[k]] += area * w * (gu[0] * phi[k][0] + gu[1] * phi[k][1]);
            }
        }
    }
    g
}

/// Ritz projection onto the Dirichlet P1 space: `(∇(u - R u), ∇φ) = 0`
/// for all discrete `φ` vanishing on the boundary.
pub fn ritz_project(
    mesh: &Arc<TriMesh>,
    grad: &dyn Fn(Point) -> [f64; 2],
    quad: &QuadRule,
) -> Result<FemFunction, AnalysisError> {
    if quad.degree() < super::norms::MIN_ERROR_QUAD_DEGREE {
        return Err(AnalysisError::QuadratureDegree {
            got: quad.degree(),
            need: super::norms::MIN_ERROR_QUAD_DEGREE,
        });
    }
    let g = gradient_load(mesh, grad, quad);
    let (a, rhs) = apply_dirichlet(assemble_stiffness(mesh), g, mesh);
    let out = cg_solve(&a, &rhs, RITZ_CG_TOL, 10 * mesh.num_vertices().max(1))?;
    Ok(FemFunction::new(Arc::clone(mesh), out.x).expect("length matches mesh"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_level, DomainPreset};

    #[test]
    fn identity_on_discrete_space() {
        let mesh = build_level(&DomainPreset::Pentagon.polygon(), 2);
        let v = (0..mesh.num_vertices()).find(|&i| !mesh.is_boundary(i)).unwrap();
        let mut hat = FemFunction::zeros(Arc::clone(&mesh));
        hat.coeffs_mut()[v] = 1.0;
        let grad = |p: Point| {
            let (t, _) = mesh.locate_point(p).unwrap();
            hat.gradient(t)
        };
        let r = ritz_project(&mesh, &grad, &QuadRule::seven_point()).unwrap();
        for (a, b) in r.coeffs().iter().zip(hat.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gradient() {
        let mesh = build_level(&DomainPreset::UnitSquare.polygon(), 2);
        let r = ritz_project(&mesh, &|_| [0.0, 0.0], &QuadRule::seven_point()).unwrap();
        assert_eq!(r.max_norm(), 0.0);
    }
}
