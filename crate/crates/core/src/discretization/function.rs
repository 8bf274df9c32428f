use std::sync::Arc;

use super::AssemblyError;
use crate::mesh::{MeshError, Point, TriMesh};

/// Continuous piecewise-linear function given by its nodal values.
#[derive(Debug, Clone)]
pub struct FemFunction {
    mesh: Arc<TriMesh>,
    coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn new(mesh: Arc<TriMesh>, coeffs: Vec<f64>) -> Result<Self, AssemblyError> {
        if coeffs.len() != mesh.num_vertices() {
            return Err(AssemblyError::LengthMismatch { expected: mesh.num_vertices(), got: coeffs.len() });
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: Arc<TriMesh>) -> Self {
        let n = mesh.num_vertices();
        Self { mesh, coeffs: vec![0.0; n] }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Sets all boundary values to zero, projecting into the Dirichlet space.
    pub fn zero_boundary(&mut self) {
        for (c, &b) in self.coeffs.iter_mut().zip(self.mesh.boundary_flags()) {
            if b {
                *c = 0.0;
            }
        }
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        self.coeffs.iter().zip(self.mesh.boundary_flags()).all(|(c, &b)| !b || *c == 0.0)
    }

    /// Maximum nodal magnitude, which is the sup norm of a P1 function.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Value inside triangle `t` at the given barycentric coordinates.
    pub fn eval_in(&self, t: usize, bary: [f64; 3]) -> f64 {
        let tri = self.mesh.triangles()[t];
        bary[0] * self.coeffs[tri[0]] + bary[1] * self.coeffs[tri[1]] + bary[2] * self.coeffs[tri[2]]
    }

    /// Value at an arbitrary point of the domain.
    pub fn eval_at(&self, p: Point) -> Result<f64, MeshError> {
        let (t, bary) = self.mesh.locate_point(p)?;
        Ok(self.eval_in(t, bary))
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let (grads, _) = super::p1_gradients(self.mesh.triangle_points(t));
        let tri = self.mesh.triangles()[t];
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += self.coeffs[tri[k]] * grads[k][0];
            g[1] += self.coeffs[tri[k]] * grads[k][1];
        }
        g
    }

    /// The same function expressed on a uniformly refined descendant mesh.
    ///
    /// Nested P1 spaces make this exact: every new vertex is an edge
    /// midpoint, so its value is the mean of the two edge end values.
    pub fn prolongate(&self, fine: &Arc<TriMesh>) -> Result<FemFunction, MeshError> {
        let chain = fine.lineage_from(&self.mesh)?;
        let mut coeffs = self.coeffs.clone();
        for mesh in chain {
            coeffs.reserve(mesh.midpoint_parents().len());
            for &[a, b] in mesh.midpoint_parents() {
                let v = 0.5 * (coeffs[a] + coeffs[b]);
                coeffs.push(v);
            }
            debug_assert_eq!(coeffs.len(), mesh.num_vertices());
        }
        Ok(FemFunction { mesh: Arc::clone(fine), coeffs })
    }

    /// Pointwise linear combination `self + alpha * other` on a shared mesh.
    pub fn axpy(&self, alpha: f64, other: &FemFunction) -> Result<FemFunction, AssemblyError> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) {
            return Err(AssemblyError::MeshMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + alpha * b).collect();
        Ok(FemFunction { mesh: Arc::clone(&self.mesh), coeffs })
    }
}

/// Nodal interpolant of `g`. Boundary values are kept as evaluated.
pub fn interpolate(mesh: &Arc<TriMesh>, g: impl Fn(Point) -> f64) -> Result<FemFunction, AssemblyError> {
    let mut coeffs = Vec::with_capacity(mesh.num_vertices());
    for &x in mesh.vertices() {
        let v = g(x);
        if !v.is_finite() {
            return Err(AssemblyError::NonFiniteSource { x, value: v });
        }
        coeffs.push(v);
    }
    Ok(FemFunction { mesh: Arc::clone(mesh), coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_level, DomainPreset};
    use std::f64::consts::PI;

    #[test]
    fn interpolation_reproduces_affine() {
        let mesh = build_level(&DomainPreset::Pentagon.polygon(), 2);
        let g = |p: Point| 0.3 + 2.0 * p[0] - 1.5 * p[1];
        let u = interpolate(&mesh, g).unwrap();
        for p in [[0.2, 0.1], [0.77, 0.31], [0.4, 0.8]] {
            assert!((u.eval_at(p).unwrap() - g(p)).abs() < 1e-14);
        }
        for t in 0..mesh.num_triangles() {
            let gr = u.gradient(t);
            assert!((gr[0] - 2.0).abs() < 1e-13 && (gr[1] + 1.5).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolation_basic_values() {
        let mesh = build_level(&DomainPreset::UnitSquare.polygon(), 1);
        assert_eq!(interpolate(&mesh, |_| 0.0).unwrap().max_norm(), 0.0);
        let s = interpolate(&mesh, |p| (PI * p[0]).sin() * (PI * p[1]).sin()).unwrap();
        assert_eq!(s.eval_at([0.5, 0.5]).unwrap(), 1.0);
        assert!(interpolate(&mesh, |p| 1.0 / p[0]).is_err());
    }

    #[test]
    fn hat_prolongation() {
        let coarse = build_level(&DomainPreset::UnitSquare.polygon(), 1);
        let fine = Arc::new(coarse.refine_uniform());
        let v = 4; // centroid of the level-0 fan, interior
        let mut hat = FemFunction::zeros(Arc::clone(&coarse));
        hat.coeffs_mut()[v] = 1.0;
        let p = hat.prolongate(&fine).unwrap();
        let incident: Vec<[usize; 2]> = coarse.edges().into_iter().filter(|e| e.contains(&v)).collect();
        for (i, &c) in p.coeffs().iter().enumerate() {
            let expected = if i == v {
                1.0
            } else if i >= coarse.num_vertices()
                && incident.contains(&fine.midpoint_parents()[i - coarse.num_vertices()])
            {
                0.5
            } else {
                0.0
            };
            assert_eq!(c, expected, "vertex {i}");
        }
        let zero = FemFunction::zeros(Arc::clone(&coarse)).prolongate(&fine).unwrap();
        assert_eq!(zero.max_norm(), 0.0);
    }

    #[test]
    fn prolongation_rejects_foreign_mesh() {
        let a = build_level(&DomainPreset::UnitSquare.polygon(), 1);
        let b = build_level(&DomainPreset::UnitSquare.polygon(), 2);
        assert_eq!(FemFunction::zeros(a).prolongate(&b).unwrap_err(), MeshError::NotNested);
    }
}
