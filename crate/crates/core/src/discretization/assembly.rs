use super::{AssemblyError, FemFunction};
use crate::mesh::{Point, TriMesh};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::QuadRule;
use crate::sparse::SparseMatrix;

/// Slope weights below this are treated as rounding noise and clamped to
/// zero; anything more negative means the nonlinearity is not monotone.
pub const NEGATIVE_SLOPE_TOL: f64 = 1e-12;

/// Gradients of the three barycentric basis functions and the triangle area.
pub fn p1_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        g[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    (g, 0.5 * det)
}

/// Laplacian stiffness matrix, exact for P1.
pub fn assemble_stiffness(mesh: &TriMesh) -> SparseMatrix {
    let mut a = SparseMatrix::p1_pattern(mesh);
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(mesh.triangle_points(t));
        let mut local = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                local[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
        a.add_element(tri, &local);
    }
    a
}

/// Consistent P1 mass matrix, `area/12 * [[2,1,1],[1,2,1],[1,1,2]]` per element.
pub fn assemble_mass(mesh: &TriMesh) -> SparseMatrix {
    let mut m = SparseMatrix::p1_pattern(mesh);
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let mut local = [[area / 12.0; 3]; 3];
        for (k, row) in local.iter_mut().enumerate() {
            row[k] = area / 6.0;
        }
        m.add_element(tri, &local);
    }
    m
}

/// `F_i = ∫ f φ_i`, by `quad` on every element.
pub fn assemble_load(
    mesh: &TriMesh,
    f: impl Fn(Point) -> f64,
    quad: &QuadRule,
) -> Result<Vec<f64>, AssemblyError> {
    let mut out = vec![0.0; mesh.num_vertices()];
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for (bary, w) in quad.iter() {
            let x = mesh.map_point(t, *bary);
            let v = f(x);
            if !v.is_finite() {
                return Err(AssemblyError::NonFiniteSource { x, value: v });
            }
            for k in 0..3 {
                out[tri[k]] += area * w * v * bary[k];
            }
        }
    }
    Ok(out)
}

/// `N_i = ∫ d(x, u_h(x)) φ_i`, with `u_h` interpolated at the quadrature points.
pub fn assemble_nonlinear_residual<D: Nonlinearity + ?Sized>(
    mesh: &TriMesh,
    d: &D,
    u: &FemFunction,
    quad: &QuadRule,
) -> Result<Vec<f64>, AssemblyError> {
    check_len(mesh, u)?;
    let mut out = vec![0.0; mesh.num_vertices()];
    let c = u.coeffs();
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let ul = [c[tri[0]], c[tri[1]], c[tri[2]]];
        for (bary, w) in quad.iter() {
            let x = mesh.map_point(t, *bary);
            let uq = bary[0] * ul[0] + bary[1] * ul[1] + bary[2] * ul[2];
            let v = d.eval(x, uq);
            if !v.is_finite() {
                return Err(AssemblyError::NonFiniteNonlinearity { x, u: uq, value: v });
            }
            for k in 0..3 {
                out[tri[k]] += area * w * v * bary[k];
            }
        }
    }
    Ok(out)
}

/// Floored difference quotient `(d(x,u) - d(x,v)) / (sgn(u-v) max(|u-v|, floor))`.
///
/// Zero when `u == v`. Can be slightly negative through rounding; callers
/// decide what to do with that.
pub fn slope_weight<D: Nonlinearity + ?Sized>(d: &D, x: Point, u: f64, v: f64, floor: f64) -> f64 {
    let e = u - v;
    if e == 0.0 {
        return 0.0;
    }
    (d.eval(x, u) - d.eval(x, v)) / (e.signum() * e.abs().max(floor))
}

/// Mass matrix weighted by the floored difference quotient of `d` between
/// `u` and `v`.
///
/// The quotient is evaluated at the quadrature points. Where it varies
/// strongly inside an element the local matrix can lose diagonal dominance;
/// its diagonal is then raised to the off-diagonal row sum. This only adds
/// a nonnegative diagonal, keeps the matrix symmetric positive semidefinite
/// and changes nothing when the quotient is constant on the element.
pub fn assemble_slope_matrix<D: Nonlinearity + ?Sized>(
    mesh: &TriMesh,
    d: &D,
    u: &FemFunction,
    v: &FemFunction,
    floor: f64,
    quad: &QuadRule,
) -> Result<SparseMatrix, AssemblyError> {
    assert!(floor > 0.0, "slope floor must be positive");
    check_len(mesh, u)?;
    check_len(mesh, v)?;
    let mut m = SparseMatrix::p1_pattern(mesh);
    let (cu, cv) = (u.coeffs(), v.coeffs());
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let ul = [cu[tri[0]], cu[tri[1]], cu[tri[2]]];
        let vl = [cv[tri[0]], cv[tri[1]], cv[tri[2]]];
        let mut local = [[0.0; 3]; 3];
        for (bary, w) in quad.iter() {
            let x = mesh.map_point(t, *bary);
            let uq = bary[0] * ul[0] + bary[1] * ul[1] + bary[2] * ul[2];
            let vq = bary[0] * vl[0] + bary[1] * vl[1] + bary[2] * vl[2];
            let mut b = slope_weight(d, x, uq, vq, floor);
            if !b.is_finite() {
                return Err(AssemblyError::NonFiniteNonlinearity { x, u: uq, value: b });
            }
            if b < 0.0 {
                if b < -NEGATIVE_SLOPE_TOL {
                    return Err(AssemblyError::NegativeSlope { x, weight: b });
                }
                b = 0.0;
            }
            let s = area * w * b;
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += s * bary[i] * bary[j];
                }
            }
        }
        for i in 0..3 {
            let off: f64 = (0..3).filter(|&j| j != i).map(|j| local[i][j]).sum();
            local[i][i] = local[i][i].max(off);
        }
        m.add_element(tri, &local);
    }
    Ok(m)
}

/// Symmetric elimination of boundary unknowns: boundary rows and columns are
/// zeroed, their diagonal set to one and their right-hand side to zero.
pub fn apply_dirichlet(mut matrix: SparseMatrix, mut rhs: Vec<f64>, mesh: &TriMesh) -> (SparseMatrix, Vec<f64>) {
    assert_eq!(matrix.dim(), mesh.num_vertices());
    assert_eq!(rhs.len(), mesh.num_vertices());
    let boundary = mesh.boundary_flags();
    let row_ptr = matrix.row_ptr().to_vec();
    let cols = matrix.col_idx().to_vec();
    let values = matrix.values_mut();
    for i in 0..boundary.len() {
        for k in row_ptr[i]..row_ptr[i + 1] {
            let j = cols[k];
            if boundary[i] || boundary[j] {
                values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
        if boundary[i] {
            rhs[i] = 0.0;
        }
    }
    (matrix, rhs)
}

fn check_len(mesh: &TriMesh, u: &FemFunction) -> Result<(), AssemblyError> {
    if u.coeffs().len() != mesh.num_vertices() {
        return Err(AssemblyError::LengthMismatch { expected: mesh.num_vertices(), got: u.coeffs().len() });
    }
    Ok(())
}
