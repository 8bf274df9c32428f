//! Built-in self checks run by the `validate` command.
//!
//! Every check compares the library against an independent route: hand
//! element matrices, closed-form monomial integrals, a dense direct solve,
//! or a second solve from a different starting point.

use std::sync::Arc;

use crate::discretization::{
    apply_dirichlet, assemble_load, assemble_mass, assemble_nonlinear_residual, assemble_stiffness, interpolate,
    FemFunction,
};
use crate::mesh::{build_level, triangulate_convex_polygon, DomainPreset, TriMesh};
use crate::nonlinearity::{check_monotone, cut, FnNonlinearity, Nonlinearity, PowerLaw};
use crate::quadrature::QuadRule;
use crate::solver::{cg_solve, residual_norm, solve_semilinear, SolverConfig};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            if m != 0.0 {
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn unit_triangle() -> TriMesh {
    TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).expect("valid triangle")
}

fn max_dense_diff(a: &SparseMatrix, expected: &[[f64; 3]; 3]) -> f64 {
    let d = a.to_dense();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((d[i][j] - expected[i][j]).abs());
        }
    }
    worst
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn element_stiffness() -> CheckResult {
    let err = max_dense_diff(
        &assemble_stiffness(&unit_triangle()),
        &[[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]],
    );
    check("element stiffness", err <= 1e-14, format!("max deviation {err:.1e}"))
}

fn element_mass() -> CheckResult {
    let e = 1.0 / 24.0;
    let err = max_dense_diff(&assemble_mass(&unit_triangle()), &[[2.0 * e, e, e], [e, 2.0 * e, e], [e, e, 2.0 * e]]);
    check("element mass", err <= 1e-14, format!("max deviation {err:.1e}"))
}

/// Largest relative error of `rule` over monomials `x^a y^b`, `a + b <= degree`.
pub fn quadrature_monomial_error(rule: &QuadRule) -> f64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let mut worst: f64 = 0.0;
    for a in 0..=rule.degree() {
        for b in 0..=(rule.degree() - a) {
            let approx: f64 =
                0.5 * rule.iter().map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32)).sum::<f64>();
            let exact = 2.0 * fact(a) * fact(b) / fact(a + b + 2) * 0.5;
            worst = worst.max(((approx - exact) / exact).abs());
        }
    }
    worst
}

fn quadrature_exactness() -> Vec<CheckResult> {
    QuadRule::all()
        .into_iter()
        .map(|rule| {
            let err = quadrature_monomial_error(&rule);
            let wsum: f64 = rule.weights().iter().sum();
            check(
                "quadrature exactness",
                err <= 1e-13 && (wsum - 1.0).abs() <= 1e-14,
                format!("{} (degree {}): max relative error {err:.1e}", rule.name(), rule.degree()),
            )
        })
        .collect()
}

fn mesh_refinement() -> CheckResult {
    let poly = DomainPreset::Pentagon.polygon();
    let mut mesh = Arc::new(triangulate_convex_polygon(&poly));
    let angle0 = mesh.min_angle();
    let mut ok = true;
    let mut detail = String::new();
    for _ in 0..4 {
        let fine = Arc::new(mesh.refine_uniform());
        let counts = fine.num_vertices() == mesh.num_vertices() + mesh.edges().len()
            && fine.num_triangles() == 4 * mesh.num_triangles();
        let halves = (fine.mesh_size() - 0.5 * mesh.mesh_size()).abs() <= 1e-15;
        let area = (fine.area() - poly.area()).abs() <= 1e-12 * poly.area();
        let angle = (fine.min_angle() - angle0).abs() <= 1e-12;
        let nested = fine.vertices()[..mesh.num_vertices()] == mesh.vertices()[..];
        let conforming = fine.check_conformity().is_ok();
        if !(counts && halves && area && angle && nested && conforming) {
            ok = false;
            detail = format!("level {}: counts {counts}, h {halves}, area {area}, angle {angle}, nested {nested}, conforming {conforming}", fine.level());
        }
        mesh = fine;
    }
    if ok {
        detail = format!("levels 0..{}: counts, h/2, area, min angle, nesting, conformity", mesh.level());
    }
    check("red refinement", ok, detail)
}

fn power_law_values() -> CheckResult {
    let d = PowerLaw::cube_root_benchmark();
    let x = [0.25, 0.5];
    let vals = [d.eval(x, 0.0), d.eval(x, -1.0), d.eval(x, 7.0)];
    let ok = vals[0] == 50.0 && vals[1] == 0.0 && (vals[2] - 100.0).abs() <= 1e-12;
    let c = cut(FnNonlinearity::new("u", |_, u| u), 1.0).expect("positive level");
    let ok = ok && c.eval(x, 2.0) == 1.0 && c.eval(x, -0.5) == -0.5;
    let pts = [[0.0, 0.0], [0.3, 0.6], [1.0, 1.0]];
    let ok = ok && check_monotone(&d, &pts, (-5.0, 5.0), 2001).passed();
    check("power law and cut", ok, format!("d(0), d(-1), d(7) = {vals:?}"))
}

fn cg_two_by_two() -> CheckResult {
    let a = SparseMatrix::from_triplets(2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
    match cg_solve(&a, &[1.0, 2.0], 1e-14, 10) {
        Ok(out) => {
            let err = max_diff(&out.x, &[1.0 / 11.0, 7.0 / 11.0]);
            check("cg 2x2", err <= 1e-14, format!("error {err:.1e}"))
        }
        Err(e) => check("cg 2x2", false, e.to_string()),
    }
}

/// Dense reference for `d(x,u) = u`, `f = 1`: `(A + M) U = F` with the
/// mass matrix taken from the nonlinear residual of unit vectors.
pub fn linear_reaction_dense_oracle(mesh: &Arc<TriMesh>, cfg: &SolverConfig) -> Option<Vec<f64>> {
    let n = mesh.num_vertices();
    let id = FnNonlinearity::new("u", |_, u| u);
    let a = assemble_stiffness(mesh).to_dense();
    let mut dense = a;
    for j in 0..n {
        let mut e = FemFunction::zeros(Arc::clone(mesh));
        e.coeffs_mut()[j] = 1.0;
        let col = assemble_nonlinear_residual(mesh, &id, &e, &cfg.nonlinear_rule).ok()?;
        for i in 0..n {
            dense[i][j] += col[i];
        }
    }
    let mut rhs = assemble_load(mesh, |_| 1.0, &cfg.load_rule).ok()?;
    for i in 0..n {
        if mesh.is_boundary(i) {
            for j in 0..n {
                dense[i][j] = 0.0;
                dense[j][i] = 0.0;
            }
            dense[i][i] = 1.0;
            rhs[i] = 0.0;
        }
    }
    dense_solve(dense, rhs)
}

fn tiny_instance() -> CheckResult {
    let mesh = build_level(&DomainPreset::UnitSquare.polygon(), 2);
    let cfg = SolverConfig::default();
    let id = FnNonlinearity::new("u", |_, u| u);
    let Some(oracle) = linear_reaction_dense_oracle(&mesh, &cfg) else {
        return check("dense oracle", false, "dense solve failed".into());
    };
    match solve_semilinear(&mesh, &id, &|_| 1.0, &cfg, None) {
        Ok((u, _)) => {
            let err = max_diff(u.coeffs(), &oracle);
            check("dense oracle", err <= 1e-9, format!("d = u, f = 1, level 2 square: max deviation {err:.1e}"))
        }
        Err(e) => check("dense oracle", false, e.to_string()),
    }
}

fn uniqueness_and_cut() -> Vec<CheckResult> {
    let mesh = build_level(&DomainPreset::Pentagon.polygon(), 3);
    let d = PowerLaw::cube_root_benchmark();
    let cfg = SolverConfig::default();
    let f = |_: crate::mesh::Point| 1.0;
    let first = match solve_semilinear(&mesh, &d, &f, &cfg, None) {
        Ok(v) => v,
        Err(e) => return vec![check("uniqueness", false, e.to_string())],
    };
    let mut out = Vec::new();

    let fresh = residual_norm(&d, &f, &first.0, &cfg).unwrap_or(f64::NAN);
    let rel = (fresh - first.1.final_residual_norm).abs() / first.1.final_residual_norm.max(f64::MIN_POSITIVE);
    out.push(check(
        "residual certificate",
        rel <= 1e-13 && fresh <= cfg.residual_tol,
        format!("reported {:.3e}, recomputed {fresh:.3e}", first.1.final_residual_norm),
    ));

    let guess = interpolate(&mesh, |p| 0.1 * p[0] * p[1]).expect("finite");
    out.push(match solve_semilinear(&mesh, &d, &f, &cfg, Some(&guess)) {
        Ok((u2, _)) => {
            let err = max_diff(first.0.coeffs(), u2.coeffs());
            check("uniqueness", err <= 1e-8, format!("two initial guesses differ by {err:.1e}"))
        }
        Err(e) => check("uniqueness", false, e.to_string()),
    });

    let m = 2.0 * first.0.max_norm() + 1.0;
    let dm = cut(&d, m).expect("positive level");
    out.push(match solve_semilinear(&mesh, &dm, &f, &cfg, None) {
        Ok((u3, _)) => {
            let err = max_diff(first.0.coeffs(), u3.coeffs());
            check("cut consistency", err <= 1e-8, format!("M = {m:.4}: max deviation {err:.1e}"))
        }
        Err(e) => check("cut consistency", false, e.to_string()),
    });
    out
}

fn dirichlet_symmetry() -> CheckResult {
    let mesh = build_level(&DomainPreset::UnitTriangle.polygon(), 3);
    let n = mesh.num_vertices();
    let (a, rhs) = apply_dirichlet(assemble_stiffness(&mesh), vec![1.0; n], &mesh);
    let ok = a.asymmetry() == 0.0 && (0..n).all(|i| !mesh.is_boundary(i) || (rhs[i] == 0.0 && a.get(i, i) == 1.0));
    check("dirichlet elimination", ok, format!("asymmetry {:.1e}", a.asymmetry()))
}

/// Runs every check.
pub fn run_validation() -> Vec<CheckResult> {
    let mut out = vec![element_stiffness(), element_mass()];
    out.extend(quadrature_exactness());
    out.push(mesh_refinement());
    out.push(power_law_values());
    out.push(dirichlet_symmetry());
    out.push(cg_two_by_two());
    out.push(tiny_instance());
    out.extend(uniqueness_and_cut());
    out
}
