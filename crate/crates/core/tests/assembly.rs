mod common;

use std::sync::Arc;

use common::{hand_area, hand_stiffness};
use proptest::prelude::*;
use semilinear_fem::discretization::{
    apply_dirichlet, assemble_load, assemble_mass, assemble_nonlinear_residual, assemble_slope_matrix,
    assemble_stiffness, interpolate, FemFunction,
};
use semilinear_fem::mesh::{build_level, DomainPreset, TriMesh};
use semilinear_fem::nonlinearity::{FnNonlinearity, PowerLaw};
use semilinear_fem::quadrature::QuadRule;

fn mesh_for(preset: usize, level: usize) -> Arc<TriMesh> {
    let p = [DomainPreset::UnitSquare, DomainPreset::UnitTriangle, DomainPreset::Pentagon][preset];
    build_level(&p.polygon(), level)
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn random_function(mesh: &Arc<TriMesh>, coeffs: &[f64]) -> FemFunction {
    let c: Vec<f64> = (0..mesh.num_vertices()).map(|i| coeffs[i % coeffs.len()]).collect();
    FemFunction::new(Arc::clone(mesh), c).unwrap()
}

#[test]
fn stiffness_matches_edge_vector_formula() {
    let mesh = mesh_for(2, 2);
    let a = assemble_stiffness(&mesh);
    let n = mesh.num_vertices();
    let mut dense = vec![vec![0.0; n]; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let k = hand_stiffness(mesh.triangle_points(t));
        for i in 0..3 {
            for j in 0..3 {
                dense[tri[i]][tri[j]] += k[i][j];
            }
        }
    }
    let got = a.to_dense();
    for i in 0..n {
        assert!(rel_diff(&got[i], &dense[i]) <= 1e-14);
    }
    assert!(a.asymmetry() <= 1e-15);
}

#[test]
fn constant_load_is_a_third_of_patch_area() {
    let mesh = mesh_for(1, 3);
    for rule in QuadRule::all() {
        let b = assemble_load(&mesh, |_| 2.0, &rule).unwrap();
        let mut expected = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for &v in tri {
                expected[v] += 2.0 * hand_area(mesh.triangle_points(t)) / 3.0;
            }
        }
        assert!(rel_diff(&b, &expected) <= 1e-14);
    }
}

#[test]
fn dirichlet_elimination_keeps_symmetry() {
    let mesh = mesh_for(2, 2);
    let n = mesh.num_vertices();
    let (a, rhs) = apply_dirichlet(assemble_stiffness(&mesh), vec![1.0; n], &mesh);
    assert_eq!(a.asymmetry(), 0.0);
    for v in 0..n {
        if mesh.is_boundary(v) {
            assert_eq!(rhs[v], 0.0);
            assert_eq!(a.row(v).filter(|&(_, x)| x != 0.0).collect::<Vec<_>>(), vec![(v, 1.0)]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_residual_is_mass_times_coefficients(
        preset in 0usize..3,
        level in 0usize..3,
        coeffs in proptest::collection::vec(-10.0f64..10.0, 1..40),
    ) {
        let mesh = mesh_for(preset, level);
        let u = random_function(&mesh, &coeffs);
        let mu = assemble_mass(&mesh).mul_vec(u.coeffs());
        let id = FnNonlinearity::new("u", |_, u| u);
        for rule in QuadRule::all().into_iter().filter(|r| r.degree() >= 2) {
            let r = assemble_nonlinear_residual(&mesh, &id, &u, &rule).unwrap();
            prop_assert!(rel_diff(&r, &mu) <= 1e-13);
        }
    }

    #[test]
    fn slope_matrix_gershgorin(
        preset in 0usize..3,
        level in 0usize..3,
        exponent in prop::sample::select(vec![1.0, 0.5, 1.0 / 3.0, 0.75]),
        shift in -1.0f64..1.0,
        u in proptest::collection::vec(-2.0f64..2.0, 1..40),
        v in proptest::collection::vec(-2.0f64..2.0, 1..40),
    ) {
        let mesh = mesh_for(preset, level);
        let d = PowerLaw::new(3.0, exponent).unwrap().with_shift(shift).unwrap();
        let (u, v) = (random_function(&mesh, &u), random_function(&mesh, &v));
        let b = assemble_slope_matrix(&mesh, &d, &u, &v, 1e-6, &QuadRule::seven_point()).unwrap();
        for lb in b.gershgorin_lower_bounds() {
            prop_assert!(lb >= -1e-12, "lower bound {lb}");
        }
        prop_assert!(b.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn assembly_is_order_independent(
        preset in 0usize..3,
        perm_seed in any::<u64>(),
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let mesh = mesh_for(preset, 2);
        let mut tris = mesh.triangles().to_vec();
        // deterministic shuffle plus a rotation of each triangle's vertex order
        let mut s = perm_seed | 1;
        for i in (1..tris.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            tris.swap(i, (s % (i as u64 + 1)) as usize);
            let r = (s >> 32) as usize % 3;
            tris[i].rotate_left(r);
        }
        let shuffled = Arc::new(TriMesh::new(mesh.vertices().to_vec(), tris).unwrap());
        let d = PowerLaw::cube_root_benchmark();
        let u1 = random_function(&mesh, &coeffs);
        let u2 = random_function(&shuffled, &coeffs);
        let rule = QuadRule::seven_point();
        let r1 = assemble_nonlinear_residual(&mesh, &d, &u1, &rule).unwrap();
        let r2 = assemble_nonlinear_residual(&shuffled, &d, &u2, &rule).unwrap();
        prop_assert!(rel_diff(&r1, &r2) <= 1e-13);
        let a1 = assemble_stiffness(&mesh).to_dense();
        let a2 = assemble_stiffness(&shuffled).to_dense();
        for (x, y) in a1.iter().zip(&a2) {
            prop_assert!(rel_diff(x, y) <= 1e-13);
        }
        let b1 = assemble_slope_matrix(&mesh, &d, &u1, &u1, 1e-6, &rule).unwrap().to_dense();
        let b2 = assemble_slope_matrix(&shuffled, &d, &u2, &u2, 1e-6, &rule).unwrap().to_dense();
        for (x, y) in b1.iter().zip(&b2) {
            prop_assert!(rel_diff(x, y) <= 1e-13);
        }
    }
}

#[test]
fn interpolation_reproduces_linear_functions() {
    let mesh = mesh_for(2, 3);
    let u = interpolate(&mesh, |p| 2.0 * p[0] - p[1] + 0.5).unwrap();
    for t in 0..mesh.num_triangles() {
        assert!((u.gradient(t)[0] - 2.0).abs() < 1e-12 && (u.gradient(t)[1] + 1.0).abs() < 1e-12);
    }
    assert!((u.eval_at([0.3, 0.7]).unwrap() - 0.4).abs() < 1e-14);
}
