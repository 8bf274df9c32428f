use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use semilinear_fem::mesh::{build_level, triangulate_convex_polygon, DomainPreset, MeshError, Polygon, TriMesh};

/// Convex polygons from sorted angles on a jittered ellipse.
fn convex_polygon() -> impl Strategy<Value = Polygon> {
    (3usize..9, 0.5f64..3.0, 0.5f64..3.0, -5.0f64..5.0, -5.0f64..5.0).prop_flat_map(|(n, a, b, cx, cy)| {
        proptest::collection::vec(0.0f64..1.0, n).prop_filter_map("degenerate", move |mut t| {
            t.sort_by(f64::total_cmp);
            let pts: Vec<[f64; 2]> = t
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let th = 2.0 * PI * (i as f64 + 0.8 * s) / n as f64;
                    [cx + a * th.cos(), cy + b * th.sin()]
                })
                .collect();
            Polygon::new(pts).ok()
        })
    })
}

fn shoelace(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1]).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_invariants(poly in convex_polygon(), levels in 1usize..4) {
        let mut mesh = Arc::new(triangulate_convex_polygon(&poly));
        let area = shoelace(poly.vertices());
        let angle0 = mesh.min_angle();
        prop_assert!(mesh.check_conformity().is_ok());
        for _ in 0..levels {
            let fine = Arc::new(mesh.refine_uniform());
            prop_assert!(fine.check_conformity().is_ok());
            prop_assert!((fine.area() - area).abs() <= 1e-12 * area);
            prop_assert!((fine.min_angle() - angle0).abs() <= 1e-12);
            prop_assert_eq!(&fine.vertices()[..mesh.num_vertices()], mesh.vertices());
            prop_assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
            for (k, [a, b]) in fine.midpoint_parents().iter().enumerate() {
                let m = fine.vertices()[mesh.num_vertices() + k];
                let (pa, pb) = (mesh.vertices()[*a], mesh.vertices()[*b]);
                prop_assert_eq!(m, [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
            mesh = fine;
        }
    }

    #[test]
    fn boundary_vertices_lie_on_polygon_edges(poly in convex_polygon()) {
        let mesh = build_level(&poly, 2);
        let pv = poly.vertices();
        for (i, p) in mesh.vertices().iter().enumerate() {
            let on_edge = (0..pv.len()).any(|k| {
                let (a, b) = (pv[k], pv[(k + 1) % pv.len()]);
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                cross.abs() <= 1e-9
            });
            prop_assert_eq!(on_edge, mesh.is_boundary(i));
        }
    }
}

#[test]
fn preset_counts() {
    for (preset, n) in [(DomainPreset::UnitSquare, 4), (DomainPreset::UnitTriangle, 3), (DomainPreset::Pentagon, 5)] {
        let m0 = build_level(&preset.polygon(), 0);
        assert_eq!((m0.num_vertices(), m0.num_triangles(), m0.num_interior()), (n + 1, n, 1));
        let m2 = build_level(&preset.polygon(), 2);
        assert_eq!(m2.num_triangles(), 16 * n);
        assert_eq!(m2.level(), 2);
    }
}

#[test]
fn pentagon_largest_angle() {
    let poly = DomainPreset::Pentagon.polygon();
    let largest = (0..5).map(|i| poly.interior_angle(i)).fold(0.0, f64::max);
    assert!((largest - 0.75 * PI).abs() < 1e-14);
}

#[test]
fn invalid_input_rejected() {
    assert!(matches!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]), Err(MeshError::TooFewVertices(_))));
    // clockwise square
    assert!(Polygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
    // collinear vertex is not strictly convex
    assert!(Polygon::new(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
    // hanging node: the edge 0-1 is split in one triangle only
    let hanging = TriMesh::new(
        vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, -1.0]],
        vec![[0, 2, 3], [2, 1, 3], [0, 4, 1]],
    );
    assert!(matches!(hanging, Err(MeshError::NotADisk(0))));
    // two copies of the same triangle
    let folded = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2], [1, 2, 0]]);
    assert!(matches!(folded, Err(MeshError::Folded(..))));
    let unused = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]], vec![[0, 1, 2]]);
    assert!(matches!(unused, Err(MeshError::UnusedVertex(3))));
}
