//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use semilinear_fem::mesh::TriMesh;

/// Element stiffness from edge vectors: `K_ij = (e_i · e_j) / (4|T|)`
/// where `e_i` is the edge opposite vertex `i`.
pub fn hand_stiffness(p: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let edge = |i: usize| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [b[0] - a[0], b[1] - a[1]]
    };
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (ei, ej) = (edge(i), edge(j));
            k[i][j] = (ei[0] * ej[0] + ei[1] * ej[1]) / (4.0 * area);
        }
    }
    k
}

pub fn hand_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs()
}

/// Dense solve of `(A + c M) U = F` for constant `f`, with boundary rows
/// replaced by identity rows. Matrices are built element by element from
/// closed-form P1 integrals.
pub fn dense_reaction_solve(mesh: &TriMesh, c: f64, f: f64) -> Vec<f64> {
    let n = mesh.num_vertices();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let k = hand_stiffness(p);
        let area = hand_area(p);
        for i in 0..3 {
            rhs[tri[i]] += f * area / 3.0;
            for j in 0..3 {
                let m = if i == j { area / 6.0 } else { area / 12.0 };
                a[(tri[i], tri[j])] += k[i][j] + c * m;
            }
        }
    }
    for v in 0..n {
        if mesh.is_boundary(v) {
            a.row_mut(v).fill(0.0);
            a[(v, v)] = 1.0;
            rhs[v] = 0.0;
        }
    }
    a.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
