//! Jacobi-preconditioned conjugate gradients.

use thiserror::Error;

use crate::sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgError {
    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    NotConverged { iterations: usize, history: Vec<f64> },
    #[error("matrix is not positive definite: p^T A p = {curvature:e} at iteration {iteration}")]
    Indefinite { iteration: usize, curvature: f64 },
    #[error("non-positive diagonal entry {value:e} in row {row}")]
    BadDiagonal { row: usize, value: f64 },
    #[error("dimension mismatch: matrix {matrix}, right-hand side {rhs}")]
    Dimension { matrix: usize, rhs: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = rhs` for symmetric positive definite `A`, stopping once
/// `‖r‖ ≤ tol ‖rhs‖`.
pub fn cg_solve(a: &SparseMatrix, rhs: &[f64], tol: f64, maxit: usize) -> Result<CgOutcome, CgError> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(CgError::Dimension { matrix: n, rhs: rhs.len() });
    }
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, v)| if v > 0.0 { Ok(1.0 / v) } else { Err(CgError::BadDiagonal { row, value: v }) })
        .collect::<Result<Vec<_>, _>>()?;

    let mut x = vec![0.0; n];
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, history: Vec::new() });
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();

    for it in 1..=maxit {
        a.mul_vec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 {
            return Err(CgError::Indefinite { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / b_norm;
        history.push(rel);
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, history });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CgError::NotConverged { iterations: maxit, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.5];
        let out = cg_solve(&SparseMatrix::identity(3), &b, 1e-12, 10).unwrap();
        assert_eq!(out.x, b);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_triplets(2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let out = cg_solve(&a, &[1.0, 2.0], 1e-14, 10).unwrap();
        assert!((out.x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((out.x[1] - 7.0 / 11.0).abs() < 1e-14);
        let res = a.mul_vec(&out.x);
        let rn = ((res[0] - 1.0).powi(2) + (res[1] - 2.0).powi(2)).sqrt();
        assert!(rn <= 1e-14 * 5f64.sqrt());
    }

    #[test]
    fn zero_rhs() {
        let a = SparseMatrix::from_triplets(2, &[(0, 0, 4.0), (1, 1, 3.0)]);
        let out = cg_solve(&a, &[0.0, 0.0], 1e-12, 10).unwrap();
        assert_eq!(out.x, vec![0.0, 0.0]);
    }

    #[test]
    fn failures() {
        let indefinite = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(cg_solve(&indefinite, &[1.0, -1.0], 1e-12, 10), Err(CgError::Indefinite { .. })));
        let zero_diag = SparseMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(cg_solve(&zero_diag, &[1.0, 1.0], 1e-12, 10), Err(CgError::BadDiagonal { row: 0, .. })));
        // 1-D Laplacian needs n iterations; one is not enough
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let lap = SparseMatrix::from_triplets(n, &t);
        match cg_solve(&lap, &vec![1.0; n], 1e-12, 1) {
            Err(CgError::NotConverged { iterations, history }) => {
                assert_eq!(iterations, 1);
                assert_eq!(history.len(), 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
