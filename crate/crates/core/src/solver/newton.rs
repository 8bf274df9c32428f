//! Damped Newton iteration for `A U + N(U) = F` on the Dirichlet space.
//!
//! The linearization at `U` is the weighted mass matrix of the floored
//! symmetric difference quotient of `d` over `[U - ρ, U + ρ]`. At kinks of
//! sign-power laws that weight is large but finite and non-negative, so the
//! Newton matrix stays symmetric positive definite and conjugate gradients
//! apply. When a full step cuts the residual by less than half, the step is
//! re-solved with the secant slope between the old and the trial iterate,
//! which restores fast convergence near kinks. Steps are globalized by Armijo backtracking on the residual norm;
//! if backtracking bottoms out the step is recomputed with an added `σ M`
//! term, doubling `σ` until the residual decreases.

use std::sync::Arc;

use thiserror::Error;

use super::cg::{cg_solve, CgError};
use crate::discretization::{
    apply_dirichlet, assemble_load, assemble_mass, assemble_nonlinear_residual, assemble_slope_matrix,
    assemble_stiffness, AssemblyError, FemFunction,
};
use crate::mesh::{Point, TriMesh};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::QuadRule;
use crate::sparse::SparseMatrix;

/// Floor of the secant re-linearization; only guards against division by zero.
const SECANT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Absolute tolerance on `‖r‖₂ / √ndof`.
    pub residual_tol: f64,
    pub max_newton: usize,
    /// Slope floor ρ, also the half-width of the difference quotient.
    pub slope_floor: f64,
    pub armijo_beta: f64,
    pub armijo_c: f64,
    pub min_step: f64,
    /// Relative tolerance of the inner CG solves.
    pub cg_tol: f64,
    /// Inner iteration cap; `None` means `10 * ndof`.
    pub cg_maxit: Option<usize>,
    pub continuation_sigma0: f64,
    pub max_sigma_doublings: usize,
    /// Secant re-linearizations tried before backtracking a full step.
    pub secant_corrections: usize,
    /// Rule for the load vector.
    pub load_rule: QuadRule,
    /// Rule for the nonlinear residual and the slope matrix.
    pub nonlinear_rule: QuadRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_newton: 50,
            slope_floor: 1e-6,
            armijo_beta: 0.5,
            armijo_c: 1e-4,
            min_step: 2f64.powi(-20),
            cg_tol: 1e-12,
            cg_maxit: None,
            continuation_sigma0: 0.0,
            max_sigma_doublings: 60,
            secant_corrections: 3,
            load_rule: QuadRule::edge_midpoints(),
            nonlinear_rule: QuadRule::seven_point(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("slope_floor", self.slope_floor),
            ("armijo_c", self.armijo_c),
            ("min_step", self.min_step),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolveError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo_beta > 0.0 && self.armijo_beta < 1.0) {
            return Err(SolveError::Config(format!("armijo_beta must lie in (0, 1), got {}", self.armijo_beta)));
        }
        if !(self.continuation_sigma0 >= 0.0 && self.continuation_sigma0.is_finite()) {
            return Err(SolveError::Config(format!(
                "continuation_sigma0 must be non-negative, got {}",
                self.continuation_sigma0
            )));
        }
        if self.max_newton == 0 || self.cg_maxit == Some(0) {
            return Err(SolveError::Config("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Linear solves performed, the initial predictor included.
    pub newton_iterations: usize,
    pub total_cg_iterations: usize,
    pub final_residual_norm: f64,
    /// Newton steps that needed backtracking or the mass shift.
    pub damping_activations: usize,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("inner solve failed: {0}")]
    Cg(#[from] CgError),
    #[error("initial guess lives on a different mesh")]
    InitialGuessMesh,
    #[error("no convergence in {} Newton iterations; best residual {:e}", stats.newton_iterations, stats.residual_history.iter().copied().fold(f64::INFINITY, f64::min))]
    NotConverged { best: Box<FemFunction>, stats: SolveStats },
    #[error("step rejected for every mass shift up to sigma = {sigma:e}; residual {:e}", stats.final_residual_norm)]
    Stalled { best: Box<FemFunction>, stats: SolveStats, sigma: f64 },
}

impl SolveError {
    /// Statistics gathered before the failure, when any.
    pub fn partial_stats(&self) -> Option<&SolveStats> {
        match self {
            SolveError::NotConverged { stats, .. } | SolveError::Stalled { stats, .. } => Some(stats),
            _ => None,
        }
    }
}

/// Assembled pieces of the discrete semilinear problem on one mesh.
pub struct SemilinearSystem<'a, D: ?Sized> {
    mesh: Arc<TriMesh>,
    d: &'a D,
    stiffness: SparseMatrix,
    load: Vec<f64>,
    nonlinear_rule: QuadRule,
    ndof: usize,
}

impl<'a, D: Nonlinearity + ?Sized> SemilinearSystem<'a, D> {
    pub fn new(
        mesh: &Arc<TriMesh>,
        d: &'a D,
        f: &dyn Fn(Point) -> f64,
        cfg: &SolverConfig,
    ) -> Result<Self, AssemblyError> {
        Ok(Self {
            mesh: Arc::clone(mesh),
            d,
            stiffness: assemble_stiffness(mesh),
            load: assemble_load(mesh, f, &cfg.load_rule)?,
            nonlinear_rule: cfg.nonlinear_rule.clone(),
            ndof: mesh.num_interior(),
        })
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// `A U + N(U) - F` with boundary rows zeroed.
    pub fn residual(&self, u: &FemFunction) -> Result<Vec<f64>, AssemblyError> {
        let mut r = self.stiffness.mul_vec(u.coeffs());
        let n = assemble_nonlinear_residual(&self.mesh, self.d, u, &self.nonlinear_rule)?;
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = if self.mesh.is_boundary(i) { 0.0 } else { *ri + n[i] - self.load[i] };
        }
        Ok(r)
    }

    /// `‖r‖₂ / √ndof`.
    pub fn scaled_norm(&self, r: &[f64]) -> f64 {
        r.iter().map(|v| v * v).sum::<f64>().sqrt() / (self.ndof.max(1) as f64).sqrt()
    }

    pub fn residual_norm(&self, u: &FemFunction) -> Result<f64, AssemblyError> {
        Ok(self.scaled_norm(&self.residual(u)?))
    }
}

/// Scaled residual norm of `u`, recomputed from fresh assemblies.
pub fn residual_norm<D: Nonlinearity + ?Sized>(
    d: &D,
    f: &dyn Fn(Point) -> f64,
    u: &FemFunction,
    cfg: &SolverConfig,
) -> Result<f64, AssemblyError> {
    SemilinearSystem::new(u.mesh(), d, f, cfg)?.residual_norm(u)
}

fn shifted(u: &FemFunction, tau: f64) -> FemFunction {
    let c = u.coeffs().iter().map(|v| v + tau).collect();
    FemFunction::new(Arc::clone(u.mesh()), c).expect("same length")
}

/// Solves the discrete semilinear problem with homogeneous Dirichlet data.
///
/// Without an initial guess the iteration starts from the solution of the
/// linear problem with `d(., 0)` frozen on the right-hand side.
pub fn solve_semilinear<D: Nonlinearity + ?Sized>(
    mesh: &Arc<TriMesh>,
    d: &D,
    f: &dyn Fn(Point) -> f64,
    cfg: &SolverConfig,
    initial: Option<&FemFunction>,
) -> Result<(FemFunction, SolveStats), SolveError> {
    cfg.validate()?;
    let sys = SemilinearSystem::new(mesh, d, f, cfg)?;
    let ndof = sys.ndof();
    let cg_maxit = cfg.cg_maxit.unwrap_or(10 * ndof.max(1));
    let mut stats = SolveStats::default();

    if ndof == 0 {
        stats.final_residual_norm = 0.0;
        return Ok((FemFunction::zeros(Arc::clone(mesh)), stats));
    }

    let mut u = match initial {
        Some(init) => {
            if !Arc::ptr_eq(init.mesh(), mesh) {
                return Err(SolveError::InitialGuessMesh);
            }
            let mut u = init.clone();
            u.zero_boundary();
            u
        }
        None => {
            let zero = FemFunction::zeros(Arc::clone(mesh));
            let n0 = assemble_nonlinear_residual(mesh, d, &zero, &cfg.nonlinear_rule)?;
            let rhs: Vec<f64> = sys.load.iter().zip(&n0).map(|(f, n)| f - n).collect();
            let (a, rhs) = apply_dirichlet(sys.stiffness.clone(), rhs, mesh);
            let out = cg_solve(&a, &rhs, cfg.cg_tol, cg_maxit)?;
            stats.newton_iterations += 1;
            stats.total_cg_iterations += out.iterations;
            FemFunction::new(Arc::clone(mesh), out.x)?
        }
    };

    let mut mass: Option<SparseMatrix> = None;
    let mut r = sys.residual(&u)?;
    let mut norm = sys.scaled_norm(&r);
    let mut best = (norm, u.clone());

    loop {
        stats.residual_history.push(norm);
        stats.final_residual_norm = norm;
        if norm < best.0 {
            best = (norm, u.clone());
        }
        if norm <= cfg.residual_tol {
            return Ok((u, stats));
        }
        if stats.newton_iterations >= cfg.max_newton {
            return Err(SolveError::NotConverged { best: Box::new(best.1), stats });
        }

        let tau = cfg.slope_floor;
        let slope =
            assemble_slope_matrix(mesh, d, &shifted(&u, tau), &shifted(&u, -tau), tau, &cfg.nonlinear_rule)?;
        let jac = sys.stiffness.add_scaled(&slope, 1.0);
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let (jac_c, rhs) = apply_dirichlet(jac.clone(), neg_r.clone(), mesh);
        let step = cg_solve(&jac_c, &rhs, cfg.cg_tol, cg_maxit)?;
        stats.newton_iterations += 1;
        stats.total_cg_iterations += step.iterations;

        // full step, refined by secant slopes towards the trial point while
        // it fails to halve the residual
        let mut direction = FemFunction::new(Arc::clone(mesh), step.x)?;
        let mut full = u.axpy(1.0, &direction)?;
        let mut full_r = sys.residual(&full)?;
        let mut full_norm = sys.scaled_norm(&full_r);
        for _ in 0..cfg.secant_corrections {
            if full_norm <= 0.5 * norm {
                break;
            }
            let secant = assemble_slope_matrix(mesh, d, &full, &u, SECANT_FLOOR, &cfg.nonlinear_rule)?;
            let (jc, rhs) = apply_dirichlet(sys.stiffness.add_scaled(&secant, 1.0), neg_r.clone(), mesh);
            let s = cg_solve(&jc, &rhs, cfg.cg_tol, cg_maxit)?;
            stats.total_cg_iterations += s.iterations;
            let cand_dir = FemFunction::new(Arc::clone(mesh), s.x)?;
            let cand = u.axpy(1.0, &cand_dir)?;
            let cand_r = sys.residual(&cand)?;
            let cand_norm = sys.scaled_norm(&cand_r);
            if cand_norm >= full_norm {
                break;
            }
            (direction, full, full_r, full_norm) = (cand_dir, cand, cand_r, cand_norm);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        if full_norm <= (1.0 - cfg.armijo_c) * norm {
            accepted = Some((full, full_r, full_norm));
        } else {
            alpha *= cfg.armijo_beta;
        }
        while accepted.is_none() && alpha >= cfg.min_step {
            let trial = u.axpy(alpha, &direction)?;
            let tr = sys.residual(&trial)?;
            let tn = sys.scaled_norm(&tr);
            if tn <= (1.0 - cfg.armijo_c * alpha) * norm {
                accepted = Some((trial, tr, tn));
                break;
            }
            alpha *= cfg.armijo_beta;
        }
        if alpha < 1.0 {
            stats.damping_activations += 1;
        }

        let (next, next_r, next_norm) = match accepted {
            Some(t) => t,
            None => {
                let m = mass.get_or_insert_with(|| assemble_mass(mesh));
                let mut sigma = cfg.continuation_sigma0.max(1e-3);
                let mut found = None;
                for _ in 0..=cfg.max_sigma_doublings {
                    let shifted_jac = jac.add_scaled(m, sigma);
                    let (jc, rhs) = apply_dirichlet(shifted_jac, neg_r.clone(), mesh);
                    let s = cg_solve(&jc, &rhs, cfg.cg_tol, cg_maxit)?;
                    stats.total_cg_iterations += s.iterations;
                    let trial = u.axpy(1.0, &FemFunction::new(Arc::clone(mesh), s.x)?)?;
                    let tr = sys.residual(&trial)?;
                    let tn = sys.scaled_norm(&tr);
                    if tn < norm {
                        found = Some((trial, tr, tn));
                        break;
                    }
                    sigma *= 2.0;
                }
                match found {
                    Some(t) => t,
                    None => {
                        return Err(SolveError::Stalled { best: Box::new(best.1), stats, sigma });
                    }
                }
            }
        };
        u = next;
        r = next_r;
        norm = next_norm;
    }
}

/// Outcome of the discrete uniform bound check `‖U‖∞ ≤ 2 ‖u_ref‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBound {
    pub passed: bool,
    /// `‖U‖∞ / ‖u_ref‖∞`; zero when both vanish.
    pub ratio: f64,
    pub max_norm: f64,
    pub reference_max_norm: f64,
}

/// Compares sup norms of a discrete solution and a reference solution.
pub fn verify_uniform_bound(u: &FemFunction, reference: &FemFunction) -> UniformBound {
    let a = u.max_norm();
    let b = reference.max_norm();
    let ratio = if a == 0.0 { 0.0 } else { a / b };
    UniformBound { passed: a <= 2.0 * b + 1e-10, ratio, max_norm: a, reference_max_norm: b }
}
