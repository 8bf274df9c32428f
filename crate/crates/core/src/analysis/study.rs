//! Convergence studies over a sequence of uniformly refined meshes.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use super::eoc::{eoc, eoc_log_corrected};
use super::exact::ExactSolution;
use super::norms::{error_h1semi, error_l2, error_linf, Truth, DEFAULT_LATTICE_DEGREE};
use super::AnalysisError;
use crate::discretization::FemFunction;
use crate::mesh::{triangulate_convex_polygon, Point, Polygon, TriMesh};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::QuadRule;
use crate::solver::{solve_semilinear, verify_uniform_bound, SolveStats, SolverConfig, UniformBound};

/// Header of the study CSV.
pub const CSV_HEADER: &str =
    "level,h,ndof,err_l2,err_h1,err_linf,eoc_l2,eoc_h1,eoc_linf,eoc_l2_logcorr,newton_iters,wall_time_s";

pub type SourceFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Domain, nonlinearity and source of a study.
#[derive(Clone)]
pub struct Problem {
    pub domain: Polygon,
    pub domain_name: String,
    pub d: Arc<dyn Nonlinearity>,
    pub f: SourceFn,
}

/// What errors are measured against.
#[derive(Clone)]
pub enum Reference {
    Exact(Arc<dyn ExactSolution>),
    /// Solution on the finest study level refined this many more times.
    FineGrid { extra_refinements: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Exact,
    FineGrid { level: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub err_l2: f64,
    pub err_h1semi: f64,
    pub err_linf: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1: Option<f64>,
    pub eoc_linf: Option<f64>,
    /// L² EOC corrected by `|ln h|²`.
    pub log_corrected_eoc_l2: Option<f64>,
    /// L∞ EOC corrected by `|ln h|`.
    pub log_corrected_eoc_linf: Option<f64>,
    pub newton_iterations: usize,
    pub wall_time: f64,
    pub solution_max_norm: f64,
    /// Sup-norm comparison with the fine-grid reference, when there is one.
    pub uniform_bound: Option<UniformBound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub domain: String,
    pub nonlinearity: String,
    pub reference: ReferenceKind,
    pub reference_max_norm: Option<f64>,
    pub records: Vec<LevelRecord>,
}

#[derive(Debug, Error)]
#[error("convergence study failed at level {level}: {source}")]
pub struct StudyError {
    pub level: usize,
    pub partial: Box<StudyReport>,
    pub stats: Option<SolveStats>,
    #[source]
    pub source: AnalysisError,
}

fn fmt_sci(v: f64) -> String {
    format!("{v:.9e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sci).unwrap_or_default()
}

impl StudyReport {
    pub fn last(&self) -> Option<&LevelRecord> {
        self.records.last()
    }

    /// CSV with the fixed header; absent EOC values are empty fields and
    /// reals use scientific notation with ten significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.level,
                fmt_sci(r.h),
                r.ndof,
                fmt_sci(r.err_l2),
                fmt_sci(r.err_h1semi),
                fmt_sci(r.err_linf),
                fmt_opt(r.eoc_l2),
                fmt_opt(r.eoc_h1),
                fmt_opt(r.eoc_linf),
                fmt_opt(r.log_corrected_eoc_l2),
                r.newton_iterations,
                fmt_sci(r.wall_time),
            );
        }
        s
    }
}

struct Solved {
    u: FemFunction,
    stats: SolveStats,
    wall_time: f64,
}

/// Solves on every level of `levels` (and on the reference levels for a
/// fine-grid reference), then measures L², H¹-seminorm and sampled L∞
/// errors and experimental orders of convergence.
///
/// Each level after the first starts Newton from the prolongated solution
/// of the previous level.
pub fn run_convergence_study(
    problem: &Problem,
    levels: RangeInclusive<usize>,
    reference: &Reference,
    cfg: &SolverConfig,
) -> Result<StudyReport, StudyError> {
    let (lo, hi) = (*levels.start(), *levels.end());
    let kind = match reference {
        Reference::Exact(_) => ReferenceKind::Exact,
        Reference::FineGrid { extra_refinements } => ReferenceKind::FineGrid { level: hi + extra_refinements },
    };
    let mut report = StudyReport {
        domain: problem.domain_name.clone(),
        nonlinearity: problem.d.describe(),
        reference: kind,
        reference_max_norm: None,
        records: Vec::new(),
    };
    let fail = |report: &StudyReport, level, stats, source| StudyError {
        level,
        partial: Box::new(report.clone()),
        stats,
        source,
    };
    if lo > hi {
        return Err(fail(&report, lo, None, AnalysisError::EmptyLevels));
    }
    if let Reference::FineGrid { extra_refinements } = reference {
        if *extra_refinements < 1 {
            return Err(fail(&report, hi, None, AnalysisError::ReferenceTooCoarse(*extra_refinements)));
        }
    }
    let top = match kind {
        ReferenceKind::Exact => hi,
        ReferenceKind::FineGrid { level } => level,
    };

    let mut mesh: Arc<TriMesh> = Arc::new(triangulate_convex_polygon(&problem.domain));
    for _ in 0..lo {
        mesh = Arc::new(mesh.refine_uniform());
    }
    let mut solved: Vec<Solved> = Vec::new();
    let quad = QuadRule::seven_point();

    for level in lo..=top {
        if level > lo {
            mesh = Arc::new(mesh.refine_uniform());
        }
        let start = Instant::now();
        let initial = match solved.last() {
            Some(prev) => Some(prev.u.prolongate(&mesh).map_err(|e| fail(&report, level, None, e.into()))?),
            None => None,
        };
        let (u, stats) = match solve_semilinear(&mesh, &*problem.d, &*problem.f, cfg, initial.as_ref()) {
            Ok(v) => v,
            Err(e) => {
                let stats = e.partial_stats().cloned();
                return Err(fail(&report, level, stats, e.into()));
            }
        };
        let wall_time = start.elapsed().as_secs_f64();
        solved.push(Solved { u, stats, wall_time });

        // exact references allow measuring as we go
        if let Reference::Exact(exact) = reference {
            let s = solved.last().unwrap();
            let rec = measure(s, Truth::Exact(exact.as_ref()), &quad, None, report.records.last())
                .map_err(|e| fail(&report, level, None, e))?;
            report.records.push(rec);
        }
    }

    if let ReferenceKind::FineGrid { .. } = kind {
        let reference_u = solved.pop().expect("reference level solved").u;
        report.reference_max_norm = Some(reference_u.max_norm());
        for s in solved.iter().take(hi - lo + 1) {
            let bound = verify_uniform_bound(&s.u, &reference_u);
            let rec = measure(s, Truth::Discrete(&reference_u), &quad, Some(bound), report.records.last())
                .map_err(|e| fail(&report, s.u.mesh().level(), None, e))?;
            report.records.push(rec);
        }
    }
    Ok(report)
}

fn measure(
    s: &Solved,
    truth: Truth<'_>,
    quad: &QuadRule,
    uniform_bound: Option<UniformBound>,
    prev: Option<&LevelRecord>,
) -> Result<LevelRecord, AnalysisError> {
    let mesh = s.u.mesh();
    let h = mesh.mesh_size();
    let err_l2 = error_l2(&s.u, truth, quad)?;
    let err_h1semi = error_h1semi(&s.u, truth, quad)?;
    let err_linf = error_linf(&s.u, truth, DEFAULT_LATTICE_DEGREE)?;
    let rate = |f: fn(&LevelRecord) -> f64, e: f64, k: i32| prev.and_then(|p| eoc_log_corrected(f(p), e, p.h, h, k));
    Ok(LevelRecord {
        level: mesh.level(),
        h,
        ndof: mesh.num_interior(),
        err_l2,
        err_h1semi,
        err_linf,
        eoc_l2: prev.and_then(|p| eoc(p.err_l2, err_l2, p.h, h)),
        eoc_h1: prev.and_then(|p| eoc(p.err_h1semi, err_h1semi, p.h, h)),
        eoc_linf: prev.and_then(|p| eoc(p.err_linf, err_linf, p.h, h)),
        log_corrected_eoc_l2: rate(|p| p.err_l2, err_l2, 2),
        log_corrected_eoc_linf: rate(|p| p.err_linf, err_linf, 1),
        newton_iterations: s.stats.newton_iterations,
        wall_time: s.wall_time,
        solution_max_norm: s.u.max_norm(),
        uniform_bound,
    })
}
