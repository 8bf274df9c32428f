//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{run_convergence_study, Problem, StudyReport};
use crate::config::RunConfig;
use crate::io::{read_mesh, write_function, write_mesh};
use crate::mesh::{build_level, TriMesh};
use crate::solver::{solve_semilinear, SolveStats};
use crate::validate::run_validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "semilinear-fem", version, about = "P1 finite elements for -Δu + d(x,u) = f on convex polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the level-L mesh and write it to a file.
    Mesh(Common),
    /// Solve on one mesh and write the nodal solution.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Solve on this mesh file instead of building one.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Run a convergence study and write the CSV.
    Study(Common),
    /// Run the built-in checks.
    Validate,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    level: Option<String>,
    /// Level range `a..b`.
    #[arg(long)]
    levels: Option<String>,
    /// Preset name or polygon file.
    #[arg(long)]
    domain: Option<String>,
}

struct Failure {
    code: i32,
    msg: String,
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.to_string() }
}

fn load_config(common: &Common, mesh: Option<&Path>) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    let overrides = [
        ("domain", common.domain.clone()),
        ("level", common.level.clone()),
        ("levels", common.levels.clone()),
        ("output", common.output.as_ref().map(|p| p.display().to_string())),
        ("mesh", mesh.map(|p| p.display().to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(usage)?;
        }
    }
    cfg.check().map_err(usage)?;
    Ok(cfg)
}

fn domain_mesh(cfg: &RunConfig, level: usize) -> Result<Arc<TriMesh>, Failure> {
    cfg.domain().map_err(usage)?;
    let polygon = cfg.load_polygon().map_err(|e| usage(format!("domain {}: {e}", cfg.domain.as_ref().unwrap().name())))?;
    Ok(build_level(&polygon, level))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    usage(format!("cannot write {}: {e}", path.display()))
}

fn cmd_mesh(common: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load_config(common, None)?;
    let mesh = domain_mesh(&cfg, cfg.level)?;
    let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from("mesh.txt"));
    let mut w = create(&path)?;
    write_mesh(&mesh, &mut w).map_err(|e| io_fail(&path, e))?;
    w.flush().map_err(|e| io_fail(&path, e))?;
    let _ = writeln!(out, "level {}", mesh.level());
    let _ = writeln!(out, "nv {}", mesh.num_vertices());
    let _ = writeln!(out, "nt {}", mesh.num_triangles());
    let _ = writeln!(out, "h {:.9e}", mesh.mesh_size());
    Ok(())
}

fn print_stats(w: &mut dyn Write, ndof: usize, stats: &SolveStats) {
    let _ = writeln!(w, "ndof {ndof}");
    let _ = writeln!(w, "newton_iterations {}", stats.newton_iterations);
    let _ = writeln!(w, "cg_iterations {}", stats.total_cg_iterations);
    let _ = writeln!(w, "final_residual {:.3e}", stats.final_residual_norm);
}

fn cmd_solve(common: &Common, mesh_arg: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load_config(common, mesh_arg)?;
    let mesh = match &cfg.mesh {
        Some(path) => {
            let f = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Arc::new(read_mesh(BufReader::new(f)).map_err(|e| usage(format!("{}: {e}", path.display())))?)
        }
        None => domain_mesh(&cfg, cfg.level)?,
    };
    let d = cfg.nonlinearity.build().map_err(usage)?;
    let f = cfg.source(&d);
    match solve_semilinear(&mesh, &*d, &*f, &cfg.solver, None) {
        Ok((u, stats)) => {
            let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from("solution.txt"));
            let mut w = create(&path)?;
            write_function(&u, &mut w).map_err(|e| io_fail(&path, e))?;
            w.flush().map_err(|e| io_fail(&path, e))?;
            print_stats(out, mesh.num_interior(), &stats);
            Ok(())
        }
        Err(e) => {
            if let Some(stats) = e.partial_stats() {
                print_stats(err, mesh.num_interior(), stats);
            }
            Err(Failure { code: EXIT_NUMERICAL, msg: e.to_string() })
        }
    }
}

fn write_csv(path: &Path, report: &StudyReport) -> Result<(), Failure> {
    std::fs::write(path, report.to_csv()).map_err(|e| io_fail(path, e))
}

fn cmd_study(common: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load_config(common, None)?;
    let domain_name = cfg.domain().map_err(usage)?.name();
    let polygon = cfg.load_polygon().map_err(|e| usage(format!("domain {domain_name}: {e}")))?;
    let d = cfg.nonlinearity.build().map_err(usage)?;
    let f = cfg.source(&d);
    let problem = Problem { domain: polygon, domain_name, d, f };
    let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from("study.csv"));
    match run_convergence_study(&problem, cfg.levels.clone(), &cfg.study_reference(), &cfg.solver) {
        Ok(report) => {
            write_csv(&path, &report)?;
            let _ = writeln!(out, "{} levels written to {}", report.records.len(), path.display());
            if let Some(last) = report.last() {
                let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
                let _ = writeln!(
                    out,
                    "final eoc_l2 {} eoc_h1 {} eoc_linf {}",
                    fmt(last.eoc_l2),
                    fmt(last.eoc_h1),
                    fmt(last.eoc_linf)
                );
            }
            Ok(())
        }
        Err(e) => {
            write_csv(&path, &e.partial)?;
            if let Some(stats) = &e.stats {
                print_stats(err, 0, stats);
            }
            Err(Failure { code: EXIT_NUMERICAL, msg: e.to_string() })
        }
    }
}

fn cmd_validate(out: &mut dyn Write) -> Result<(), Failure> {
    let results = run_validation();
    let failed = results.iter().filter(|c| !c.passed).count();
    for c in &results {
        let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(out, "{} checks, {failed} failed", results.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure { code: EXIT_NUMERICAL, msg: format!("{failed} checks failed") })
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Mesh(common) => cmd_mesh(common, out),
        Command::Solve { common, mesh } => cmd_solve(common, mesh.as_deref(), out, err),
        Command::Study(common) => cmd_study(common, out, err),
        Command::Validate => cmd_validate(out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}
