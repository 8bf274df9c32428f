use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semilinear-fem"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"))
}

#[test]
fn mesh_counts_per_level() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["mesh", "--domain", "unit-square", "--level", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "nv "), "5");
    assert_eq!(field(&stdout(&o), "nt "), "4");
    assert!(dir.path().join("mesh.txt").exists());

    let o = run(dir.path(), &["mesh", "--domain", "unit-square", "--level", "1", "--output", "m1.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "nt "), "16");
    let header = fs::read_to_string(dir.path().join("m1.txt")).unwrap();
    assert_eq!(header.lines().next().unwrap().split_whitespace().collect::<Vec<_>>(), ["13", "16"]);
}

#[test]
fn concave_polygon_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    // the third vertex points inwards
    fs::write(dir.path().join("dent.txt"), "# dented square\n0 0\n1 0\n0.5 0.2\n1 1\n0 1\n").unwrap();
    let o = run(dir.path(), &["mesh", "--domain", "dent.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("vertex 2"), "{}", stderr(&o));
}

#[test]
fn missing_domain_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'domain'"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.cfg"), "domain = unit-square\ncolour = red\n").unwrap();
    let o = run(dir.path(), &["solve", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn zero_weight_and_zero_source_give_zero_solution() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "domain = paper-pentagon\nlevel = 2\nweight = 0\nrhs = constant 0\nexponent = 1/3\n",
    )
    .unwrap();
    let o = run(dir.path(), &["solve", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("solution.txt")).unwrap();
    let mut lines = text.lines();
    let nv: usize = lines.next().unwrap().trim().parse().unwrap();
    let values: Vec<f64> = lines.map(|l| l.trim().parse().unwrap()).collect();
    assert_eq!(values.len(), nv);
    assert!(values.iter().all(|&v| v == 0.0));
}

#[test]
fn solve_on_written_mesh_matches_domain_solve() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["mesh", "--domain", "paper-pentagon", "--level", "3", "--output", "m.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = "domain = paper-pentagon\nscale = 50\nexponent = 1/3\nshift = -1\nlevel = 3\n";
    fs::write(dir.path().join("run.cfg"), cfg).unwrap();
    let a = run(dir.path(), &["solve", "--config", "run.cfg", "--output", "a.txt"]);
    let b = run(dir.path(), &["solve", "--config", "run.cfg", "--mesh", "m.txt", "--output", "b.txt"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(field(&stdout(&a), "ndof "), field(&stdout(&b), "ndof "));
    let read = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap();
    assert_eq!(read("a.txt"), read("b.txt"));
    let residual: f64 = field(&stdout(&a), "final_residual ").parse().unwrap();
    assert!(residual <= 1e-10);
}

#[test]
fn non_convergence_exits_with_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = "domain = paper-pentagon\nscale = 50\nexponent = 1/3\nshift = -1\nlevel = 3\nmax_newton = 1\n";
    fs::write(dir.path().join("run.cfg"), cfg).unwrap();
    let o = run(dir.path(), &["solve", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("newton_iterations 1"), "{}", stderr(&o));
}

#[test]
fn manufactured_study_writes_csv() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "domain = unit-square\nexponent = 1/2\nrhs = manufactured\nreference = exact\nlevels = 2..5\n",
    )
    .unwrap();
    let o = run(dir.path(), &["study", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("4 levels written"));
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().next().unwrap().starts_with("level,"));
}

#[test]
fn single_level_study_has_empty_rates() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["study", "--domain", "unit-triangle", "--levels", "3..3", "--output", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains(",,,,"));
}

#[test]
fn validate_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL "));
    assert!(stdout(&o).trim_end().ends_with("0 failed"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["mesh", "--domain", "unit-square", "--level", "x"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["mesh", "--domain", "no-such-file.txt"]).status.code(), Some(2));
}
