use std::path::Path;
use std::process::{Command, Output};

use aesfem::harness::CSV_HEADER;
use aesfem::linalg::CsrMatrix;

fn aesfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aesfem"))
        .args(args)
        .output()
        .expect("spawn aesfem")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_square(dir: &Path, div: &str) -> std::path::PathBuf {
    let m = dir.join("m.mesh");
    let out = aesfem(&["gen", "--dim", "2", "--divisions", div, "--out", s(&m)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    m
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in output:\n{stdout}"))
}

#[test]
fn gen_then_solve_prints_errors() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "8");
    let out = aesfem(&["solve", "--mesh", s(&m), "--pde", "poisson", "--solution", "u2", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let linf = field(&text, "linf ");
    let l2 = field(&text, "l2 ");
    assert!(linf.is_finite() && l2.is_finite() && l2 > 0.0 && linf < 0.1);
    assert!(field(&text, "iterations ") >= 1.0);
}

#[test]
fn convergence_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = aesfem(&[
        "convergence", "--domain", "square", "--pde", "convdiff", "--c", "1,1", "--solution", "u2", "--degrees",
        "2,4,6", "--levels", "4", "--out", s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.iter().filter(|l| l.starts_with("rate:")).count(), 4);
    assert_eq!(lines.len(), 1 + 16 + 4);
    let meta = std::fs::read_to_string(dir.path().join("s.csv.meta")).unwrap();
    assert!(meta.contains("command=convergence") && meta.contains("quad_exactness=max(degree+1,2)"));
}

#[test]
fn odd_degree_warns_but_solves() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "6");
    let out = aesfem(&["solve", "--mesh", s(&m), "--pde", "poisson", "--solution", "u2", "--degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning") && err.contains("even-degree"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let out = aesfem(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(aesfem(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(aesfem(&["solve", "--mesh", "/nonexistent/m.mesh"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "4");
    assert_eq!(aesfem(&["solve", "--mesh", s(&m), "--solution", "u9"]).status.code(), Some(1));
    assert_eq!(aesfem(&["solve", "--mesh", s(&m), "--precond", "magic"]).status.code(), Some(1));
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "12");
    let out = aesfem(&["solve", "--mesh", s(&m), "--degree", "4", "--max-iter", "2", "--precond", "none"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrix_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "6");
    let mtx = dir.path().join("a.mtx");
    let out = aesfem(&["solve", "--mesh", s(&m), "--degree", "2", "--dump-matrix", s(&mtx)]);
    assert!(out.status.success());
    let a = CsrMatrix::read_matrix_market(&mtx).unwrap();
    // 7x7 grid, 25 interior unknowns
    assert_eq!((a.nrows, a.ncols), (25, 25));
    assert!(std::fs::read_to_string(&mtx).unwrap().starts_with("%%MatrixMarket matrix coordinate real general"));
}

#[test]
fn basis_dump_lists_all_factors() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_square(dir.path(), "6");
    let out = aesfem(&["basis-dump", "--mesh", s(&m), "--node", "24", "--degree", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("matrix,row,col,value"));
    for tag in ["V,", "W,", "S,", "C,"] {
        assert!(text.lines().any(|l| l.starts_with(tag)), "missing {tag}");
    }
    // six monomials, so six S entries
    assert_eq!(text.lines().filter(|l| l.starts_with("S,")).count(), 6);
}

#[test]
fn quality_and_odd_degree_studies_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    let out = aesfem(&["quality", "--size", "10", "--degrees", "2", "--factors", "1,1e-3", "--out", s(&q)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&q).unwrap();
    assert!(text.starts_with("t,min_angle,method,degree,cond,iters,converged,status"));
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(std::fs::read_to_string(dir.path().join("q.csv.meta")).unwrap().contains("cond=lanczos"));

    let o = dir.path().join("o.csv");
    let out = aesfem(&["odd-degree", "--cells", "8,16,32", "--out", s(&o)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&o).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("rate:aesfem@ratio=1000,")).count(), 2);
    assert!(std::fs::read_to_string(dir.path().join("o.csv.meta")).unwrap().contains("grid=cells alternate"));
}

#[test]
fn run_returns_codes_in_process() {
    assert_eq!(aesfem::harness::cli::run(["aesfem", "--help"]), 0);
    assert_eq!(aesfem::harness::cli::run(["aesfem", "gen"]), 1);
}
