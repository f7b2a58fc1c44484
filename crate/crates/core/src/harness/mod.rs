//! Manufactured solutions, error norms, convergence studies and the CLI.

pub mod cli;
mod solutions;
mod study;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub use solutions::{manufactured, ManufacturedSolution, SolutionName};
pub use study::{
    default_preconditioner, pick_victims, quality_csv, run_convergence_study, run_odd_degree_study,
    run_quality_study, ConvergenceConfig, Domain, OddDegreeConfig, QualityConfig, QualityRow,
};

use crate::assembly::{assemble_aesfem, assemble_fem_p1, recover_solution, AssemblyOptions, LinearSystem, PdeKind, PdeSpec};
use crate::error::{Error, Result};
use crate::linalg::{cg, gmres, Precond, PrecondKind, SolverOptions, SolverReport};
use crate::mesh::{HalfFacetMap, Mesh};
use crate::quadrature::{simplex_rule, SimplexMap};

/// `(Linf, L2)` of `numeric - exact`; L2 integrates the piecewise-linear
/// interpolant of the nodal error.
pub fn error_norms(mesh: &Mesh, numeric: &[f64], exact: &dyn Fn(&[f64; 3]) -> f64) -> Result<(f64, f64)> {
    if numeric.len() != mesh.node_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.node_count(),
            got: numeric.len(),
        });
    }
    let err: Vec<f64> = (0..mesh.node_count())
        .map(|v| numeric[v] - exact(&mesh.point(v)))
        .collect();
    let linf = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rule = simplex_rule(mesh.dim(), 2)?;
    let mut l2 = 0.0;
    for e in 0..mesh.elem_count() {
        let map = SimplexMap::new(mesh, e)?;
        let conn = mesh.elem(e);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let v: f64 = conn.iter().zip(b).map(|(&n, bk)| bk * err[n]).sum();
            l2 += w * map.det * v * v;
        }
    }
    Ok((linf, l2.sqrt()))
}

/// Average convergence rate between two meshes from their node counts.
pub fn convergence_rate(coarse: (usize, f64), fine: (usize, f64), dim: usize) -> Result<f64> {
    let (nc, ec) = coarse;
    let (nf, ef) = fine;
    if !(ec > 0.0 && ef > 0.0) {
        return Err(Error::Invalid(format!("rates need positive errors, got {ec} and {ef}")));
    }
    if nc == nf {
        return Err(Error::Invalid("rates need different node counts".into()));
    }
    let hr = ((nc as f64) / (nf as f64)).powf(1.0 / dim as f64);
    Ok(-(ec / ef).log2() / hr.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    AesFem(usize),
    FemP1,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::AesFem(_) => "aesfem",
            Method::FemP1 => "fem1",
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Method::AesFem(d) => *d,
            Method::FemP1 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    /// `None` picks IC(0) for CG on P1 Poisson and ILU(0) otherwise.
    pub precond: Option<PrecondKind>,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Record wall-clock times; off keeps output bit-reproducible.
    pub timing: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            precond: None,
            tol: 1e-12,
            restart: 60,
            max_iter: 20_000,
            timing: false,
        }
    }
}

/// Whether a method/PDE pair is solved with CG.
pub fn uses_cg(method: Method, pde: &PdeSpec) -> bool {
    method == Method::FemP1 && pde.kind == PdeKind::Poisson
}

/// Solves an assembled system with the solver the method calls for.
pub fn solve_system(sys: &LinearSystem, use_cg: bool, settings: &SolveSettings) -> Result<(Vec<f64>, SolverReport)> {
    let kind = match (settings.precond, use_cg) {
        (Some(PrecondKind::GaussSeidel), true) => PrecondKind::SymmetricGaussSeidel,
        (Some(k), _) => k,
        (None, true) => PrecondKind::Ic0,
        (None, false) => PrecondKind::Ilu0,
    };
    let precond = Precond::build(kind, &sys.a)?;
    let opts = SolverOptions {
        tol: settings.tol,
        max_iter: settings.max_iter,
        restart: settings.restart,
    };
    if use_cg {
        cg(&sys.a, &sys.b, &precond, &opts)
    } else {
        gmres(&sys.a, &sys.b, &precond, &opts)
    }
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub field: Vec<f64>,
    pub linf: f64,
    pub l2: f64,
    pub report: SolverReport,
    pub assemble_s: f64,
    pub solve_s: f64,
    pub system: LinearSystem,
}

pub fn assemble(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    method: Method,
    pde: &PdeSpec,
    asm: &AssemblyOptions,
) -> Result<LinearSystem> {
    match method {
        Method::AesFem(d) => Ok(assemble_aesfem(mesh, hf, pde, d, asm)?.0),
        Method::FemP1 => assemble_fem_p1(mesh, pde, asm.quad_exactness),
    }
}

/// Assembles, solves and measures one case.
pub fn solve_case(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    method: Method,
    pde: &PdeSpec,
    exact: &ManufacturedSolution,
    asm: &AssemblyOptions,
    settings: &SolveSettings,
) -> Result<CaseOutcome> {
    let t0 = Instant::now();
    let system = assemble(mesh, hf, method, pde, asm)?;
    let t1 = Instant::now();
    let (x, mut report) = solve_system(&system, uses_cg(method, pde), settings)?;
    let t2 = Instant::now();
    let field = recover_solution(&system, &x)?;
    let (linf, l2) = error_norms(mesh, &field, &|p| exact.value(p))?;
    let (assemble_s, solve_s) = if settings.timing {
        ((t1 - t0).as_secs_f64(), (t2 - t1).as_secs_f64())
    } else {
        report.wall_time = 0.0;
        (0.0, 0.0)
    };
    Ok(CaseOutcome {
        field,
        linf,
        l2,
        report,
        assemble_s,
        solve_s,
        system,
    })
}

pub const CSV_HEADER: &str = "method,degree,nodes,h_proxy,linf,l2,iters,cond,assemble_s,solve_s";

/// One line of a study CSV. Rate rows carry the Linf and L2 rates in the
/// error columns and the finest node count in `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub method: String,
    pub degree: usize,
    pub nodes: usize,
    pub h_proxy: f64,
    pub linf: f64,
    pub l2: f64,
    pub iters: usize,
    pub cond: Option<f64>,
    pub assemble_s: f64,
    pub solve_s: f64,
}

impl CsvRow {
    pub fn is_rate(&self) -> bool {
        self.method.starts_with("rate:")
    }

    pub fn to_csv(&self) -> String {
        let cond = self.cond.map_or(String::new(), |c| format!("{c:e}"));
        format!(
            "{},{},{},{:e},{:e},{:e},{},{},{:e},{:e}",
            self.method,
            self.degree,
            self.nodes,
            self.h_proxy,
            self.linf,
            self.l2,
            self.iters,
            cond,
            self.assemble_s,
            self.solve_s
        )
    }
}

pub fn csv_string(rows: &[CsvRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(s, "{}", r.to_csv());
    }
    s
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    std::fs::write(path, csv_string(rows)).map_err(|e| Error::io(path, e))
}

/// Appends one rate row per series (method and degree), computed from the
/// coarsest and finest data rows.
pub fn append_rates(rows: &mut Vec<CsvRow>, dim: usize) -> Result<()> {
    let mut series: Vec<(String, usize)> = Vec::new();
    for r in rows.iter() {
        let key = (r.method.clone(), r.degree);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut out = Vec::new();
    for (method, degree) in series {
        let data: Vec<&CsvRow> = rows
            .iter()
            .filter(|r| r.method == method && r.degree == degree)
            .collect();
        if data.len() < 2 {
            continue;
        }
        let (c, f) = (data[0], data[data.len() - 1]);
        let rate = |a: f64, b: f64| convergence_rate((c.nodes, a), (f.nodes, b), dim).unwrap_or(f64::NAN);
        out.push(CsvRow {
            method: format!("rate:{method}"),
            degree,
            nodes: f.nodes,
            h_proxy: f.h_proxy,
            linf: rate(c.linf, f.linf),
            l2: rate(c.l2, f.l2),
            iters: 0,
            cond: None,
            assemble_s: 0.0,
            solve_s: 0.0,
        });
    }
    rows.extend(out);
    Ok(())
}

/// Sizes the global thread pool from `AESFEM_THREADS` (0 or unset = auto).
pub fn init_threads() {
    let n = std::env::var("AESFEM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
