//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 on usage or input errors, 2 on numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::study::quality_csv;
use super::{
    manufactured, run_convergence_study, run_odd_degree_study, run_quality_study, solve_case,
    write_csv, ConvergenceConfig, Domain, Method, OddDegreeConfig, QualityConfig, SolutionName, SolveSettings,
};
use crate::assembly::{AssemblyOptions, PdeKind, PdeSpec};
use crate::error::{Error, Result};
use crate::glp::{solve_glp_with_system, ColumnNorm, GlpOptions, StencilFrame};
use crate::linalg::PrecondKind;
use crate::mesh::{build_half_facets, load_mesh, save_native, select_stencil, Mesh, MeshFormat};

#[derive(Parser, Debug)]
#[command(name = "aesfem", version, about = "Adaptive extended stencil FEM solver and study driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh and write it in the native format.
    Gen(GenArgs),
    /// Solve one manufactured problem and print the errors.
    Solve(SolveArgs),
    /// Refinement study; writes a CSV with rate rows.
    Convergence(ConvergenceArgs),
    /// 1D odd-degree study on uniform and alternating grids.
    OddDegree(OddDegreeArgs),
    /// Element-quality sweep.
    Quality(QualityArgs),
    /// Dump V, W, S and C for one node as CSV.
    BasisDump(BasisDumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PdeArg {
    Poisson,
    Convdiff,
}

impl From<PdeArg> for PdeKind {
    fn from(p: PdeArg) -> Self {
        match p {
            PdeArg::Poisson => PdeKind::Poisson,
            PdeArg::Convdiff => PdeKind::ConvectionDiffusion,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Two,
    Inf,
}

#[derive(Args, Debug, Clone)]
struct Tunables {
    /// Stencil ratio (nodes per monomial).
    #[arg(long, default_value_t = crate::mesh::DEFAULT_STENCIL_RATIO)]
    ratio: f64,
    /// Weight epsilon.
    #[arg(long)]
    eps: Option<f64>,
    /// Column scaling norm.
    #[arg(long, value_enum, default_value = "two")]
    norm: NormArg,
    #[arg(long)]
    quad_exactness: Option<usize>,
    /// none, jacobi, gs, sgs, ilu0, ic0.
    #[arg(long)]
    precond: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 60)]
    restart: usize,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Record wall-clock times.
    #[arg(long)]
    timing: bool,
}

impl Tunables {
    fn assembly(&self) -> AssemblyOptions {
        let mut glp = GlpOptions::default();
        if let Some(e) = self.eps {
            glp.eps = e;
        }
        glp.norm = match self.norm {
            NormArg::Two => ColumnNorm::Two,
            NormArg::Inf => ColumnNorm::Inf,
        };
        AssemblyOptions {
            stencil_ratio: self.ratio,
            glp,
            quad_exactness: self.quad_exactness,
        }
    }

    fn meta(&self, solver: &SolveSettings) -> String {
        let asm = self.assembly();
        let quad = match asm.quad_exactness {
            Some(q) => q.to_string(),
            None => "max(degree+1,2)".into(),
        };
        let precond = solver.precond.map_or("auto".to_string(), |p| format!("{p:?}").to_lowercase());
        format!(
            "stencil_ratio={}\neps={}\ncolumn_norm={:?}\npivot_tol={}\nquad_exactness={quad}\nprecond={precond}\ntol={}\nrestart={}\nmax_iter={}\n",
            asm.stencil_ratio, asm.glp.eps, asm.glp.norm, asm.glp.pivot_tol, solver.tol, solver.restart, solver.max_iter
        )
    }

    fn solver(&self) -> Result<SolveSettings> {
        let precond = match &self.precond {
            Some(p) => Some(p.parse::<PrecondKind>()?),
            None => None,
        };
        Ok(SolveSettings {
            precond,
            tol: self.tol,
            restart: self.restart,
            max_iter: self.max_iter,
            timing: self.timing,
        })
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// interval, square, cube or disc; defaults to the box of `--dim`.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Divisions per side (rings for the disc).
    #[arg(long, default_value_t = 8)]
    divisions: usize,
    /// Interior node jitter as a fraction of the spacing.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, value_enum, default_value = "poisson")]
    pde: PdeArg,
    #[arg(long, default_value = "u2")]
    solution: String,
    /// Basis degree; 1 with `--fem` selects linear FEM.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Use standard linear FEM instead of AES-FEM.
    #[arg(long)]
    fem: bool,
    /// Velocity components.
    #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
    c: Vec<f64>,
    /// Write the stiffness matrix in Matrix Market format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    #[command(flatten)]
    tune: Tunables,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[arg(long, default_value = "square")]
    domain: String,
    #[arg(long, value_enum, default_value = "poisson")]
    pde: PdeArg,
    #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
    c: Vec<f64>,
    #[arg(long, default_value = "u2")]
    solution: String,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Size of the coarsest mesh; each level doubles it.
    #[arg(long, default_value_t = 8)]
    base: usize,
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the linear FEM baseline.
    #[arg(long)]
    no_fem: bool,
    /// Add condition estimates.
    #[arg(long)]
    cond: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tune: Tunables,
}

#[derive(Args, Debug)]
struct OddDegreeArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,5")]
    degrees: Vec<usize>,
    /// Alternating cell-length ratios.
    #[arg(long = "grid-ratios", value_delimiter = ',', default_value = "1,10,1000")]
    grid_ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    cells: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tune: Tunables,
}

#[derive(Args, Debug)]
struct QualityArgs {
    #[arg(long, default_value = "square")]
    domain: String,
    #[arg(long, default_value_t = 24)]
    size: usize,
    #[arg(long, default_value_t = 0.3)]
    perturb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1,1e-1,1e-2,1e-3,1e-4")]
    factors: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    victims: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tune: Tunables,
}

#[derive(Args, Debug)]
struct BasisDumpArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    node: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tune: Tunables,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Unsupported { .. }
        | Error::Invalid(_)
        | Error::InvalidMesh(_)
        | Error::NonManifoldFacet(_) => 1,
        _ => 2,
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Convergence(a) => convergence(a),
        Command::OddDegree(a) => odd_degree(a),
        Command::Quality(a) => quality(a),
        Command::BasisDump(a) => basis_dump(a),
    }
}

fn velocity(c: &[f64]) -> Result<[f64; 3]> {
    if c.is_empty() || c.len() > 3 {
        return Err(Error::Invalid(format!("--c needs 1 to 3 components, got {}", c.len())));
    }
    let mut v = [0.0; 3];
    v[..c.len()].copy_from_slice(c);
    Ok(v)
}

fn warn_odd(degree: usize) {
    if degree % 2 == 1 && degree > 1 {
        eprintln!(
            "warning: degree {degree} is odd; even-order PDEs should use even-degree bases, \
             odd degrees lose an order on near-uniform meshes"
        );
    }
}

fn read_mesh(path: &Path) -> Result<Mesh> {
    load_mesh(path, MeshFormat::from_path(path))
}

fn gen(a: GenArgs) -> Result<i32> {
    let domain = match &a.domain {
        Some(d) => d.parse::<Domain>()?,
        None => match a.dim {
            1 => Domain::Interval,
            2 => Domain::Square,
            3 => Domain::Cube,
            d => {
                return Err(Error::Unsupported {
                    what: "mesh dimension",
                    value: d.to_string(),
                })
            }
        },
    };
    let mesh = domain.mesh(a.divisions, a.perturb, a.seed)?;
    save_native(&mesh, &a.out)?;
    println!(
        "wrote {} ({} nodes, {} elements)",
        a.out.display(),
        mesh.node_count(),
        mesh.elem_count()
    );
    Ok(0)
}

fn solve(a: SolveArgs) -> Result<i32> {
    let mesh = read_mesh(&a.mesh)?;
    let dim = mesh.dim();
    let name: SolutionName = a.solution.parse()?;
    let sol = manufactured(name, dim)?;
    let pde: PdeSpec = match PdeKind::from(a.pde) {
        PdeKind::Poisson => sol.poisson(),
        PdeKind::ConvectionDiffusion => sol.convection_diffusion(velocity(&a.c)?),
    };
    let method = if a.fem { Method::FemP1 } else { Method::AesFem(a.degree) };
    if !a.fem {
        warn_odd(a.degree);
    }
    let hf = build_half_facets(&mesh)?;
    let out = solve_case(&mesh, &hf, method, &pde, &sol, &a.tune.assembly(), &a.tune.solver()?)?;
    if let Some(p) = &a.dump_matrix {
        out.system.write_matrix_market(p)?;
    }
    println!("nodes {}", mesh.node_count());
    println!("linf {:e}", out.linf);
    println!("l2 {:e}", out.l2);
    println!("iterations {}", out.report.iterations);
    println!("converged {}", out.report.converged);
    if a.tune.timing {
        println!("assemble_s {:e}", out.assemble_s);
        println!("solve_s {:e}", out.solve_s);
    }
    if !out.report.converged {
        eprintln!(
            "error: solver stopped at relative residual {:e}",
            out.report.final_relative_residual
        );
        return Ok(2);
    }
    Ok(0)
}

/// Writes `key=value` run settings next to a study CSV as `<out>.meta`.
fn write_meta(out: &Path, command: &str, body: &str) -> Result<()> {
    let mut p = out.as_os_str().to_owned();
    p.push(".meta");
    let p = PathBuf::from(p);
    let text = format!("command={command}\nversion={}\n{body}", env!("CARGO_PKG_VERSION"));
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
}

fn convergence(a: ConvergenceArgs) -> Result<i32> {
    let domain: Domain = a.domain.parse()?;
    let mut cfg = ConvergenceConfig::new(domain, a.solution.parse()?, a.degrees.clone(), a.base, a.levels);
    cfg.pde = a.pde.into();
    cfg.velocity = velocity(&a.c)?;
    cfg.perturb = a.perturb;
    cfg.seed = a.seed;
    cfg.include_p1 = !a.no_fem;
    cfg.condition = a.cond;
    cfg.assembly = a.tune.assembly();
    cfg.solver = a.tune.solver()?;
    for &d in &a.degrees {
        warn_odd(d);
    }
    let rows = run_convergence_study(&cfg)?;
    write_csv(&a.out, &rows)?;
    let mut meta = format!(
        "domain={domain}\npde={:?}\nsolution={}\nperturb={}\nseed={}\nrate=total node count, coarsest vs finest\n",
        cfg.pde, a.solution, cfg.perturb, cfg.seed
    );
    if a.cond {
        meta.push_str("cond=lanczos lower bound on the 2-norm condition number\n");
    }
    meta.push_str(&a.tune.meta(&cfg.solver));
    write_meta(&a.out, "convergence", &meta)?;
    for r in rows.iter().filter(|r| r.is_rate()) {
        println!("{} degree {}: linf rate {:.3}, l2 rate {:.3}", r.method, r.degree, r.linf, r.l2);
    }
    Ok(0)
}

fn odd_degree(a: OddDegreeArgs) -> Result<i32> {
    let cfg = OddDegreeConfig {
        degrees: a.degrees,
        ratios: a.grid_ratios,
        cells: a.cells,
        solution: SolutionName::Smooth1d,
        assembly: a.tune.assembly(),
        solver: a.tune.solver()?,
    };
    let rows = run_odd_degree_study(&cfg)?;
    write_csv(&a.out, &rows)?;
    let meta = format!(
        "grid=cells alternate long and long/ratio starting with a long cell, scaled to [0,1]\nsolution=smooth1d\n{}",
        a.tune.meta(&cfg.solver)
    );
    write_meta(&a.out, "odd-degree", &meta)?;
    for r in rows.iter().filter(|r| r.is_rate()) {
        println!("{} degree {}: linf rate {:.3}, l2 rate {:.3}", r.method, r.degree, r.linf, r.l2);
    }
    Ok(0)
}

fn quality(a: QualityArgs) -> Result<i32> {
    let mut solver = a.tune.solver()?;
    // the sweep defaults to a looser tolerance
    if a.tune.tol == 1e-12 {
        solver.tol = 1e-8;
    }
    let cfg = QualityConfig {
        domain: a.domain.parse()?,
        size: a.size,
        perturb: a.perturb,
        seed: a.seed,
        factors: a.factors,
        victims: a.victims,
        degrees: a.degrees,
        assembly: a.tune.assembly(),
        solver,
        ..QualityConfig::default()
    };
    let rows = run_quality_study(&cfg)?;
    std::fs::write(&a.out, quality_csv(&rows)).map_err(|e| Error::io(&a.out, e))?;
    let meta = format!(
        "domain={}\nsize={}\nperturb={}\nseed={}\nvictims={}\ncond=lanczos with exact LU inverse up to {} rows, lanczos lower bound above\n{}",
        cfg.domain,
        cfg.size,
        cfg.perturb,
        cfg.seed,
        cfg.victims,
        cfg.dense_limit,
        a.tune.meta(&cfg.solver)
    );
    write_meta(&a.out, "quality", &meta)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(0)
}

fn basis_dump(a: BasisDumpArgs) -> Result<i32> {
    let mesh = read_mesh(&a.mesh)?;
    if a.node >= mesh.node_count() {
        return Err(Error::Invalid(format!(
            "node {} out of range ({} nodes)",
            a.node,
            mesh.node_count()
        )));
    }
    let hf = build_half_facets(&mesh)?;
    let opts = a.tune.assembly();
    let stencil = select_stencil(&mesh, &hf, a.node, a.degree, opts.stencil_ratio)?;
    let frame = StencilFrame::new(&mesh, &stencil);
    let (basis, sys) = solve_glp_with_system(&frame, a.degree, &opts.glp, a.node)?;
    let mut s = String::from("matrix,row,col,value\n");
    for i in 0..sys.v.nrows() {
        for j in 0..sys.v.ncols() {
            let _ = writeln!(s, "V,{i},{j},{:e}", sys.v[(i, j)]);
        }
    }
    for (i, w) in sys.w.iter().enumerate() {
        let _ = writeln!(s, "W,{i},{i},{w:e}");
    }
    for (j, v) in sys.s.iter().enumerate() {
        let _ = writeln!(s, "S,{j},{j},{v:e}");
    }
    for i in 0..basis.coeffs.nrows() {
        for j in 0..basis.coeffs.ncols() {
            let _ = writeln!(s, "C,{i},{j},{:e}", basis.coeffs[(i, j)]);
        }
    }
    match &a.out {
        Some(p) => std::fs::write(p, s).map_err(|e| Error::io(p, e))?,
        None => print!("{s}"),
    }
    Ok(0)
}
