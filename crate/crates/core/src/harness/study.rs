use std::fmt;
use std::str::FromStr;

use super::{
    append_rates, assemble, manufactured, solve_case, solve_system, uses_cg, CsvRow, Method, SolutionName,
    SolveSettings,
};
use crate::assembly::{AssemblyOptions, PdeKind, PdeSpec};
use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, DenseLu, PrecondKind, SolveOperator};
use crate::mesh::{
    altitude_foot, build_half_facets, distort_mesh, generate_box_mesh, generate_disc_mesh, graded_interval_mesh,
    mesh_quality, Mesh,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Interval,
    Square,
    Cube,
    Disc,
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval => 1,
            Domain::Square | Domain::Disc => 2,
            Domain::Cube => 3,
        }
    }

    /// Mesh with `size` divisions per side (rings for the disc).
    pub fn mesh(&self, size: usize, perturb: f64, seed: u64) -> Result<Mesh> {
        match self {
            Domain::Disc => generate_disc_mesh(size),
            d => generate_box_mesh(d.dim(), size, perturb, seed),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "interval" | "line" => Domain::Interval,
            "square" => Domain::Square,
            "cube" => Domain::Cube,
            "disc" | "disk" => Domain::Disc,
            _ => {
                return Err(Error::Unsupported {
                    what: "domain",
                    value: s.to_string(),
                })
            }
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Interval => "interval",
            Domain::Square => "square",
            Domain::Cube => "cube",
            Domain::Disc => "disc",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub domain: Domain,
    pub pde: PdeKind,
    pub velocity: [f64; 3],
    pub solution: SolutionName,
    pub degrees: Vec<usize>,
    /// Mesh sizes, coarsest first.
    pub sizes: Vec<usize>,
    pub perturb: f64,
    pub seed: u64,
    pub include_p1: bool,
    pub condition: bool,
    pub assembly: AssemblyOptions,
    pub solver: SolveSettings,
}

impl ConvergenceConfig {
    /// `levels` meshes with sizes `base * 2^k`.
    pub fn new(domain: Domain, solution: SolutionName, degrees: Vec<usize>, base: usize, levels: usize) -> Self {
        ConvergenceConfig {
            domain,
            pde: PdeKind::Poisson,
            velocity: [1.0, 1.0, 1.0],
            solution,
            degrees,
            sizes: (0..levels).map(|k| base << k).collect(),
            perturb: 0.0,
            seed: 0,
            include_p1: true,
            condition: false,
            assembly: AssemblyOptions::default(),
            solver: SolveSettings::default(),
        }
    }

    fn pde_spec(&self) -> Result<PdeSpec> {
        let sol = manufactured(self.solution, self.domain.dim())?;
        Ok(match self.pde {
            PdeKind::Poisson => sol.poisson(),
            PdeKind::ConvectionDiffusion => sol.convection_diffusion(self.velocity),
        })
    }
}

fn h_proxy(nodes: usize, dim: usize) -> f64 {
    (nodes as f64).powf(-1.0 / dim as f64)
}

/// Data rows grouped by series (AES-FEM degrees in order, then P1), each
/// ordered coarse to fine, followed by one rate row per series.
pub fn run_convergence_study(cfg: &ConvergenceConfig) -> Result<Vec<CsvRow>> {
    if cfg.sizes.len() < 3 {
        return Err(Error::Invalid("a convergence study needs at least 3 meshes".into()));
    }
    let dim = cfg.domain.dim();
    let sol = manufactured(cfg.solution, dim)?;
    let pde = cfg.pde_spec()?;
    let mut methods: Vec<Method> = cfg.degrees.iter().map(|&d| Method::AesFem(d)).collect();
    if cfg.include_p1 {
        methods.push(Method::FemP1);
    }
    let mut grid: Vec<Vec<CsvRow>> = vec![Vec::new(); methods.len()];
    for &size in &cfg.sizes {
        let mesh = cfg.domain.mesh(size, cfg.perturb, cfg.seed)?;
        let hf = build_half_facets(&mesh)?;
        for (k, &method) in methods.iter().enumerate() {
            let out = solve_case(&mesh, &hf, method, &pde, &sol, &cfg.assembly, &cfg.solver)?;
            if !out.report.converged {
                log::warn!(
                    "{} degree {} on {} nodes: solver stopped at relative residual {:e}",
                    method.label(),
                    method.degree(),
                    mesh.node_count(),
                    out.report.final_relative_residual
                );
            }
            let cond = cfg
                .condition
                .then(|| condition_estimate(&out.system.a, None, 100).kappa);
            grid[k].push(CsvRow {
                method: method.label().into(),
                degree: method.degree(),
                nodes: mesh.node_count(),
                h_proxy: h_proxy(mesh.node_count(), dim),
                linf: out.linf,
                l2: out.l2,
                iters: out.report.iterations,
                cond,
                assemble_s: out.assemble_s,
                solve_s: out.solve_s,
            });
        }
    }
    let mut rows: Vec<CsvRow> = grid.into_iter().flatten().collect();
    append_rates(&mut rows, dim)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddDegreeConfig {
    pub degrees: Vec<usize>,
    /// Cell-length ratios of the alternating grids; 1 is uniform.
    pub ratios: Vec<f64>,
    /// Cell counts, coarsest first.
    pub cells: Vec<usize>,
    pub solution: SolutionName,
    pub assembly: AssemblyOptions,
    pub solver: SolveSettings,
}

impl Default for OddDegreeConfig {
    fn default() -> Self {
        OddDegreeConfig {
            degrees: vec![3, 5],
            ratios: vec![1.0, 10.0, 1000.0],
            cells: vec![16, 32, 64, 128],
            solution: SolutionName::Smooth1d,
            assembly: AssemblyOptions::default(),
            solver: SolveSettings::default(),
        }
    }
}

/// 1D Poisson with odd-degree bases on uniform and alternating grids.
/// Series are labelled `aesfem@ratio=R`.
pub fn run_odd_degree_study(cfg: &OddDegreeConfig) -> Result<Vec<CsvRow>> {
    let sol = manufactured(cfg.solution, 1)?;
    let pde = sol.poisson();
    let mut rows = Vec::new();
    for &degree in &cfg.degrees {
        for &ratio in &cfg.ratios {
            for &cells in &cfg.cells {
                let mesh = graded_interval_mesh(cells, ratio)?;
                let hf = build_half_facets(&mesh)?;
                let out = solve_case(&mesh, &hf, Method::AesFem(degree), &pde, &sol, &cfg.assembly, &cfg.solver)?;
                rows.push(CsvRow {
                    method: format!("aesfem@ratio={ratio}"),
                    degree,
                    nodes: mesh.node_count(),
                    h_proxy: h_proxy(mesh.node_count(), 1),
                    linf: out.linf,
                    l2: out.l2,
                    iters: out.report.iterations,
                    cond: None,
                    assemble_s: out.assemble_s,
                    solve_s: out.solve_s,
                });
            }
        }
    }
    append_rates(&mut rows, 1)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityConfig {
    pub domain: Domain,
    pub size: usize,
    pub perturb: f64,
    pub seed: u64,
    pub factors: Vec<f64>,
    pub victims: usize,
    pub degrees: Vec<usize>,
    pub solution: SolutionName,
    pub assembly: AssemblyOptions,
    pub solver: SolveSettings,
    /// Exact smallest singular value via dense LU up to this many dofs.
    pub dense_limit: usize,
    pub krylov_dim: usize,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            domain: Domain::Square,
            size: 24,
            perturb: 0.3,
            seed: 0,
            factors: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
            victims: 4,
            degrees: vec![2, 4, 6],
            solution: SolutionName::U2,
            assembly: AssemblyOptions::default(),
            solver: SolveSettings {
                tol: 1e-8,
                ..SolveSettings::default()
            },
            dense_limit: 3000,
            krylov_dim: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub t: f64,
    pub min_angle: f64,
    pub method: String,
    pub degree: usize,
    pub cond: f64,
    pub iters: usize,
    pub converged: bool,
    /// `ok`, or why the solve failed.
    pub status: String,
}

impl QualityRow {
    pub const HEADER: &'static str = "t,min_angle,method,degree,cond,iters,converged,status";

    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{},{},{:e},{},{},{}",
            self.t, self.min_angle, self.method, self.degree, self.cond, self.iters, self.converged, self.status
        )
    }
}

pub fn quality_csv(rows: &[QualityRow]) -> String {
    let mut s = String::from(QualityRow::HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Picks up to `count` vertex-disjoint elements whose moved vertex is
/// interior and whose altitude foot lies well inside the opposite facet, so
/// that shrinking the height never inverts a neighbour.
pub fn pick_victims(mesh: &Mesh, count: usize) -> Vec<usize> {
    let ne = mesh.elem_count();
    let mut chosen: Vec<usize> = Vec::new();
    let mut used = std::collections::HashSet::new();
    for k in 0..count {
        let start = (2 * k + 1) * ne / (2 * count.max(1));
        for off in 0..ne {
            let e = (start + off) % ne;
            if chosen.contains(&e) || mesh.elem(e).iter().any(|v| used.contains(v)) {
                continue;
            }
            let (v, foot) = altitude_foot(mesh, e);
            if mesh.is_boundary(v) || !foot_inside(mesh, e, v, &foot, 0.15) {
                continue;
            }
            if distort_mesh(mesh, &[e], 1e-6).is_err() {
                continue;
            }
            chosen.push(e);
            used.extend(mesh.elem(e).iter().copied());
            break;
        }
    }
    chosen
}

fn foot_inside(mesh: &Mesh, e: usize, v: usize, foot: &[f64; 3], margin: f64) -> bool {
    let others: Vec<[f64; 3]> = mesh.elem(e).iter().filter(|&&w| w != v).map(|&w| mesh.point(w)).collect();
    let sub = |a: &[f64; 3], b: &[f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let r = sub(foot, &others[0]);
    match mesh.dim() {
        2 => {
            let d = sub(&others[1], &others[0]);
            let s = dot(&r, &d) / dot(&d, &d);
            s > margin && s < 1.0 - margin
        }
        3 => {
            let a = sub(&others[1], &others[0]);
            let b = sub(&others[2], &others[0]);
            let (aa, ab, bb) = (dot(&a, &a), dot(&a, &b), dot(&b, &b));
            let (ra, rb) = (dot(&r, &a), dot(&r, &b));
            let det = aa * bb - ab * ab;
            let s = (ra * bb - rb * ab) / det;
            let t = (rb * aa - ra * ab) / det;
            s > margin && t > margin && 1.0 - s - t > margin
        }
        _ => false,
    }
}

/// Condition estimate, dense-assisted for small systems.
fn estimate(a: &crate::linalg::CsrMatrix, dense_limit: usize, krylov_dim: usize) -> f64 {
    if a.nrows <= dense_limit {
        if let Some(lu) = DenseLu::factor(&a.to_dense()) {
            return condition_estimate(a, Some(&lu as &dyn SolveOperator), krylov_dim).kappa;
        }
        return f64::INFINITY;
    }
    condition_estimate(a, None, krylov_dim).kappa
}

/// Sweeps the distortion factor over a fixed set of victim elements and
/// records conditioning and solver behaviour for every method.
pub fn run_quality_study(cfg: &QualityConfig) -> Result<Vec<QualityRow>> {
    if cfg.domain.dim() < 2 {
        return Err(Error::Invalid("the quality study needs a 2D or 3D mesh".into()));
    }
    let base = cfg.domain.mesh(cfg.size, cfg.perturb, cfg.seed)?;
    let victims = pick_victims(&base, cfg.victims);
    if victims.is_empty() {
        return Err(Error::Invalid("no element can be distorted safely".into()));
    }
    let sol = manufactured(cfg.solution, base.dim())?;
    let pde = sol.poisson();
    let mut methods: Vec<Method> = cfg.degrees.iter().map(|&d| Method::AesFem(d)).collect();
    methods.push(Method::FemP1);
    let mut rows = Vec::new();
    for &t in &cfg.factors {
        let mesh = distort_mesh(&base, &victims, t)?;
        let hf = build_half_facets(&mesh)?;
        let (min_angle, _) = mesh_quality(&mesh)?;
        for &method in &methods {
            let sys = assemble(&mesh, &hf, method, &pde, &cfg.assembly)?;
            let cond = estimate(&sys.a, cfg.dense_limit, cfg.krylov_dim);
            let (iters, converged, status) = match solve_system(&sys, uses_cg(method, &pde), &cfg.solver) {
                Ok((_, rep)) => {
                    let status = match (&rep.breakdown, rep.converged) {
                        (_, true) => "ok".to_string(),
                        (Some(b), false) => format!("breakdown: {b}"),
                        (None, false) => "not converged".to_string(),
                    };
                    (rep.iterations, rep.converged, status)
                }
                Err(Error::NonPositivePivot { row, value }) => {
                    (0, false, format!("nonpositive pivot {value:e} at row {row}"))
                }
                Err(e) => return Err(e),
            };
            rows.push(QualityRow {
                t,
                min_angle,
                method: method.label().into(),
                degree: method.degree(),
                cond,
                iters,
                converged,
                status: status.replace(',', ";"),
            });
        }
    }
    Ok(rows)
}

/// Preconditioner actually used by [`run_quality_study`] for a method.
pub fn default_preconditioner(method: Method, pde: &PdeSpec) -> PrecondKind {
    if uses_cg(method, pde) {
        PrecondKind::Ic0
    } else {
        PrecondKind::Ilu0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn victims_are_disjoint_and_safe() {
        let m = Domain::Square.mesh(12, 0.3, 0).unwrap();
        let v = pick_victims(&m, 4);
        assert_eq!(v.len(), 4);
        let d = distort_mesh(&m, &v, 1e-4).unwrap();
        let (lo0, _) = mesh_quality(&m).unwrap();
        let (lo1, _) = mesh_quality(&d).unwrap();
        assert!(lo1 < 0.01 * lo0);
    }

    #[test]
    fn study_needs_three_meshes() {
        let cfg = ConvergenceConfig::new(Domain::Square, SolutionName::U2, vec![2], 4, 2);
        assert!(run_convergence_study(&cfg).is_err());
    }
}
