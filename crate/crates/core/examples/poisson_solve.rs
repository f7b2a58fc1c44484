//! Solves a manufactured Poisson problem with AES-FEM and P1 FEM.
use aesfem::assembly::AssemblyOptions;
use aesfem::harness::{manufactured, solve_case, Method, SolutionName, SolveSettings};
use aesfem::mesh::{build_half_facets, generate_box_mesh};

fn main() -> aesfem::Result<()> {
    let mesh = generate_box_mesh(2, 16, 0.0, 0)?;
    let hf = build_half_facets(&mesh)?;
    let sol = manufactured(SolutionName::U2, 2)?;
    let pde = sol.poisson();
    for method in [Method::FemP1, Method::AesFem(2), Method::AesFem(4), Method::AesFem(6)] {
        let out = solve_case(&mesh, &hf, method, &pde, &sol, &AssemblyOptions::default(), &SolveSettings::default())?;
        println!(
            "{:>6} p{}: linf {:.3e}  l2 {:.3e}  iters {}",
            method.label(),
            method.degree(),
            out.linf,
            out.l2,
            out.report.iterations
        );
    }
    Ok(())
}
