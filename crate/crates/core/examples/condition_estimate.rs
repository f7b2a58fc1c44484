//! Preconditioned Krylov solves and condition estimates for a P1 stiffness matrix.
use aesfem::assembly::assemble_fem_p1;
use aesfem::harness::{manufactured, SolutionName};
use aesfem::linalg::{cg, condition_estimate, gmres, DenseLu, Precond, PrecondKind, SolveOperator, SolverOptions};
use aesfem::mesh::generate_box_mesh;

fn main() -> aesfem::Result<()> {
    let opts = SolverOptions {
        tol: 1e-10,
        ..SolverOptions::default()
    };
    for n in [8, 16, 32] {
        let mesh = generate_box_mesh(2, n, 0.0, 0)?;
        let sys = assemble_fem_p1(&mesh, &manufactured(SolutionName::U2, 2)?.poisson(), None)?;
        let plain = condition_estimate(&sys.a, None, 80);
        let lu = DenseLu::factor(&sys.a.to_dense()).expect("nonsingular");
        let est = condition_estimate(&sys.a, Some(&lu as &dyn SolveOperator), 80);
        print!("n {n:2}: rows {:4} kappa {:8.2} (lanczos only {:8.2})", sys.a.nrows, est.kappa, plain.kappa);
        for kind in [PrecondKind::None, PrecondKind::Jacobi, PrecondKind::Ic0] {
            let p = Precond::build(kind, &sys.a)?;
            let (_, rep) = cg(&sys.a, &sys.b, &p, &opts)?;
            print!("  cg/{kind:?} {}", rep.iterations);
        }
        let p = Precond::build(PrecondKind::Ilu0, &sys.a)?;
        let (_, rep) = gmres(&sys.a, &sys.b, &p, &opts)?;
        println!("  gmres/Ilu0 {}", rep.iterations);
    }
    Ok(())
}
