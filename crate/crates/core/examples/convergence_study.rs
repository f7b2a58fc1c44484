//! Convection-diffusion refinement study on the unit square.
use aesfem::assembly::PdeKind;
use aesfem::harness::{csv_string, run_convergence_study, ConvergenceConfig, Domain, SolutionName};

fn main() -> aesfem::Result<()> {
    let mut cfg = ConvergenceConfig::new(Domain::Square, SolutionName::U2, vec![2, 4], 8, 3);
    cfg.pde = PdeKind::ConvectionDiffusion;
    cfg.velocity = [1.0, 1.0, 0.0];
    print!("{}", csv_string(&run_convergence_study(&cfg)?));
    Ok(())
}
