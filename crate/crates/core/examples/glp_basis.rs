//! Fits a degree-4 basis at one node and checks that it reproduces a quartic.
use aesfem::glp::{solve_glp, GlpOptions, StencilFrame};
use aesfem::mesh::{build_half_facets, generate_box_mesh, select_stencil};

fn main() -> aesfem::Result<()> {
    let mesh = generate_box_mesh(2, 10, 0.25, 3)?;
    let hf = build_half_facets(&mesh)?;
    let node = 60;
    let stencil = select_stencil(&mesh, &hf, node, 4, 1.5)?;
    let frame = StencilFrame::new(&mesh, &stencil);
    let basis = solve_glp(&frame, 4, &GlpOptions::default(), node)?;
    println!("stencil {} nodes, effective degree {:?}", basis.len(), basis.effective_degree());

    let f = |x: &[f64]| (x[0] - 0.3).powi(4) + x[0] * x[1] * x[1];
    let x = [mesh.point(node)[0] + 0.02, mesh.point(node)[1] - 0.01];
    let u = frame.to_local(&x);
    let phi = basis.eval(&u[..2]);
    let values: Vec<f64> = stencil.nodes.iter().map(|&v| f(mesh.coord(v))).collect();
    let approx: f64 = phi.iter().zip(&values).map(|(p, y)| p * y).sum();
    println!("partition of unity: {:.3e}", phi.iter().sum::<f64>() - 1.0);
    println!("quartic at {x:?}: exact {:.12}, basis {:.12}", f(&x), approx);
    Ok(())
}
