//! Builds a perturbed square mesh and prints ring neighborhoods and stencils.
use aesfem::mesh::{build_half_facets, generate_box_mesh, mesh_quality, ring_neighborhood, select_stencil, Fraction, RingSpec};

fn main() -> aesfem::Result<()> {
    let mesh = generate_box_mesh(2, 8, 0.2, 1)?;
    let hf = build_half_facets(&mesh)?;
    let (min_angle, max_angle) = mesh_quality(&mesh)?;
    println!(
        "{} nodes, {} triangles, angles in [{min_angle:.3}, {max_angle:.3}]",
        mesh.node_count(),
        mesh.elem_count()
    );
    let center = 40;
    for ring in [RingSpec::whole(1), RingSpec::new(1, Fraction::Half), RingSpec::whole(2)] {
        let nodes = ring_neighborhood(&mesh, &hf, center, ring);
        println!("ring {:.2}: {} nodes", ring.as_f64(), nodes.len());
    }
    for degree in [2, 4, 6] {
        let s = select_stencil(&mesh, &hf, center, degree, 1.5)?;
        println!("degree {degree}: {} nodes, ring {:.2}, h {:.4}", s.len(), s.ring_used.as_f64(), s.h);
    }
    Ok(())
}
