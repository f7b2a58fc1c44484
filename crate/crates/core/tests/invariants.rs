use aesfem::glp::{solve_glp, GlpOptions, StencilFrame};
use aesfem::harness::{convergence_rate, error_norms, manufactured, SolutionName};
use aesfem::linalg::{cg, condition_estimate, gmres, CsrMatrix, DenseLu, DenseMatrix, Precond, PrecondKind, SolveOperator, SolverOptions};
use aesfem::mesh::{
    build_half_facets, distort_mesh, generate_box_mesh, mesh_quality, total_volume, HalfFacet,
};
use aesfem::quadrature::{monomial_simplex_integral, simplex_rule};
use proptest::prelude::*;

fn cloud(dim: usize, m: usize, seed: u64) -> Vec<[f64; 3]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![[0.0; 3]];
    while pts.len() < m {
        let mut p = [0.0; 3];
        for v in p.iter_mut().take(dim) {
            *v = rng.gen_range(-1.0..1.0);
        }
        pts.push(p);
    }
    pts
}

fn n_monomials(dim: usize, degree: usize) -> usize {
    (1..=dim).fold(1, |acc, k| acc * (degree + k) / k)
}

fn frame(dim: usize, pts: &[[f64; 3]], scale: f64) -> StencilFrame {
    let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p[..dim].iter().map(|v| v * scale).collect()).collect();
    let refs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
    StencilFrame::from_local(dim, &refs, 0.5 * scale)
}

fn random_spd(n: usize, seed: u64) -> CsrMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0; n];
    for i in 0..n {
        for _ in 0..3 {
            let j = rng.gen_range(0..n);
            if j != i {
                let v: f64 = rng.gen_range(-1.0..0.0);
                t.push((i, j, v));
                t.push((j, i, v));
                rowsum[i] += v.abs();
                rowsum[j] += v.abs();
            }
        }
    }
    t.extend(rowsum.iter().enumerate().map(|(i, s)| (i, i, 1.0 + s)));
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn glp_partition_and_reproduction(dim in 1usize..=3, degree in 1usize..=6, seed in any::<u64>(),
                                      scale in 0.01f64..10.0, ux in -0.5f64..0.5, uy in -0.5f64..0.5) {
        prop_assume!(!(dim == 3 && degree > 4));
        let n = n_monomials(dim, degree);
        let pts = cloud(dim, 2 * n + 4, seed);
        let f = frame(dim, &pts, scale);
        let b = solve_glp(&f, degree, &GlpOptions::default(), 0).unwrap();
        prop_assert_eq!(b.effective_degree(), Some(degree));
        let u = [ux * scale, uy * scale, 0.1 * scale];
        let phi = b.eval(&u[..]);
        let s: f64 = phi.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-9, "sum {}", s);
        let q = |x: &[f64; 3]| {
            let t = 0.2 + (x[0] - 0.3 * x[1] + 0.5 * x[2]) / scale;
            t.powi(degree as i32)
        };
        let rep: f64 = phi.iter().zip(&f.local).map(|(p, x)| p * q(x)).sum();
        let mut uu = [0.0; 3];
        uu[..dim].copy_from_slice(&u[..dim]);
        prop_assert!((rep - q(&uu)).abs() < 1e-7 * q(&uu).abs().max(1.0), "{} vs {}", rep, q(&uu));
    }

    #[test]
    fn glp_gradient_matches_finite_differences(dim in 1usize..=3, degree in 1usize..=4, seed in any::<u64>()) {
        let n = n_monomials(dim, degree);
        let f = frame(dim, &cloud(dim, 2 * n + 2, seed), 1.0);
        let b = solve_glp(&f, degree, &GlpOptions::default(), 0).unwrap();
        let u = [0.11, -0.07, 0.05];
        let g = b.eval_gradient(&u[..dim]);
        let h = 1e-6;
        for k in 0..dim {
            let (mut p, mut m) = (u, u);
            p[k] += h;
            m[k] -= h;
            let (fp, fm) = (b.eval(&p[..dim]), b.eval(&m[..dim]));
            for j in 0..f.len() {
                let fd = (fp[j] - fm[j]) / (2.0 * h);
                prop_assert!((fd - g[j * dim + k]).abs() < 1e-5 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn glp_is_scale_equivariant(dim in 1usize..=2, degree in 1usize..=4, seed in any::<u64>(), s in 0.001f64..1000.0) {
        let n = n_monomials(dim, degree);
        let pts = cloud(dim, 2 * n + 2, seed);
        let a = solve_glp(&frame(dim, &pts, 1.0), degree, &GlpOptions::default(), 0).unwrap();
        let b = solve_glp(&frame(dim, &pts, s), degree, &GlpOptions::default(), 0).unwrap();
        let u = [0.2, -0.3, 0.0];
        let us = [0.2 * s, -0.3 * s, 0.0];
        for (x, y) in a.eval(&u[..dim]).iter().zip(b.eval(&us[..dim])) {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn quadrature_is_exact_on_monomials(dim in 1usize..=3, e in 1usize..=8, a in 0u32..=8, b in 0u32..=8, c in 0u32..=8) {
        let ex = [a, b, c];
        let ex = &ex[..dim];
        prop_assume!(ex.iter().sum::<u32>() as usize <= e);
        let rule = simplex_rule(dim, e).unwrap();
        let q: f64 = rule.points.iter().zip(&rule.weights)
            .map(|(p, w)| w * (0..dim).map(|k| p[k + 1].powi(ex[k] as i32)).product::<f64>())
            .sum();
        let exact = monomial_simplex_integral(dim, ex).to_f64();
        prop_assert!((q - exact).abs() <= 1e-13 * exact, "{} vs {}", q, exact);
    }

    #[test]
    fn krylov_reports_true_residual(n in 5usize..80, seed in any::<u64>(), kind in 0usize..4) {
        let a = random_spd(n, seed);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        prop_assume!(b.iter().any(|v| *v != 0.0));
        let kind = [PrecondKind::None, PrecondKind::Jacobi, PrecondKind::Ilu0, PrecondKind::Ic0][kind];
        let p = Precond::build(kind, &a).unwrap();
        let opts = SolverOptions { tol: 1e-10, ..SolverOptions::default() };
        for use_cg in [true, false] {
            let (x, rep) = if use_cg { cg(&a, &b, &p, &opts) } else { gmres(&a, &b, &p, &opts) }.unwrap();
            let ax = a.spmv(&x).unwrap();
            let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = ax.iter().zip(&b).map(|(u, v)| (v - u).powi(2)).sum::<f64>().sqrt() / nb;
            prop_assert!(rep.converged);
            prop_assert!(r <= 1e-10 * 1.0001);
            prop_assert!((r - rep.final_relative_residual).abs() <= 1e-15 + 1e-12 * r);
        }
    }

    #[test]
    fn condition_estimate_is_a_lower_bound(n in 2usize..=50, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j || rng.gen_bool(0.2) {
                    d[(i, j)] = rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 };
                }
            }
        }
        let sv = nalgebra::DMatrix::from_fn(n, n, |i, j| d[(i, j)]).singular_values();
        prop_assume!(sv.min() > 1e-10);
        let truth = sv.max() / sv.min();
        let a = CsrMatrix::from_dense(&d);
        let lu = DenseLu::factor(&d).unwrap();
        let plain = condition_estimate(&a, None, 30);
        let exact = condition_estimate(&a, Some(&lu as &dyn SolveOperator), 30);
        prop_assert!(plain.kappa <= truth * (1.0 + 1e-8));
        prop_assert!(exact.kappa <= truth * (1.0 + 1e-8));
        prop_assert!(plain.sigma_max <= sv.max() * (1.0 + 1e-10));
        prop_assert!(exact.kappa >= 0.5 * truth, "{} vs {}", exact.kappa, truth);
    }

    #[test]
    fn box_meshes_are_valid(dim in 1usize..=3, div in 2usize..7, perturb in 0.0f64..0.35, seed in any::<u64>()) {
        let m = generate_box_mesh(dim, div, perturb, seed).unwrap();
        prop_assert!((total_volume(&m) - 1.0).abs() < 1e-12);
        for e in 0..m.elem_count() {
            prop_assert!(m.elem_volume(e) > 0.0);
        }
        let hf = build_half_facets(&m).unwrap();
        for e in 0..m.elem_count() {
            for f in 0..=dim {
                let h = HalfFacet { elem: e, facet: f };
                if let Some(s) = hf.sibling(h) {
                    prop_assert_eq!(hf.sibling(s), Some(h));
                }
            }
        }
        let boundary_nodes: std::collections::BTreeSet<usize> = hf
            .boundary_half_facets()
            .flat_map(|h| hf.facet_nodes(&m, h))
            .collect();
        let tagged: std::collections::BTreeSet<usize> = m.boundary_nodes().collect();
        prop_assert_eq!(boundary_nodes, tagged);
    }

    #[test]
    fn exact_fields_have_zero_error(div in 2usize..10, perturb in 0.0f64..0.3, seed in any::<u64>(), which in 0usize..3) {
        let m = generate_box_mesh(2, div, perturb, seed).unwrap();
        let name = [SolutionName::U1, SolutionName::U2, SolutionName::U3][which];
        let s = manufactured(name, 2).unwrap();
        let field: Vec<f64> = (0..m.node_count()).map(|v| s.value(&m.point(v))).collect();
        prop_assert_eq!(error_norms(&m, &field, &|p| s.value(p)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rate_is_symmetric_under_swap(nc in 10usize..1000, k in 2usize..8, ec in 1e-8f64..1.0, ef in 1e-8f64..1.0, dim in 1usize..=3) {
        let nf = nc * k;
        let a = convergence_rate((nc, ec), (nf, ef), dim).unwrap();
        let b = convergence_rate((nf, ef), (nc, ec), dim).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn distortion_shrinks_angles(t in 1e-4f64..1e-2, seed in 0u64..20) {
        let m = generate_box_mesh(2, 10, 0.3, seed).unwrap();
        let v = aesfem::harness::pick_victims(&m, 2);
        prop_assume!(!v.is_empty());
        let d = distort_mesh(&m, &v, t).unwrap();
        let (lo0, _) = mesh_quality(&m).unwrap();
        let (lo1, _) = mesh_quality(&d).unwrap();
        prop_assert!(lo1 <= lo0 + 1e-12);
        prop_assert!((total_volume(&d) - 1.0).abs() < 1e-12);
    }
}
