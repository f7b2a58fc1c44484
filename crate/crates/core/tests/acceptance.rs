//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use aesfem::assembly::{recover_solution, truncation_residual, AssemblyOptions, PdeKind, PdeSpec};
use aesfem::glp::{solve_glp, StencilFrame};
use aesfem::harness::{
    assemble, manufactured, run_convergence_study, run_odd_degree_study, run_quality_study, solve_system,
    ConvergenceConfig, CsvRow, Domain, Method, OddDegreeConfig, QualityConfig, SolutionName, SolveSettings,
};
use aesfem::linalg::{condition_estimate, CsrMatrix, DenseLu, DenseMatrix, SolveOperator};
use aesfem::mesh::{build_half_facets, generate_box_mesh, graded_interval_mesh, select_stencil, Mesh};
use aesfem::quadrature::{monomial_simplex_integral, simplex_rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rate(rows: &[CsvRow], method: &str, degree: usize) -> (f64, f64) {
    let key = format!("rate:{method}");
    let r = rows
        .iter()
        .find(|r| r.method == key && r.degree == degree)
        .unwrap_or_else(|| panic!("no rate row for {method} degree {degree}"));
    (r.linf, r.l2)
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Polynomial of total degree `p`: `(c + a . x)^p + x0 * x_last`.
fn poly_problem(dim: usize, p: usize) -> (PdeSpec, Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>) {
    let a = [0.5, -0.7, 0.4];
    let c = 0.3;
    let aa: f64 = a[..dim].iter().map(|v| v * v).sum();
    let lin = move |x: &[f64; 3]| c + (0..dim).map(|k| a[k] * x[k]).sum::<f64>();
    let u = move |x: &[f64; 3]| lin(x).powi(p as i32) + if dim > 1 { x[0] * x[dim - 1] } else { 0.0 };
    let rho = move |x: &[f64; 3]| {
        let pf = p as f64;
        -(pf * (pf - 1.0) * aa * lin(x).powi(p as i32 - 2))
    };
    let u: Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync> = Arc::new(u);
    (PdeSpec::poisson(Arc::new(rho), u.clone()), u)
}

fn patch_mesh(dim: usize) -> Mesh {
    match dim {
        1 => graded_interval_mesh(20, 3.0).unwrap(),
        2 => generate_box_mesh(2, 10, 0.25, 11).unwrap(),
        _ => generate_box_mesh(3, 6, 0.2, 11).unwrap(),
    }
}

fn c1_patch() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for dim in 1..=3 {
        let mesh = patch_mesh(dim);
        let hf = build_half_facets(&mesh).unwrap();
        for degree in [2, 4, 6] {
            let (pde, u) = poly_problem(dim, degree);
            let sys = assemble(&mesh, &hf, Method::AesFem(degree), &pde, &AssemblyOptions::default()).unwrap();
            let settings = SolveSettings {
                tol: 1e-14,
                ..SolveSettings::default()
            };
            let (x, _) = solve_system(&sys, false, &settings).unwrap();
            let field = recover_solution(&sys, &x).unwrap();
            let scale = (0..mesh.node_count()).map(|v| u(&mesh.point(v)).abs()).fold(0.0, f64::max);
            let err = (0..mesh.node_count())
                .map(|v| (field[v] - u(&mesh.point(v))).abs())
                .fold(0.0, f64::max)
                / scale;
            worst = worst.max(err);
            detail.push(format!("{dim}D/p{degree}={err:.1e}"));
        }
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative nodal error {worst:.2e} (limit 1e-8) [{}]", detail.join(" ")),
    }
}

fn square_study(pde: PdeKind) -> Vec<CsvRow> {
    let mut cfg = ConvergenceConfig::new(Domain::Square, SolutionName::U2, vec![2, 4, 6], 8, 4);
    cfg.pde = pde;
    cfg.velocity = [1.0, 1.0, 0.0];
    run_convergence_study(&cfg).unwrap()
}

fn flat_bands(rows: &[CsvRow]) -> Outcome {
    let (_, r2) = rate(rows, "aesfem", 2);
    let (_, r4) = rate(rows, "aesfem", 4);
    let (_, r6) = rate(rows, "aesfem", 6);
    let (_, r1) = rate(rows, "fem1", 1);
    let pass = within(r2, 2.0, 0.4) && within(r4, 4.0, 0.5) && within(r6, 6.0, 0.7) && within(r1, 2.0, 0.3);
    Outcome {
        pass,
        detail: format!(
            "L2 rates p2 {r2:.3} (2±0.4), p4 {r4:.3} (4±0.5), p6 {r6:.3} (6±0.7), fem1 {r1:.3} (2±0.3)"
        ),
    }
}

fn c2_square() -> Outcome {
    flat_bands(&square_study(PdeKind::Poisson))
}

fn c3_disc() -> Outcome {
    let mut cfg = ConvergenceConfig::new(Domain::Disc, SolutionName::U4, vec![4, 6], 8, 4);
    cfg.include_p1 = false;
    let rows = run_convergence_study(&cfg).unwrap();
    let (_, r4) = rate(&rows, "aesfem", 4);
    let (_, r6) = rate(&rows, "aesfem", 6);
    let fine: Vec<String> = [4, 6]
        .iter()
        .map(|&d| {
            let e: Vec<&CsvRow> = rows.iter().filter(|r| !r.is_rate() && r.degree == d).collect();
            let k = e.len();
            let last = aesfem::harness::convergence_rate((e[k - 2].nodes, e[k - 2].l2), (e[k - 1].nodes, e[k - 1].l2), 2)
                .unwrap();
            format!("p{d} last step {last:.2}")
        })
        .collect();
    Outcome {
        pass: r6 >= 5.3 && r4 >= 3.5,
        detail: format!("L2 rates p4 {r4:.3} (>=3.5), p6 {r6:.3} (>=5.3); {}", fine.join(", ")),
    }
}

fn c4_convdiff() -> Outcome {
    flat_bands(&square_study(PdeKind::ConvectionDiffusion))
}

fn c5_cube() -> Outcome {
    let mut cfg = ConvergenceConfig::new(Domain::Cube, SolutionName::U2, vec![2, 4, 6], 4, 3);
    cfg.include_p1 = false;
    let rows = run_convergence_study(&cfg).unwrap();
    let (_, r2) = rate(&rows, "aesfem", 2);
    let (_, r4) = rate(&rows, "aesfem", 4);
    let (_, r6) = rate(&rows, "aesfem", 6);
    Outcome {
        pass: within(r2, 2.0, 0.5) && within(r4, 4.0, 0.7) && r6 >= 5.0,
        detail: format!("L2 rates p2 {r2:.3} (2±0.5), p4 {r4:.3} (4±0.7), p6 {r6:.3} (>=5.0), divisions 4->16"),
    }
}

fn c6_odd() -> Outcome {
    let rows = run_odd_degree_study(&OddDegreeConfig::default()).unwrap();
    let r = |ratio: &str, d: usize| rate(&rows, &format!("aesfem@ratio={ratio}"), d).0;
    let (u3, g3, u5, g5) = (r("1", 3), r("1000", 3), r("1", 5), r("1000", 5));
    Outcome {
        pass: u3 <= 2.5 && g3 >= 2.7 && u5 <= 4.6 && g5 >= 4.5,
        detail: format!(
            "Linf rates p3 uniform {u3:.3} (<=2.5), ratio-1000 {g3:.3} (>=2.7); \
             p5 uniform {u5:.3} (<=4.6), ratio-1000 {g5:.3} (>=4.5)"
        ),
    }
}

fn c7_quality() -> Outcome {
    let cfg = QualityConfig::default();
    let rows = run_quality_study(&cfg).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for d in [2, 4, 6] {
        let s: Vec<_> = rows.iter().filter(|r| r.method == "aesfem" && r.degree == d).collect();
        let cmax = s.iter().map(|r| r.cond).fold(0.0, f64::max);
        let cmin = s.iter().map(|r| r.cond).fold(f64::INFINITY, f64::min);
        let imax = s.iter().map(|r| r.iters).max().unwrap();
        let imin = s.iter().map(|r| r.iters).min().unwrap();
        let ok = cmax / cmin < 2.0 && imax - imin <= 2 && s.iter().all(|r| r.converged);
        pass &= ok;
        notes.push(format!("p{d} cond x{:.2} iters {imin}-{imax}", cmax / cmin));
    }
    let fem: Vec<_> = rows.iter().filter(|r| r.method == "fem1").collect();
    let base = fem.iter().find(|r| r.t == 1.0).unwrap();
    let worst = fem.iter().min_by(|a, b| a.t.total_cmp(&b.t)).unwrap();
    let growth = worst.cond / base.cond;
    pass &= growth >= 100.0;
    let cg_broke = !worst.converged || worst.iters >= 10 * base.iters;
    pass &= cg_broke;
    notes.push(format!(
        "fem1 cond x{growth:.0} (>=100), IC(0)-CG iters {} -> {} [{}] (needs failure or >=10x)",
        base.iters, worst.iters, worst.status
    ));
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn c8_truncation() -> Outcome {
    let sol = manufactured(SolutionName::U3, 2).unwrap();
    let pde = sol.poisson();
    let mut pass = true;
    let mut notes = Vec::new();
    for d in [2usize, 4, 6] {
        let maxes: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| {
                let m = generate_box_mesh(2, n, 0.0, 0).unwrap();
                let hf = build_half_facets(&m).unwrap();
                truncation_residual(&m, &hf, &pde, d, &|p| sol.value(p), &AssemblyOptions::default())
                    .unwrap()
                    .max
            })
            .collect();
        let steps: Vec<f64> = maxes.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let avg = (maxes[0] / maxes[3]).log2() / 3.0;
        let ok = avg >= d as f64 - 0.7 && avg <= d as f64 + 0.7;
        pass &= ok;
        notes.push(format!(
            "p{d} mean log2 ratio {avg:.2} in [{:.1},{:.1}] (steps {})",
            d as f64 - 0.7,
            d as f64 + 0.7,
            steps.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>().join("/")
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn c9_invariants() -> Outcome {
    let mut fails: Vec<String> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // GLP bases: partition of unity, reproduction, gradient vs finite differences.
    let mesh = generate_box_mesh(2, 12, 0.3, 5).unwrap();
    let hf = build_half_facets(&mesh).unwrap();
    let opts = AssemblyOptions::default();
    for degree in [2, 4, 6] {
        for node in [40usize, 84, 97] {
            let st = select_stencil(&mesh, &hf, node, degree, opts.stencil_ratio).unwrap();
            let frame = StencilFrame::new(&mesh, &st);
            let basis = solve_glp(&frame, degree, &opts.glp, node).unwrap();
            for _ in 0..5 {
                let u = [rng.gen_range(-1.0..1.0) * st.h, rng.gen_range(-1.0..1.0) * st.h, 0.0];
                let phi = basis.eval(&u);
                let pu: f64 = phi.iter().sum();
                if (pu - 1.0).abs() > 1e-10 {
                    fails.push(format!("partition of unity p{degree}: {pu}"));
                }
                let q = |x: &[f64; 3]| (0.4 + x[0] - 0.3 * x[1]).powi(degree as i32);
                let rep: f64 = phi.iter().zip(&frame.local).map(|(f, l)| f * q(l)).sum();
                if (rep - q(&u)).abs() > 1e-9 * q(&u).abs().max(1.0) {
                    fails.push(format!("reproduction p{degree}: {rep} vs {}", q(&u)));
                }
                let g = basis.eval_gradient(&u);
                let eps = 1e-6 * st.h;
                for k in 0..2 {
                    let (mut a, mut b) = (u, u);
                    a[k] += eps;
                    b[k] -= eps;
                    let (fa, fb) = (basis.eval(&a), basis.eval(&b));
                    for j in 0..phi.len() {
                        let fd = (fa[j] - fb[j]) / (2.0 * eps);
                        if (fd - g[j * 2 + k]).abs() > 1e-5 * (1.0 / st.h) {
                            fails.push(format!("gradient p{degree} basis {j}: {fd} vs {}", g[j * 2 + k]));
                        }
                    }
                }
            }
        }
    }

    // Quadrature exactness against exact rational monomial integrals.
    for dim in 1..=3 {
        for e in 1..=8usize {
            let rule = simplex_rule(dim, e).unwrap();
            for a in 0..=e as u32 {
                for b in 0..=(e as u32 - a) {
                    for c in 0..=(e as u32 - a - b) {
                        let ex = [a, b, c];
                        if ex[dim..].iter().any(|&v| v > 0) {
                            continue;
                        }
                        let q: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| w * (0..dim).map(|k| p[k + 1].powi(ex[k] as i32)).product::<f64>())
                            .sum();
                        let exact = monomial_simplex_integral(dim, &ex[..dim]).to_f64();
                        if (q - exact).abs() > 1e-13 * exact.abs().max(1e-3) {
                            fails.push(format!("quadrature {dim}D e{e} {ex:?}: {q} vs {exact}"));
                        }
                    }
                }
            }
        }
    }

    // Krylov solvers: reported residual equals the true residual.
    let sol = manufactured(SolutionName::U2, 2).unwrap();
    for (method, cg) in [(Method::FemP1, true), (Method::AesFem(4), false)] {
        let sys = assemble(&mesh, &hf, method, &sol.poisson(), &opts).unwrap();
        let (x, rep) = solve_system(&sys, cg, &SolveSettings::default()).unwrap();
        let ax = sys.a.spmv(&x).unwrap();
        let nb = sys.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = ax.iter().zip(&sys.b).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt() / nb;
        if !rep.converged || r > 1e-12 * 1.0001 || (r - rep.final_relative_residual).abs() > 1e-14 {
            fails.push(format!("{} residual {r:e} vs reported {:e}", method.label(), rep.final_relative_residual));
        }
    }

    // Condition estimate never exceeds the SVD condition number.
    for n in [5usize, 17, 33, 50] {
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = 4.0 + rng.gen_range(0.0..(n as f64));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                d[(i, j)] += rng.gen_range(-1.0..1.0);
            }
        }
        let a = CsrMatrix::from_dense(&d);
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| d[(i, j)]);
        let sv = m.singular_values();
        let truth = sv.max() / sv.min();
        let lu = DenseLu::factor(&d).unwrap();
        for solve in [None, Some(&lu as &dyn SolveOperator)] {
            let est = condition_estimate(&a, solve, 40).kappa;
            if est > truth * (1.0 + 1e-8) || !(est > 0.0) {
                fails.push(format!("condest n={n}: {est} vs svd {truth}"));
            }
        }
    }

    Outcome {
        pass: fails.is_empty(),
        detail: if fails.is_empty() {
            "partition of unity, reproduction, gradients, quadrature, Krylov residuals, condest bound all hold".into()
        } else {
            format!("{} violations, first: {}", fails.len(), fails[0])
        },
    }
}

fn run_bin(args: &[&str], threads: &str) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_aesfem"))
        .args(args)
        .env("AESFEM_THREADS", threads)
        .output()
        .expect("spawn aesfem")
        .status
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let studies: Vec<(&str, Vec<String>)> = vec![
        (
            "convergence",
            vec![
                "convergence", "--domain", "square", "--pde", "convdiff", "--c", "1,1", "--solution", "u2",
                "--degrees", "2,4", "--levels", "3", "--base", "6", "--perturb", "0.25", "--seed", "42", "--cond",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        ("odd-degree", vec!["odd-degree".to_string()]),
        (
            "quality",
            vec!["quality", "--size", "12", "--seed", "7"].into_iter().map(String::from).collect(),
        ),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, args) in studies {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = p(&format!("{name}-{run}.csv"));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--out", out.as_str()]);
            let st = run_bin(&a, "2");
            outs.push(std::fs::read(&out).ok().filter(|_| st.success()));
        }
        let same = outs[0].is_some() && outs[0] == outs[1];
        pass &= same;
        notes.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
    }
    Outcome {
        pass,
        detail: format!("two runs, 2 threads: {}", notes.join(", ")),
    }
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "polynomial patch test", c1_patch),
        (2, "flat-domain convergence", c2_square),
        (3, "curved boundary with linear elements", c3_disc),
        (4, "convection-diffusion convergence", c4_convdiff),
        (5, "3D convergence", c5_cube),
        (6, "odd-degree cancellation", c6_odd),
        (7, "element-quality robustness", c7_quality),
        (8, "truncation-residual scaling", c8_truncation),
        (9, "library invariant suite", c9_invariants),
        (10, "determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| s == &id.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let out = f();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {verdict} {name} ({:.1}s): {}",
            t0.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
