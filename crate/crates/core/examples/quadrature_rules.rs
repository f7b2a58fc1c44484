//! Lists simplex rule sizes and checks them on a monomial.
use aesfem::quadrature::{monomial_simplex_integral, simplex_rule};

fn main() -> aesfem::Result<()> {
    for dim in 1..=3 {
        for e in [1, 2, 4, 6, 8] {
            let rule = simplex_rule(dim, e)?;
            let mut ex = vec![0u32; dim];
            ex[0] = e as u32 / 2;
            ex[dim - 1] += e as u32 - e as u32 / 2;
            let q: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * ex.iter().enumerate().map(|(k, &a)| p[k + 1].powi(a as i32)).product::<f64>())
                .sum();
            let exact = monomial_simplex_integral(dim, &ex).to_f64();
            println!("dim {dim} exactness {e}: {:3} points, error {:.1e}", rule.len(), (q - exact).abs());
        }
    }
    Ok(())
}
