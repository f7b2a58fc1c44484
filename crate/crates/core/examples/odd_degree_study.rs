//! Odd-degree bases on uniform and alternating 1D grids.
use aesfem::harness::{csv_string, run_odd_degree_study, OddDegreeConfig};

fn main() -> aesfem::Result<()> {
    let cfg = OddDegreeConfig {
        cells: vec![16, 32, 64],
        ..OddDegreeConfig::default()
    };
    let rows = run_odd_degree_study(&cfg)?;
    for r in rows.iter().filter(|r| r.is_rate()) {
        println!("{} p{}: linf rate {:.2}", r.method, r.degree, r.linf);
    }
    print!("{}", csv_string(&rows));
    Ok(())
}
