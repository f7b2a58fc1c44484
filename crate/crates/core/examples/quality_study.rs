//! Conditioning and iteration counts as a few elements are flattened.
use aesfem::harness::{quality_csv, run_quality_study, QualityConfig};

fn main() -> aesfem::Result<()> {
    let cfg = QualityConfig {
        size: 12,
        degrees: vec![2, 4],
        factors: vec![1.0, 1e-2, 1e-4],
        ..QualityConfig::default()
    };
    print!("{}", quality_csv(&run_quality_study(&cfg)?));
    Ok(())
}
