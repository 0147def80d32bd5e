//! Check which pairs of stationary states a detector bank can tell apart.

use protective::channel::check_resolvability;
use protective::detectors::make_detector_bank;
use protective::quantum::{spectral_decompose, stationary_expectations, HermitianOperator};

fn main() -> protective::Result<()> {
    let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.0])?;
    let a = HermitianOperator::diagonal(&[5.0, 5.3, 7.0])?;
    let table = stationary_expectations(&[a], &spectral_decompose(&h)?)?;

    for dx in [0.05, 0.1, 0.5] {
        let report = check_resolvability(&table, &make_detector_bank(&[dx])?, 5.0)?;
        println!("delta_x = {dx}: all pairs resolved = {}", report.all_pairs_resolved);
        for pair in &report.pairs {
            println!("  ({}, {}) gap {:.2} resolved {}", pair.n, pair.m, pair.gaps[0], pair.pair_resolved);
        }
    }
    Ok(())
}
