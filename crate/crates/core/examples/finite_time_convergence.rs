//! Finite-duration coupling of a qubit: distance to the ideal channel as the
//! measurement time grows, and the suppressed off-diagonal averages.

use protective::detectors::{build_momentum_grid, make_detector_bank};
use protective::finite_time::*;
use protective::linalg::pauli;
use protective::quantum::{spectral_decompose, HermitianOperator};

fn main() -> protective::Result<()> {
    let [sx, _, sz] = pauli();
    let basis = spectral_decompose(&HermitianOperator::new(sz)?)?;
    let cfg = FiniteTimeConfig::new(10.0, vec![HermitianOperator::new(sx)?], basis)?;

    let grid = build_momentum_grid(&make_detector_bank(&[0.5])?, 64, 5.0)?;
    let sweep = geometric_sweep(10.0, 1000.0, 5)?;
    let curve = convergence_curve(&cfg, &grid, &cfg.table().shift_vectors(), &sweep)?;
    curve.write_csv(std::io::stdout().lock())?;

    for t in [10.0, 100.0, 1000.0] {
        let od = &time_averaged_offdiagonals(&cfg.with_duration(t)?)?[0][0];
        println!("T={t}: |A_01| = {:.3e} <= {:.3e}", od.value.norm(), od.bound);
    }
    Ok(())
}
