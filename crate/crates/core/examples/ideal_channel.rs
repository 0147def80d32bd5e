//! Push a superposition through the ideal channel and inspect the resulting
//! pointer mixture.

use protective::channel::{apply_ideal_channel, IdealChannel};
use protective::detectors::make_detector_bank;
use protective::linalg::{CVector, C64};
use protective::quantum::{HermitianOperator, SystemState};

fn main() -> protective::Result<()> {
    let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.0])?;
    let a = HermitianOperator::diagonal(&[5.0, 6.0, 7.0])?;
    let channel = IdealChannel::from_operators(&h, &[a], make_detector_bank(&[0.1])?)?;

    let psi = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)]);
    let state = SystemState::pure_normalized(psi)?;
    let (dist, weights) = apply_ideal_channel(&channel, &state)?;

    println!("branch weights: {weights:?}");
    for c in dist.components() {
        println!("  weight {:.4} at {:?}", c.weight, c.center);
    }
    for x in [5.0, 5.5, 6.0] {
        println!("P({x}) = {:.6}", dist.density_at(&[x])?);
    }
    println!("{}", dist.to_json()?);
    Ok(())
}
