//! Diagonalize a Hamiltonian and tabulate observable expectations in its
//! stationary states.

use protective::linalg::pauli;
use protective::quantum::{spectral_decompose, stationary_expectations, HermitianOperator};

fn main() -> protective::Result<()> {
    let [sx, sy, sz] = pauli();
    // H = 0.6 sigma_x + 0.8 sigma_z
    let h = HermitianOperator::new(sx.scale(0.6) + sz.scale(0.8))?;
    let basis = spectral_decompose(&h)?;
    println!("eigenvalues: {:?}", basis.eigenvalues());
    println!("min gap: {}", basis.min_gap());

    let obs = [sx, sy, sz].map(|m| HermitianOperator::new(m).unwrap());
    let table = stationary_expectations(&obs, &basis)?;
    for (n, shift) in table.shift_vectors().iter().enumerate() {
        println!("<sigma>_{n} = {shift:?}");
    }
    println!("<0|sigma_x|1> = {}", table.matrix(0)[(0, 1)]);
    Ok(())
}
