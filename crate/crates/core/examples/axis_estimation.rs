//! Estimate the field axis from many readouts and watch the error fall with
//! the sample count.

use protective::qubit::{estimate_axis, BlochState, FieldConfig, QubitProtocol};

fn main() -> protective::Result<()> {
    let e = [0.48, -0.6, 0.64];
    let proto = QubitProtocol::new(BlochState::new([0.0; 3])?, FieldConfig::new(1.0, e)?, [0.1; 3])?;

    for n in [10u64, 100, 1000, 10_000] {
        let xs: Vec<[f64; 3]> = proto
            .run_many(&(0..n).collect::<Vec<_>>())?
            .iter()
            .map(|r| [r.sample.x[0], r.sample.x[1], r.sample.x[2]])
            .collect();
        let est = estimate_axis(&xs)?.with_truth(&e);
        println!(
            "N = {n:>5}: e_hat = {:+.4?}, error {:.3} deg",
            est.e_hat,
            est.angular_error.unwrap().to_degrees()
        );
    }
    Ok(())
}
