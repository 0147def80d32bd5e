//! Single runs of the qubit protocol: readout, branch, and the one-shot axis
//! estimate.

use protective::qubit::{BlochState, FieldConfig, QubitProtocol};

fn main() -> protective::Result<()> {
    let field = FieldConfig::new(1.0, [0.48, -0.6, 0.64])?;
    let proto = QubitProtocol::new(BlochState::new([0.3, 0.0, 0.4])?, field, [0.05; 3])?;
    println!("P(+) = {}", proto.plus_probability());

    for run in proto.run_many(&(0..8).collect::<Vec<_>>())? {
        println!(
            "seed {} x = {:+.3?} branch {} error {:.2} deg",
            run.sample.seed,
            run.sample.x,
            run.branch.map_or("ambiguous", |b| b.symbol()),
            run.one_shot.angular_error.unwrap().to_degrees()
        );
    }
    Ok(())
}
