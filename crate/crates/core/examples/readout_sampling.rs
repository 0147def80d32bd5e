//! Draw seeded pointer readouts, classify them and write the CSV.

use protective::channel::{sample_batch, write_samples_csv, Classification, IdealChannel};
use protective::detectors::make_detector_bank;
use protective::quantum::{HermitianOperator, SystemState};

fn main() -> protective::Result<()> {
    let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.0])?;
    let a = HermitianOperator::diagonal(&[5.0, 6.0, 7.0])?;
    let channel = IdealChannel::from_operators(&h, &[a], make_detector_bank(&[0.1])?)?;
    let state = SystemState::basis(3, 1)?;

    let seeds: Vec<u64> = (100..110).collect();
    let samples = sample_batch(&channel, &state, &seeds)?;
    let ambiguous = samples.iter().filter(|s| s.classified == Classification::Ambiguous).count();
    println!("{ambiguous} of {} readouts ambiguous", samples.len());

    write_samples_csv(std::io::stdout().lock(), &samples, true)
}
