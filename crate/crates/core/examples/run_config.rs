//! Run a JSON configuration through the library, as the `protective` binary
//! does. Pass a path, or run the bundled qubit demo.

use protective::run::{run, RunConfig};

const DEMO: &str = include_str!("configs/qubit_demo.json");

fn main() -> protective::Result<()> {
    let mut cfg = match std::env::args().nth(1) {
        Some(path) => RunConfig::load(path.as_ref())?,
        None => RunConfig::from_json(DEMO)?,
    };
    cfg.output_dir = std::env::temp_dir().join("protective-example");
    let report = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
