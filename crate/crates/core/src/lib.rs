//! Numerical toolkit for joint protective measurements on small quantum systems.
//!
//! A set of von Neumann detectors is coupled weakly, for a long time `T`, to
//! observables `A_1, A_2, ...` of a system with non-degenerate Hamiltonian
//! `H = sum_n w_n |n><n|`. In the limit `T -> inf` each pointer is shifted by the
//! stationary expectation `<n|A_alpha|n>` on branch `n`, which occurs with
//! probability `<n|rho|n>`. For a qubit coupled to all three Pauli matrices a
//! single readout lands near `+e` or `-e`, revealing the field axis and with it
//! the stationary basis.
//!
//! Modules:
//!
//! - [`quantum`]: states, Hermitian operators, spectral decomposition and the
//!   table of stationary expectation values.
//! - [`detectors`]: Gaussian pointer bank, momentum quadrature, pointer mixtures.
//! - [`channel`]: resolvability check, ideal channel, seeded readout sampling and
//!   outcome classification.
//! - [`finite_time`]: finite-`T` propagators conditioned on detector momenta and
//!   their distance to the ideal channel.
//! - [`qubit`]: the three-Pauli qubit experiment and axis estimation.
//! - [`run`]: JSON-configured runs writing CSV/JSON artifacts.

#![forbid(unsafe_code)]

pub mod channel;
pub mod detectors;
pub mod error;
pub mod finite_time;
pub mod io;
pub mod linalg;
pub mod quantum;
pub mod qubit;
pub mod run;

pub use channel::{
    apply_ideal_channel, check_resolvability, classify_outcome, sample_readout, Classification,
    IdealChannel, ReadoutSample, ResolvabilityReport,
};
pub use detectors::{
    build_momentum_grid, density_at, make_detector_bank, DetectorBank, MomentumGrid,
    PointerDistribution,
};
pub use error::{Error, Result};
pub use finite_time::{
    channel_distance, conditional_unitary, ideal_conditional_unitary, time_averaged_offdiagonals,
    ConvergenceCurve, FiniteTimeConfig,
};
pub use quantum::{
    spectral_decompose, stationary_expectations, ExpectationTable, HermitianOperator,
    SpectralDecomposition, SystemState,
};
pub use qubit::{
    estimate_axis, make_field_hamiltonian, make_qubit_state, post_measurement_state,
    run_qubit_protocol, AxisEstimate, BlochState, FieldConfig, QubitBranch,
};
pub use run::{run, RunConfig, RunReport};
