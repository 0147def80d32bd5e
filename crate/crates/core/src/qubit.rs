//! The qubit experiment: an unknown state `rho = (I + s.sigma)/2` in an unknown
//! field `H = Omega e.sigma`, with three detectors coupled to `sigma_x`,
//! `sigma_y`, `sigma_z`.
//!
//! The stationary shifts are `<sigma>_(+/-) = +/- e`, so one readout lands near
//! `+e` with probability `(1 + e.s)/2` and near `-e` otherwise. The field axis is
//! recovered up to its sign; `Omega` stays unknown.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::{sample_batch, Classification, IdealChannel, ReadoutSample};
use crate::detectors::make_detector_bank;
use crate::error::{Error, Result};
use crate::linalg::{pauli, pauli_dot, CMatrix};
use crate::quantum::{HermitianOperator, SystemState};

/// Default pointer dispersion for each of the three detectors.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Largest dispersion accepted by [`run_qubit_protocol`].
pub const MAX_PROTOCOL_DELTA: f64 = 0.2;

const AXIS_TOLERANCE: f64 = 1e-12;
const SCATTER_DEGENERACY: f64 = 1e-9;

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Polarization vector `s` of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub s: [f64; 3],
}

impl BlochState {
    pub fn new(s: [f64; 3]) -> Result<Self> {
        let len = norm3(&s);
        if !(len <= 1.0 + AXIS_TOLERANCE) {
            return Err(Error::BlochVectorTooLong(len));
        }
        Ok(BlochState { s })
    }
}

/// Field strength `Omega > 0` and unit axis `e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub omega: f64,
    pub e: [f64; 3],
}

impl FieldConfig {
    pub fn new(omega: f64, e: [f64; 3]) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega = {omega}, need > 0")));
        }
        let len = norm3(&e);
        if !((len - 1.0).abs() <= AXIS_TOLERANCE) {
            return Err(Error::NonUnitAxis(len));
        }
        Ok(FieldConfig { omega, e })
    }
}

/// The two stationary states of the field Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitBranch {
    /// Eigenvalue `+Omega`, pointer near `+e`.
    Plus,
    /// Eigenvalue `-Omega`, pointer near `-e`.
    Minus,
}

impl QubitBranch {
    /// Channel eigenstates are in ascending energy order: index 0 is `|->`.
    pub fn from_index(n: usize) -> Option<Self> {
        match n {
            0 => Some(QubitBranch::Minus),
            1 => Some(QubitBranch::Plus),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            QubitBranch::Minus => 0,
            QubitBranch::Plus => 1,
        }
    }

    pub fn from_classification(c: Classification) -> Result<Self> {
        c.branch()
            .and_then(Self::from_index)
            .ok_or(Error::AmbiguousBranch)
    }

    pub fn sign(self) -> f64 {
        match self {
            QubitBranch::Plus => 1.0,
            QubitBranch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            QubitBranch::Plus => "+",
            QubitBranch::Minus => "-",
        }
    }
}

/// `rho = (I + s.sigma) / 2`.
pub fn make_qubit_state(b: &BlochState) -> Result<SystemState> {
    let b = BlochState::new(b.s)?;
    let rho = (CMatrix::identity(2, 2) + pauli_dot(&b.s)).scale(0.5);
    SystemState::mixed(rho)
}

/// `H = Omega e.sigma`.
pub fn make_field_hamiltonian(f: &FieldConfig) -> Result<HermitianOperator> {
    let f = FieldConfig::new(f.omega, f.e)?;
    HermitianOperator::new(pauli_dot(&f.e).scale(f.omega))
}

/// `sigma_x`, `sigma_y`, `sigma_z` as observables.
pub fn pauli_observables() -> Vec<HermitianOperator> {
    pauli()
        .into_iter()
        .map(|m| HermitianOperator::new(m).expect("Pauli matrices are Hermitian"))
        .collect()
}

/// The ideal channel of the three Pauli couplings in field `f`.
pub fn pauli_channel(f: &FieldConfig, deltas: &[f64; 3]) -> Result<IdealChannel> {
    let h = make_field_hamiltonian(f)?;
    IdealChannel::from_operators(&h, &pauli_observables(), make_detector_bank(deltas)?)
}

/// Estimated field axis. `e_hat` is a unit vector whose first non-zero
/// component is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisEstimate {
    pub e_hat: [f64; 3],
    pub n_samples: usize,
    /// Angle to the true axis in radians, minimized over its sign. Only filled
    /// in when the truth is known.
    pub angular_error: Option<f64>,
}

impl AxisEstimate {
    /// Angle between `e_hat` and `+/- truth`, in radians.
    pub fn angle_to(&self, truth: &[f64; 3]) -> f64 {
        let c = dot3(&self.e_hat, truth).abs() / norm3(truth);
        // acos is ill-conditioned near 1; use the cross product as well
        let cross = [
            self.e_hat[1] * truth[2] - self.e_hat[2] * truth[1],
            self.e_hat[2] * truth[0] - self.e_hat[0] * truth[2],
            self.e_hat[0] * truth[1] - self.e_hat[1] * truth[0],
        ];
        (norm3(&cross) / norm3(truth)).atan2(c)
    }

    pub fn with_truth(mut self, truth: &[f64; 3]) -> Self {
        self.angular_error = Some(self.angle_to(truth));
        self
    }
}

fn canonical_sign(mut v: [f64; 3]) -> [f64; 3] {
    if let Some(&first) = v.iter().find(|&&c| c != 0.0) {
        if first < 0.0 {
            for c in &mut v {
                *c = -*c;
            }
        }
    }
    v
}

/// Principal eigenvector of the scatter matrix `sum_i x_i x_i^T`. Insensitive to
/// the sign of every sample.
pub fn estimate_axis(samples: &[[f64; 3]]) -> Result<AxisEstimate> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut scatter = Matrix3::<f64>::zeros();
    for x in samples {
        for i in 0..3 {
            for j in 0..3 {
                scatter[(i, j)] += x[i] * x[j];
            }
        }
    }
    let eig = SymmetricEigen::new(scatter);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (top, second) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if top - second <= SCATTER_DEGENERACY * top.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSampleCloud(top, second));
    }
    let col = eig.eigenvectors.column(order[0]);
    let len = col.norm();
    let e_hat = canonical_sign([col[0] / len, col[1] / len, col[2] / len]);
    Ok(AxisEstimate {
        e_hat,
        n_samples: samples.len(),
        angular_error: None,
    })
}

/// `(I +/- e.sigma) / 2`: the stationary state selected by the readout.
pub fn post_measurement_state(
    branch: Option<QubitBranch>,
    f: &FieldConfig,
) -> Result<SystemState> {
    let branch = branch.ok_or(Error::AmbiguousBranch)?;
    let f = FieldConfig::new(f.omega, f.e)?;
    let rho = (CMatrix::identity(2, 2) + pauli_dot(&f.e).scale(branch.sign())).scale(0.5);
    SystemState::mixed(rho)
}

/// One run of the qubit protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitRun {
    pub sample: ReadoutSample,
    pub branch: Option<QubitBranch>,
    /// `x / |x|` with the truth attached.
    pub one_shot: AxisEstimate,
}

/// Prepared qubit experiment: state, field and Pauli channel.
#[derive(Debug, Clone)]
pub struct QubitProtocol {
    pub state: BlochState,
    pub field: FieldConfig,
    channel: IdealChannel,
    rho: SystemState,
}

impl QubitProtocol {
    pub fn new(b: BlochState, f: FieldConfig, deltas: [f64; 3]) -> Result<Self> {
        if let Some((index, &value)) = deltas
            .iter()
            .enumerate()
            .find(|(_, &d)| !(d > 0.0 && d <= MAX_PROTOCOL_DELTA))
        {
            if !(value > 0.0) {
                return Err(Error::NonPositiveDispersion { index, value });
            }
            return Err(Error::InvalidArgument(format!(
                "delta {value} of detector {} exceeds {MAX_PROTOCOL_DELTA}",
                index + 1
            )));
        }
        Ok(QubitProtocol {
            rho: make_qubit_state(&b)?,
            channel: pauli_channel(&f, &deltas)?,
            state: b,
            field: f,
        })
    }

    pub fn channel(&self) -> &IdealChannel {
        &self.channel
    }

    pub fn density_matrix(&self) -> &SystemState {
        &self.rho
    }

    /// Probability `(1 + e.s)/2` of the `+` branch.
    pub fn plus_probability(&self) -> f64 {
        0.5 * (1.0 + dot3(&self.field.e, &self.state.s))
    }

    fn finish(&self, sample: ReadoutSample) -> QubitRun {
        let branch = sample.classified.branch().and_then(QubitBranch::from_index);
        let x = [sample.x[0], sample.x[1], sample.x[2]];
        let len = norm3(&x);
        let one_shot = AxisEstimate {
            e_hat: canonical_sign([x[0] / len, x[1] / len, x[2] / len]),
            n_samples: 1,
            angular_error: None,
        }
        .with_truth(&self.field.e);
        QubitRun {
            sample,
            branch,
            one_shot,
        }
    }

    pub fn run(&self, seed: u64) -> Result<QubitRun> {
        Ok(self.run_many(&[seed])?.remove(0))
    }

    /// One run per seed, in seed order.
    pub fn run_many(&self, seeds: &[u64]) -> Result<Vec<QubitRun>> {
        Ok(sample_batch(&self.channel, &self.rho, seeds)?
            .into_iter()
            .map(|s| self.finish(s))
            .collect())
    }
}

/// Builds the Pauli channel, draws one readout, classifies it and returns the
/// normalized readout as a one-shot axis estimate.
pub fn run_qubit_protocol(
    b: &BlochState,
    f: &FieldConfig,
    deltas: &[f64; 3],
    seed: u64,
) -> Result<(ReadoutSample, AxisEstimate)> {
    let run = QubitProtocol::new(*b, *f, *deltas)?.run(seed)?;
    Ok((run.sample, run.one_shot))
}
