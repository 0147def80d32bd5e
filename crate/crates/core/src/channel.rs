//! The ideal (infinite-duration) joint protective measurement.
//!
//! In the limit of an infinitely long, infinitely weak coupling the joint
//! propagator keeps only the diagonal of each observable in the stationary
//! basis:
//!
//! ```text
//! U_inf = sum_n exp(-i sum_alpha p_alpha <A_alpha>_n) |n><n|
//! ```
//!
//! so each pointer is shifted by `<A_alpha>_n` on branch `n`, and branch `n`
//! occurs with weight `<n|rho|n>`. The Hamiltonian eigenvalues never enter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::detectors::{DetectorBank, GaussianComponent, PointerDistribution};
use crate::error::{Error, Result};
use crate::quantum::{
    spectral_decompose, stationary_expectations, ExpectationTable, HermitianOperator,
    SpectralDecomposition, SystemState,
};

/// Default resolvability factor: a gap counts as resolved by detector `alpha`
/// when `delta_x_alpha <= gap / kappa`.
pub const DEFAULT_KAPPA: f64 = 5.0;

/// Branches lighter than this are dropped from the output mixture.
pub const WEIGHT_FLOOR: f64 = 1e-14;

/// The per-pair outcome of the resolvability check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResolution {
    pub n: usize,
    pub m: usize,
    /// `|<A_alpha>_n - <A_alpha>_m|` per detector.
    pub gaps: Vec<f64>,
    pub resolved: Vec<bool>,
    pub pair_resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvabilityReport {
    pub kappa: f64,
    pub deltas: Vec<f64>,
    pub pairs: Vec<PairResolution>,
    pub all_pairs_resolved: bool,
}

impl ResolvabilityReport {
    /// Detectors that resolve at least one pair.
    pub fn active_detectors(&self) -> Vec<bool> {
        let mut active = vec![false; self.deltas.len()];
        for pair in &self.pairs {
            for (a, &r) in active.iter_mut().zip(&pair.resolved) {
                *a |= r;
            }
        }
        active
    }

    pub fn pair(&self, n: usize, m: usize) -> Option<&PairResolution> {
        let (n, m) = (n.min(m), n.max(m));
        self.pairs.iter().find(|p| p.n == n && p.m == m)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("kappa = {kappa}, need > 0")))
    }
}

fn resolvability(shifts: &[Vec<f64>], deltas: &[f64], kappa: f64) -> ResolvabilityReport {
    let d = shifts.len();
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for n in 0..d {
        for m in n + 1..d {
            let gaps: Vec<f64> = shifts[n]
                .iter()
                .zip(&shifts[m])
                .map(|(a, b)| (a - b).abs())
                .collect();
            let resolved: Vec<bool> = gaps
                .iter()
                .zip(deltas)
                .map(|(&g, &dx)| dx <= g / kappa)
                .collect();
            let pair_resolved = resolved.iter().any(|&r| r);
            pairs.push(PairResolution {
                n,
                m,
                gaps,
                resolved,
                pair_resolved,
            });
        }
    }
    let all_pairs_resolved = pairs.iter().all(|p| p.pair_resolved);
    ResolvabilityReport {
        kappa,
        deltas: deltas.to_vec(),
        pairs,
        all_pairs_resolved,
    }
}

/// Checks `0 < delta_x_alpha << |<A_alpha>_n - <A_alpha>_m|` with `<<` read as
/// a factor `kappa`.
pub fn check_resolvability(
    table: &ExpectationTable,
    bank: &DetectorBank,
    kappa: f64,
) -> Result<ResolvabilityReport> {
    check_kappa(kappa)?;
    if table.observable_count() != bank.len() {
        return Err(Error::DimensionMismatch {
            expected: bank.len(),
            found: table.observable_count(),
        });
    }
    Ok(resolvability(&table.shift_vectors(), &bank.deltas(), kappa))
}

/// Ideal protective channel: stationary basis, pointer shifts and detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealChannel {
    basis: SpectralDecomposition,
    shifts: Vec<Vec<f64>>,
    bank: DetectorBank,
    kappa: f64,
}

impl IdealChannel {
    pub fn new(
        basis: SpectralDecomposition,
        table: &ExpectationTable,
        bank: DetectorBank,
    ) -> Result<Self> {
        if table.dimension() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                found: table.dimension(),
            });
        }
        if table.observable_count() != bank.len() {
            return Err(Error::DimensionMismatch {
                expected: bank.len(),
                found: table.observable_count(),
            });
        }
        Ok(IdealChannel {
            shifts: table.shift_vectors(),
            basis,
            bank,
            kappa: DEFAULT_KAPPA,
        })
    }

    /// Diagonalizes `hamiltonian` and couples detector `alpha` to
    /// `observables[alpha]`.
    pub fn from_operators(
        hamiltonian: &HermitianOperator,
        observables: &[HermitianOperator],
        bank: DetectorBank,
    ) -> Result<Self> {
        let basis = spectral_decompose(hamiltonian)?;
        let table = stationary_expectations(observables, &basis)?;
        Self::new(basis, &table, bank)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        self.kappa = kappa;
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn basis(&self) -> &SpectralDecomposition {
        &self.basis
    }

    pub fn bank(&self) -> &DetectorBank {
        &self.bank
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Pointer shift vectors indexed `[n][alpha]`.
    pub fn shifts(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    pub fn resolvability(&self) -> ResolvabilityReport {
        resolvability(&self.shifts, &self.bank.deltas(), self.kappa)
    }

    /// Branch weights `<n|rho|n>`, normalized to sum to one.
    pub fn branch_weights(&self, state: &SystemState) -> Result<Vec<f64>> {
        if state.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: state.dimension(),
            });
        }
        let raw = (0..self.dimension())
            .map(|n| Ok(state.population(&self.basis.eigenvector(n))?.max(0.0)))
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / total).collect())
    }
}

/// Pointer density after the ideal channel, together with the branch weights
/// `w_n` (indexed by eigenstate, ascending energy).
pub fn apply_ideal_channel(
    channel: &IdealChannel,
    state: &SystemState,
) -> Result<(PointerDistribution, Vec<f64>)> {
    let weights = channel.branch_weights(state)?;
    let kept: f64 = weights.iter().filter(|&&w| w > WEIGHT_FLOOR).sum();
    let deltas = channel.bank.deltas();
    let components = weights
        .iter()
        .zip(&channel.shifts)
        .filter(|(&w, _)| w > WEIGHT_FLOOR)
        .map(|(&w, shift)| GaussianComponent {
            weight: w / kept,
            center: shift.clone(),
            deltas: deltas.clone(),
        })
        .collect();
    Ok((PointerDistribution::new(components)?, weights))
}

/// Decision on which stationary state a readout points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Branch(usize),
    Ambiguous,
}

impl Classification {
    pub fn branch(self) -> Option<usize> {
        match self {
            Classification::Branch(n) => Some(n),
            Classification::Ambiguous => None,
        }
    }
}

/// Box rule: `n` is a candidate when `|x_alpha - <A_alpha>_n| <= kappa delta_x_alpha`
/// for every detector that resolves some pair. A unique candidate wins.
pub fn classify_outcome(x: &[f64], channel: &IdealChannel, kappa: f64) -> Classification {
    if x.len() != channel.bank.len() || !(kappa > 0.0) {
        return Classification::Ambiguous;
    }
    let deltas = channel.bank.deltas();
    let active = resolvability(&channel.shifts, &deltas, kappa).active_detectors();
    let mut candidates = channel.shifts.iter().enumerate().filter(|(_, shift)| {
        (0..x.len())
            .filter(|&a| active[a])
            .all(|a| (x[a] - shift[a]).abs() <= kappa * deltas[a])
    });
    match (candidates.next(), candidates.next()) {
        (Some((n, _)), None) => Classification::Branch(n),
        _ => Classification::Ambiguous,
    }
}

/// One pointer readout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutSample {
    pub seed: u64,
    pub x: Vec<f64>,
    /// Branch that was actually drawn. Ground truth, for testing only.
    pub collapsed_index: usize,
    pub classified: Classification,
}

/// Draws a branch with probability `w_n`, then each pointer reading from
/// `N(<A_alpha>_n, delta_x_alpha^2)`. The stream is ChaCha20 seeded from `seed`.
pub fn sample_readout(
    channel: &IdealChannel,
    state: &SystemState,
    seed: u64,
) -> Result<ReadoutSample> {
    let weights = channel.branch_weights(state)?;
    Ok(sample_with_weights(channel, &weights, seed))
}

fn sample_with_weights(channel: &IdealChannel, weights: &[f64], seed: u64) -> ReadoutSample {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    // fall back to the last populated branch if rounding leaves acc < u
    let mut branch = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    for (n, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc && w > 0.0 {
            branch = n;
            break;
        }
    }
    let x: Vec<f64> = channel.shifts[branch]
        .iter()
        .zip(channel.bank.detectors())
        .map(|(&c, det)| {
            let z: f64 = rng.sample(StandardNormal);
            c + det.delta_x() * z
        })
        .collect();
    let classified = classify_outcome(&x, channel, channel.kappa);
    ReadoutSample {
        seed,
        x,
        collapsed_index: branch,
        classified,
    }
}

/// Samples one readout per seed. Results are ordered like `seeds` and do not
/// depend on how the work is split across threads.
pub fn sample_batch(
    channel: &IdealChannel,
    state: &SystemState,
    seeds: &[u64],
) -> Result<Vec<ReadoutSample>> {
    let weights = channel.branch_weights(state)?;
    Ok(seeds
        .par_iter()
        .map(|&seed| sample_with_weights(channel, &weights, seed))
        .collect())
}

/// Writes `sample_id, seed, x_1..x_N, classified[, collapsed_index]`.
pub fn write_samples_csv<W: Write>(
    writer: W,
    samples: &[ReadoutSample],
    include_ground_truth: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let n = samples.first().map_or(0, |s| s.x.len());
    let mut header = vec!["sample_id".to_string(), "seed".to_string()];
    header.extend((1..=n).map(|a| format!("x_{a}")));
    header.push("classified".into());
    if include_ground_truth {
        header.push("collapsed_index".into());
    }
    w.write_record(&header)?;
    for (id, s) in samples.iter().enumerate() {
        let mut row = vec![id.to_string(), s.seed.to_string()];
        row.extend(s.x.iter().map(|&v| crate::io::format_float(v)));
        row.push(match s.classified {
            Classification::Branch(k) => k.to_string(),
            Classification::Ambiguous => "ambiguous".into(),
        });
        if include_ground_truth {
            row.push(s.collapsed_index.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
