//! The von Neumann detector bank.
//!
//! Every detector starts in a minimum-uncertainty Gaussian pointer state centered
//! at zero, with position dispersion `delta_x` and momentum dispersion
//! `delta_p = 1 / (2 delta_x)` (units with hbar = 1). Detector self-Hamiltonians
//! vanish, so the pointer momenta are conserved during the coupling.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on the total weight of a [`PointerDistribution`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Default number of momentum nodes per detector.
pub const DEFAULT_GRID_POINTS: usize = 64;

/// Default half-width of the momentum grid in units of `delta_p`.
pub const DEFAULT_COVERAGE_SIGMAS: f64 = 5.0;

/// Normal density with mean `mean` and standard deviation `sigma`.
pub fn gaussian_density(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detector {
    label: String,
    delta_x: f64,
}

impl Detector {
    pub fn new(label: impl Into<String>, delta_x: f64) -> Result<Self> {
        if !(delta_x > 0.0 && delta_x.is_finite()) {
            return Err(Error::NonPositiveDispersion {
                index: 0,
                value: delta_x,
            });
        }
        Ok(Detector {
            label: label.into(),
            delta_x,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn delta_p(&self) -> f64 {
        0.5 / self.delta_x
    }

    /// Initial pointer wave function `psi_D(x)` (real, zero mean).
    pub fn position_amplitude(&self, x: f64) -> f64 {
        let s = self.delta_x;
        (2.0 * PI * s * s).powf(-0.25) * (-x * x / (4.0 * s * s)).exp()
    }

    /// `|psi_D(x)|^2`.
    pub fn position_density(&self, x: f64) -> f64 {
        gaussian_density(x, 0.0, self.delta_x)
    }

    /// `|psi~_D(p)|^2`.
    pub fn momentum_density(&self, p: f64) -> f64 {
        gaussian_density(p, 0.0, self.delta_p())
    }
}

/// An ordered, non-empty list of detectors with unique labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorBank {
    detectors: Vec<Detector>,
}

impl DetectorBank {
    pub fn new(detectors: Vec<Detector>) -> Result<Self> {
        if detectors.is_empty() {
            return Err(Error::InvalidArgument("detector bank is empty".into()));
        }
        let mut seen = HashSet::new();
        for d in &detectors {
            if !seen.insert(d.label()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate detector label `{}`",
                    d.label()
                )));
            }
        }
        Ok(DetectorBank { detectors })
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn detector(&self, alpha: usize) -> &Detector {
        &self.detectors[alpha]
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.detectors.iter().map(Detector::delta_x).collect()
    }

    /// Single-detector bank holding detector `alpha`.
    pub fn single(&self, alpha: usize) -> DetectorBank {
        DetectorBank {
            detectors: vec![self.detectors[alpha].clone()],
        }
    }

    /// The zero-mean initial pointer distribution.
    pub fn initial_distribution(&self) -> PointerDistribution {
        PointerDistribution {
            components: vec![GaussianComponent {
                weight: 1.0,
                center: vec![0.0; self.len()],
                deltas: self.deltas(),
            }],
        }
    }
}

/// Bank of detectors labelled `x1, x2, ...` with the given dispersions.
pub fn make_detector_bank(deltas: &[f64]) -> Result<DetectorBank> {
    let detectors = deltas
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            Detector::new(format!("x{}", index + 1), value)
                .map_err(|_| Error::NonPositiveDispersion { index, value })
        })
        .collect::<Result<Vec<_>>>()?;
    DetectorBank::new(detectors)
}

/// Quadrature nodes and weights for one detector's momentum distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAxis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Per-detector trapezoid quadrature of `|psi~(p)|^2 dp` on uniform grids
/// symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    axes: Vec<MomentumAxis>,
}

impl MomentumGrid {
    pub fn axes(&self) -> &[MomentumAxis] {
        &self.axes
    }

    pub fn axis(&self, alpha: usize) -> &MomentumAxis {
        &self.axes[alpha]
    }

    pub fn detector_count(&self) -> usize {
        self.axes.len()
    }

    /// Number of nodes of the product grid.
    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.nodes.len()).product()
    }

    /// Node `k` of the product grid (last detector varies fastest) and its
    /// product weight.
    pub fn product_node(&self, mut k: usize) -> (Vec<f64>, f64) {
        let mut p = vec![0.0; self.axes.len()];
        let mut w = 1.0;
        for (alpha, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.nodes.len();
            let i = k % n;
            k /= n;
            p[alpha] = axis.nodes[i];
            w *= axis.weights[i];
        }
        (p, w)
    }
}

pub fn build_momentum_grid(
    bank: &DetectorBank,
    points_per_detector: usize,
    coverage_sigmas: f64,
) -> Result<MomentumGrid> {
    if points_per_detector < 8 {
        return Err(Error::InvalidArgument(format!(
            "points_per_detector = {points_per_detector}, need >= 8"
        )));
    }
    if !(coverage_sigmas >= 3.0 && coverage_sigmas.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "coverage_sigmas = {coverage_sigmas}, need >= 3"
        )));
    }
    let axes = bank
        .detectors()
        .iter()
        .map(|det| {
            let half_width = coverage_sigmas * det.delta_p();
            let h = 2.0 * half_width / (points_per_detector - 1) as f64;
            let nodes: Vec<f64> = (0..points_per_detector)
                .map(|k| -half_width + k as f64 * h)
                .collect();
            let weights = nodes
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    let end = k == 0 || k == points_per_detector - 1;
                    let trapezoid = if end { 0.5 * h } else { h };
                    trapezoid * det.momentum_density(p)
                })
                .collect();
            MomentumAxis { nodes, weights }
        })
        .collect();
    Ok(MomentumGrid { axes })
}

/// One term `q_i prod_alpha N(x_alpha; c_alpha, delta_alpha^2)` of a pointer mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl GaussianComponent {
    fn density_at(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.deltas)
            .map(|((&xa, &c), &s)| gaussian_density(xa, c, s))
            .product()
    }
}

/// Joint pointer density represented as a weighted Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PointerDistribution {
    components: Vec<GaussianComponent>,
}

#[derive(Deserialize)]
struct RawDistribution {
    components: Vec<GaussianComponent>,
}

impl TryFrom<RawDistribution> for PointerDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        PointerDistribution::new(raw.components)
    }
}

impl PointerDistribution {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument("pointer distribution has no components".into()));
        };
        let n = first.center.len();
        if n == 0 {
            return Err(Error::InvalidArgument("pointer distribution has no detectors".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if c.center.len() != n || c.deltas.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.center.len().max(c.deltas.len()),
                });
            }
            if !(c.weight >= 0.0) {
                return Err(Error::InvalidArgument(format!("negative weight {}", c.weight)));
            }
            if let Some((index, &value)) =
                c.deltas.iter().enumerate().find(|(_, &s)| !(s > 0.0))
            {
                return Err(Error::NonPositiveDispersion { index, value });
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        Ok(PointerDistribution { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Number of pointer coordinates.
    pub fn dimension(&self) -> usize {
        self.components[0].center.len()
    }

    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.weight * c.density_at(x))
            .sum())
    }

    /// Mean pointer position.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dimension()];
        for c in &self.components {
            for (acc, &x) in m.iter_mut().zip(&c.center) {
                *acc += c.weight * x;
            }
        }
        m
    }

    /// Marginal density of pointer `alpha`; components with equal centers are
    /// merged.
    pub fn marginal(&self, alpha: usize) -> Result<PointerDistribution> {
        if alpha >= self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: alpha + 1,
            });
        }
        let mut merged: Vec<GaussianComponent> = Vec::new();
        for c in &self.components {
            let center = c.center[alpha];
            let delta = c.deltas[alpha];
            match merged
                .iter_mut()
                .find(|m| m.center[0] == center && m.deltas[0] == delta)
            {
                Some(m) => m.weight += c.weight,
                None => merged.push(GaussianComponent {
                    weight: c.weight,
                    center: vec![center],
                    deltas: vec![delta],
                }),
            }
        }
        PointerDistribution::new(merged)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Free-function form of [`PointerDistribution::density_at`].
pub fn density_at(dist: &PointerDistribution, x: &[f64]) -> Result<f64> {
    dist.density_at(x)
}
