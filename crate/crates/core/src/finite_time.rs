//! Finite-duration protective measurement.
//!
//! The coupling `K(t) = (1/T) sum_alpha p_alpha A_alpha(t)` only involves the
//! detector momenta, which are conserved. The joint propagator is therefore
//! block diagonal in momentum and reduces to a family of system unitaries
//! `U_T(p)`, one per momentum vector. These are compared with the ideal
//! `U_inf(p)` on a weighted momentum grid.
//!
//! `U_T(p)` is the midpoint-sliced time-ordered product
//!
//! ```text
//! U_T(p) = prod_{k = N-1 .. 0} exp(-i dt K(t_k)),   t_k = (k + 1/2) dt
//! ```
//!
//! with later slices on the left. Since `exp(-i dt K(t_k)) = e^{i H t_k} E e^{-i H t_k}`
//! with `E = exp(-i dt B)`, `B = sum_alpha p_alpha A_alpha / T`, neighbouring
//! rotations telescope and the product equals
//! `e^{i H t_{N-1}} (E e^{-i H dt})^{N-1} E e^{-i H t_0}`, which is evaluated by
//! repeated squaring. Large slice counts are therefore cheap.

use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

use crate::detectors::MomentumGrid;
use crate::error::{Error, Result};
use crate::io::format_float;
use crate::linalg::{
    expm1_hermitian, expm_hermitian, frobenius, phase_diagonal, phase_diagonal_minus_one,
    power_near_identity, CMatrix, C64,
};
use crate::quantum::{
    stationary_expectations, ExpectationTable, HermitianOperator, SpectralDecomposition,
};

/// Minimum number of slices per period of the fastest Bohr frequency.
pub const SLICES_PER_PERIOD: f64 = 10.0;

/// Floor on the default slice count.
pub const MIN_DEFAULT_STEPS: u64 = 1 << 19;

/// Default slice count: at least [`SLICES_PER_PERIOD`] per fastest period and
/// never fewer than [`MIN_DEFAULT_STEPS`].
pub fn default_steps(duration: f64, max_gap: f64) -> u64 {
    let per_period = (SLICES_PER_PERIOD * duration * max_gap / (2.0 * PI)).ceil();
    (per_period as u64).max(MIN_DEFAULT_STEPS)
}

/// Duration, slicing and couplings of a finite-time protective measurement.
#[derive(Debug, Clone)]
pub struct FiniteTimeConfig {
    duration: f64,
    steps: u64,
    observables: Vec<HermitianOperator>,
    hamiltonian: SpectralDecomposition,
    table: ExpectationTable,
}

impl FiniteTimeConfig {
    pub fn new(
        duration: f64,
        observables: Vec<HermitianOperator>,
        hamiltonian: SpectralDecomposition,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!("duration = {duration}, need > 0")));
        }
        let table = stationary_expectations(&observables, &hamiltonian)?;
        Ok(FiniteTimeConfig {
            steps: default_steps(duration, hamiltonian.max_gap()),
            duration,
            observables,
            hamiltonian,
            table,
        })
    }

    /// Overrides the slice count.
    pub fn with_steps(mut self, steps: u64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be >= 1".into()));
        }
        self.steps = steps;
        Ok(self)
    }

    /// Same couplings and slicing rule at a different duration.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        Self::new(duration, self.observables.clone(), self.hamiltonian.clone())
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn observables(&self) -> &[HermitianOperator] {
        &self.observables
    }

    pub fn hamiltonian(&self) -> &SpectralDecomposition {
        &self.hamiltonian
    }

    pub fn table(&self) -> &ExpectationTable {
        &self.table
    }

    fn check_momentum(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.observables.len() {
            return Err(Error::DimensionMismatch {
                expected: self.observables.len(),
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("momentum is not finite".into()));
        }
        Ok(())
    }

    /// `B = sum_alpha p_alpha A_alpha / T` in the stationary basis.
    fn coupling_in_eigenbasis(&self, p: &[f64]) -> CMatrix {
        let d = self.hamiltonian.dimension();
        let mut b = CMatrix::zeros(d, d);
        for (m, &pa) in self.table.matrices().iter().zip(p) {
            b += m.scale(pa / self.duration);
        }
        b
    }
}

fn to_computational(basis: &SpectralDecomposition, m_eig: &CMatrix) -> CMatrix {
    let v = basis.eigenvectors();
    v * m_eig * v.adjoint()
}

/// `U_T(p)` by midpoint slicing, evaluated through the telescoped form.
pub fn conditional_unitary(p: &[f64], cfg: &FiniteTimeConfig) -> Result<CMatrix> {
    cfg.check_momentum(p)?;
    let omega = cfg.hamiltonian.eigenvalues();
    let n = cfg.steps;
    let dt = cfg.duration / n as f64;
    let d = omega.len();
    let id = CMatrix::identity(d, d);
    // step = E e^{-iH dt} = (I + x_slice)(I + x_free), kept as step - I
    let x_slice = expm1_hermitian(&cfg.coupling_in_eigenbasis(p), dt);
    let x_free = phase_diagonal_minus_one(omega, dt);
    let x_step = &x_slice + &x_free + &x_slice * &x_free;
    let first_time = 0.5 * dt;
    let last_time = (n as f64 - 0.5) * dt;
    let u_eig = phase_diagonal(omega, -last_time)
        * (power_near_identity(&x_step, n - 1) + &id)
        * (x_slice + id)
        * phase_diagonal(omega, first_time);
    Ok(to_computational(&cfg.hamiltonian, &u_eig))
}

/// `U_T(p)` as the literal slice-by-slice product
/// `prod_k exp(-i dt sum_alpha p_alpha A_alpha(t_k) / T)`. Cost is linear in the
/// slice count; intended for cross-checks at moderate step counts.
pub fn conditional_unitary_sequential(p: &[f64], cfg: &FiniteTimeConfig) -> Result<CMatrix> {
    cfg.check_momentum(p)?;
    let d = cfg.hamiltonian.dimension();
    let coupling = cfg
        .observables
        .iter()
        .zip(p)
        .fold(CMatrix::zeros(d, d), |acc, (a, &pa)| {
            acc + a.matrix().scale(pa / cfg.duration)
        });
    let dt = cfg.duration / cfg.steps as f64;
    let mut u = CMatrix::identity(d, d);
    for k in 0..cfg.steps {
        let t = (k as f64 + 0.5) * dt;
        // A(t) = e^{iHt} A e^{-iHt}
        let rot = to_computational(
            &cfg.hamiltonian,
            &phase_diagonal(cfg.hamiltonian.eigenvalues(), -t),
        );
        let k_t = &rot * &coupling * rot.adjoint();
        u = expm_hermitian(&k_t, dt) * u;
    }
    Ok(u)
}

/// `U_inf(p) = sum_n exp(-i sum_alpha p_alpha <A_alpha>_n) |n><n|`, with
/// `shifts` indexed `[n][alpha]`.
pub fn ideal_conditional_unitary(
    p: &[f64],
    shifts: &[Vec<f64>],
    basis: &SpectralDecomposition,
) -> Result<CMatrix> {
    if shifts.len() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            found: shifts.len(),
        });
    }
    let mut phases = Vec::with_capacity(shifts.len());
    for s in shifts {
        if s.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: p.len(),
            });
        }
        phases.push(s.iter().zip(p).map(|(a, b)| a * b).sum::<f64>());
    }
    Ok(to_computational(basis, &phase_diagonal(&phases, 1.0)))
}

/// `D(T) = sum_k w_k ||U_T(p_k) - U_inf(p_k)||_F^2` over the product momentum
/// grid. Nodes are evaluated in parallel and summed in node order.
pub fn channel_distance(
    cfg: &FiniteTimeConfig,
    grid: &MomentumGrid,
    shifts: &[Vec<f64>],
) -> Result<f64> {
    if grid.detector_count() != cfg.observables.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.observables.len(),
            found: grid.detector_count(),
        });
    }
    let terms = (0..grid.node_count())
        .into_par_iter()
        .map(|k| {
            let (p, w) = grid.product_node(k);
            let finite = conditional_unitary(&p, cfg)?;
            let ideal = ideal_conditional_unitary(&p, shifts, &cfg.hamiltonian)?;
            Ok(w * frobenius(&(finite - ideal)).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum())
}

/// Time-averaged off-diagonal element of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonal {
    pub n: usize,
    pub m: usize,
    /// `<n|A|m> (e^{i(w_n - w_m)T} - 1) / (i (w_n - w_m) T)`.
    pub value: C64,
    /// `2 |<n|A|m>| / (T |w_n - w_m|)`.
    pub bound: f64,
}

/// `(e^{ix} - 1) / (ix)`, continuous at `x = 0`.
fn phase_average(x: f64) -> C64 {
    if x.abs() < 1e-4 {
        C64::new(1.0 - x * x / 6.0, x / 2.0)
    } else {
        (C64::from_polar(1.0, x) - 1.0) / C64::new(0.0, x)
    }
}

/// `(1/T) int_0^T <n|A_alpha(t)|m> dt` for every observable and ordered pair
/// `n != m`, in closed form.
pub fn time_averaged_offdiagonals(cfg: &FiniteTimeConfig) -> Result<Vec<Vec<OffDiagonal>>> {
    let omega = cfg.hamiltonian.eigenvalues();
    let tolerance = crate::quantum::DEGENERACY_RELATIVE_TOLERANCE * cfg.hamiltonian.max_gap();
    let d = omega.len();
    let t = cfg.duration;
    let mut out = Vec::with_capacity(cfg.observables.len());
    for m_alpha in cfg.table.matrices() {
        let mut entries = Vec::with_capacity(d * (d - 1));
        for n in 0..d {
            for m in 0..d {
                if n == m {
                    continue;
                }
                let gap = omega[n] - omega[m];
                if gap.abs() <= tolerance {
                    return Err(Error::DegenerateSpectrum {
                        min_gap: gap.abs(),
                        tolerance,
                    });
                }
                let element = m_alpha[(n, m)];
                entries.push(OffDiagonal {
                    n,
                    m,
                    value: element * phase_average(gap * t),
                    bound: 2.0 * element.norm() / (t * gap.abs()),
                });
            }
        }
        out.push(entries);
    }
    Ok(out)
}

/// `D(T)` on a sweep of durations, with the log-log slope of its upper envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub points: Vec<(f64, f64)>,
    /// `None` when some `D` vanishes or fewer than two points exist.
    pub envelope_slope: Option<f64>,
}

impl ConvergenceCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("durations must increase strictly".into()));
        }
        if points.iter().any(|&(_, d)| !(d >= 0.0)) {
            return Err(Error::InvalidArgument("negative distance".into()));
        }
        let envelope_slope = envelope_slope(&points);
        Ok(ConvergenceCurve {
            points,
            envelope_slope,
        })
    }

    /// Writes `T,D` rows and a trailing `# envelope_fit_slope=...` comment row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["T", "D"])?;
        for &(t, d) in &self.points {
            w.write_record([format_float(t), format_float(d)])?;
        }
        let mut inner = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        match self.envelope_slope {
            Some(s) => writeln!(inner, "# envelope_fit_slope={}", format_float(s))?,
            None => writeln!(inner, "# envelope_fit_slope=nan")?,
        }
        Ok(())
    }
}

/// Upper envelope `E(T_i) = max_{j >= i} D(T_j)`, then a least-squares line
/// through `(ln T, ln E)`.
fn envelope_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, d)| d <= 0.0) {
        return None;
    }
    let mut envelope = vec![0.0; points.len()];
    let mut running = 0.0f64;
    for (i, &(_, d)) in points.iter().enumerate().rev() {
        running = running.max(d);
        envelope[i] = running;
    }
    let xs: Vec<f64> = points.iter().map(|&(t, _)| t.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Geometric sweep from `t_min` to `t_max` inclusive.
pub fn geometric_sweep(t_min: f64, t_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || points_per_decade == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad sweep [{t_min}, {t_max}] with {points_per_decade} points per decade"
        )));
    }
    let decades = (t_max / t_min).log10();
    let intervals = ((decades * points_per_decade as f64).round() as usize).max(1);
    Ok((0..=intervals)
        .map(|k| t_min * 10f64.powf(decades * k as f64 / intervals as f64))
        .collect())
}

/// Evaluates `D(T)` for every duration in `durations`, reusing the couplings
/// of `base` with the default slicing rule at each `T`.
pub fn convergence_curve(
    base: &FiniteTimeConfig,
    grid: &MomentumGrid,
    shifts: &[Vec<f64>],
    durations: &[f64],
) -> Result<ConvergenceCurve> {
    let points = durations
        .iter()
        .map(|&t| Ok((t, channel_distance(&base.with_duration(t)?, grid, shifts)?)))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceCurve::new(points)
}
