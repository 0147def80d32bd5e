//! Config-driven experiment runs: parse a JSON [`RunConfig`], execute one mode
//! and write its CSV/JSON artifacts into the output directory.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::channel::{
    apply_ideal_channel, sample_batch, write_samples_csv, IdealChannel, ResolvabilityReport,
    DEFAULT_KAPPA,
};
use crate::detectors::{
    build_momentum_grid, make_detector_bank, DEFAULT_COVERAGE_SIGMAS, DEFAULT_GRID_POINTS,
};
use crate::error::{Error, Result};
use crate::finite_time::{
    convergence_curve, geometric_sweep, time_averaged_offdiagonals, FiniteTimeConfig,
};
use crate::io::{format_float, vector_from_json, MatrixJson};
use crate::qubit::{
    estimate_axis, pauli_observables, BlochState, FieldConfig, QubitBranch, QubitProtocol,
    DEFAULT_DELTA, MAX_PROTOCOL_DELTA,
};
use crate::quantum::{spectral_decompose, stationary_expectations, HermitianOperator, SystemState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ResolveCheck,
    IdealRun,
    FiniteTSweep,
    QubitDemo,
    EstimateAxis,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config("mode", format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSystem {
    pub s: [f64; 3],
    pub e: [f64; 3],
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_omega() -> f64 {
    1.0
}

/// Initial state of a matrix-specified system: a state vector or a density
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Psi(Vec<[f64; 2]>),
    Rho(MatrixJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSystem {
    pub hamiltonian: MatrixJson,
    pub observables: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Qubit(QubitSystem),
    Matrices(MatrixSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub coverage_sigmas: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: DEFAULT_GRID_POINTS,
            coverage_sigmas: DEFAULT_COVERAGE_SIGMAS,
        }
    }
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detectors: Option<DetectorSpec>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sweep: Option<SweepSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Pointer readings for `estimate-axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 3]>>,
    /// CSV with `x1,x2,x3` columns for `estimate-axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_csv: Option<PathBuf>,
    /// Adds ground-truth columns and errors to the outputs.
    #[serde(default)]
    pub test_mode: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<document>".into() } else { path }, e.inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::config("seed", "required for sampling modes"))
    }

    fn require_samples(&self) -> Result<usize> {
        match self.n_samples {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(Error::config("n_samples", "must be >= 1")),
            None => Err(Error::config("n_samples", "required for this mode")),
        }
    }

    fn qubit(&self) -> Result<&QubitSystem> {
        match &self.system {
            Some(SystemSpec::Qubit(q)) => Ok(q),
            Some(_) => Err(Error::config("system", "this mode needs a `qubit` system")),
            None => Err(Error::config("system", "required for this mode")),
        }
    }

    fn deltas(&self, default_len: usize) -> Vec<f64> {
        match &self.detectors {
            Some(d) => d.deltas.clone(),
            None => vec![DEFAULT_DELTA; default_len],
        }
    }

    /// Checks mode-required fields and input validity without running anything.
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("kappa", format!("{} is not > 0", self.kappa)));
        }
        match self.mode {
            Mode::ResolveCheck | Mode::IdealRun | Mode::FiniteTSweep => {
                let system = self.build_system()?;
                if self.mode == Mode::IdealRun {
                    if system.state.is_none() {
                        return Err(Error::config("system.state", "required for ideal-run"));
                    }
                    if self.n_samples.unwrap_or(0) > 0 {
                        self.require_seed()?;
                    }
                }
                if self.mode == Mode::FiniteTSweep {
                    let s = self
                        .t_sweep
                        .ok_or_else(|| Error::config("t_sweep", "required for finite-t-sweep"))?;
                    geometric_sweep(s.t_min, s.t_max, s.points_per_decade)
                        .map_err(|e| Error::config("t_sweep", e.to_string()))?;
                    if self.grid.points < 8 || !(self.grid.coverage_sigmas >= 3.0) {
                        return Err(Error::config(
                            "grid",
                            "need points >= 8 and coverage_sigmas >= 3",
                        ));
                    }
                }
            }
            Mode::QubitDemo => {
                self.build_system()?;
                self.require_seed()?;
                self.require_samples()?;
                if let Some((i, d)) = self
                    .deltas(3)
                    .iter()
                    .enumerate()
                    .find(|(_, &d)| !(d > 0.0 && d <= MAX_PROTOCOL_DELTA))
                {
                    return Err(Error::config(
                        format!("detectors.deltas[{i}]"),
                        format!("{d} outside (0, {MAX_PROTOCOL_DELTA}]"),
                    ));
                }
            }
            Mode::EstimateAxis => match (&self.samples, &self.samples_csv) {
                (Some(s), None) if s.len() >= 2 => {}
                (Some(_), None) => {
                    return Err(Error::config("samples", "need at least 2 samples"))
                }
                (None, Some(_)) => {}
                (Some(_), Some(_)) => {
                    return Err(Error::config("samples", "give `samples` or `samples_csv`, not both"))
                }
                (None, None) => {
                    return Err(Error::config("samples", "required for estimate-axis"))
                }
            },
        }
        Ok(())
    }

    fn build_system(&self) -> Result<BuiltSystem> {
        let system = self
            .system
            .as_ref()
            .ok_or_else(|| Error::config("system", "required for this mode"))?;
        let built = match system {
            SystemSpec::Qubit(q) => {
                let b = BlochState::new(q.s)
                    .map_err(|e| Error::config("system.qubit.s", e.to_string()))?;
                let f = FieldConfig::new(q.omega, q.e)
                    .map_err(|e| Error::config("system.qubit", e.to_string()))?;
                BuiltSystem {
                    hamiltonian: crate::qubit::make_field_hamiltonian(&f)?,
                    observables: pauli_observables(),
                    state: Some(crate::qubit::make_qubit_state(&b)?),
                }
            }
            SystemSpec::Matrices(m) => {
                let as_op = |field: String, mj: &MatrixJson| {
                    mj.to_matrix()
                        .and_then(HermitianOperator::new)
                        .map_err(|e| Error::config(field, e.to_string()))
                };
                let hamiltonian = as_op("system.matrices.hamiltonian".into(), &m.hamiltonian)?;
                let observables = m
                    .observables
                    .iter()
                    .enumerate()
                    .map(|(i, o)| as_op(format!("system.matrices.observables[{i}]"), o))
                    .collect::<Result<Vec<_>>>()?;
                if observables.is_empty() {
                    return Err(Error::config("system.matrices.observables", "empty"));
                }
                for (i, o) in observables.iter().enumerate() {
                    if o.dimension() != hamiltonian.dimension() {
                        return Err(Error::config(
                            format!("system.matrices.observables[{i}]"),
                            format!(
                                "dimension {} differs from the Hamiltonian's {}",
                                o.dimension(),
                                hamiltonian.dimension()
                            ),
                        ));
                    }
                }
                let state = match &m.state {
                    None => None,
                    Some(StateSpec::Psi(v)) => Some(
                        SystemState::pure(vector_from_json(v))
                            .map_err(|e| Error::config("system.matrices.state.psi", e.to_string()))?,
                    ),
                    Some(StateSpec::Rho(r)) => Some(
                        r.to_matrix()
                            .and_then(SystemState::mixed)
                            .map_err(|e| Error::config("system.matrices.state.rho", e.to_string()))?,
                    ),
                };
                if let Some(s) = &state {
                    if s.dimension() != hamiltonian.dimension() {
                        return Err(Error::config("system.matrices.state", "dimension mismatch"));
                    }
                }
                BuiltSystem {
                    hamiltonian,
                    observables,
                    state,
                }
            }
        };
        let deltas = self.deltas(built.observables.len());
        if deltas.len() != built.observables.len() {
            return Err(Error::config(
                "detectors.deltas",
                format!(
                    "{} dispersions for {} observables",
                    deltas.len(),
                    built.observables.len()
                ),
            ));
        }
        make_detector_bank(&deltas).map_err(|e| Error::config("detectors.deltas", e.to_string()))?;
        Ok(built)
    }
}

struct BuiltSystem {
    hamiltonian: HermitianOperator,
    observables: Vec<HermitianOperator>,
    state: Option<SystemState>,
}

/// Result of a successful run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolvability: Option<ResolvabilityReport>,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub version: String,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

fn seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base.wrapping_add(i)).collect()
}

/// Executes `config` and writes its artifacts.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    config.validate()?;
    let mut out = Outputs::new(&config.output_dir)?;
    let resolvability = match config.mode {
        Mode::ResolveCheck => Some(resolve_check(config, &mut out)?),
        Mode::IdealRun => Some(ideal_run(config, &mut out)?),
        Mode::FiniteTSweep => Some(finite_t_sweep(config, &mut out)?),
        Mode::QubitDemo => Some(qubit_demo(config, &mut out)?),
        Mode::EstimateAxis => {
            estimate_axis_mode(config, &mut out)?;
            None
        }
    };
    Ok(RunReport {
        config: config.clone(),
        kappa: config.kappa,
        resolvability,
        files: out.files,
        wall_time_s: started.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    })
}

fn build_channel(config: &RunConfig, system: &BuiltSystem) -> Result<IdealChannel> {
    let bank = make_detector_bank(&config.deltas(system.observables.len()))?;
    IdealChannel::from_operators(&system.hamiltonian, &system.observables, bank)?
        .with_kappa(config.kappa)
}

fn resolve_check(config: &RunConfig, out: &mut Outputs) -> Result<ResolvabilityReport> {
    let channel = build_channel(config, &config.build_system()?)?;
    let report = channel.resolvability();
    out.write_json("resolvability.json", &report)?;
    Ok(report)
}

fn ideal_run(config: &RunConfig, out: &mut Outputs) -> Result<ResolvabilityReport> {
    let system = config.build_system()?;
    let channel = build_channel(config, &system)?;
    let state = system.state.as_ref().expect("validated");
    let (dist, weights) = apply_ideal_channel(&channel, state)?;
    out.write_json("pointer_distribution.json", &dist)?;
    out.write_json(
        "branch_weights.json",
        &serde_json::json!({
            "eigenvalues": channel.basis().eigenvalues(),
            "weights": weights,
            "shifts": channel.shifts(),
        }),
    )?;
    let n = config.n_samples.unwrap_or(0);
    if n > 0 {
        let samples = sample_batch(&channel, state, &seeds(config.require_seed()?, n))?;
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &samples, config.test_mode)?;
        out.write("samples.csv", &buf)?;
    }
    let report = channel.resolvability();
    out.write_json("resolvability.json", &report)?;
    Ok(report)
}

fn finite_t_sweep(config: &RunConfig, out: &mut Outputs) -> Result<ResolvabilityReport> {
    let system = config.build_system()?;
    let channel = build_channel(config, &system)?;
    let sweep = config.t_sweep.expect("validated");
    let durations = geometric_sweep(sweep.t_min, sweep.t_max, sweep.points_per_decade)?;
    let basis = spectral_decompose(&system.hamiltonian)?;
    let base = FiniteTimeConfig::new(durations[0], system.observables.clone(), basis.clone())?;
    let grid = build_momentum_grid(channel.bank(), config.grid.points, config.grid.coverage_sigmas)?;
    let shifts = stationary_expectations(&system.observables, &basis)?.shift_vectors();
    let curve = convergence_curve(&base, &grid, &shifts, &durations)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    out.write("convergence.csv", &buf)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["T", "observable", "n", "m", "abs_value", "bound"])?;
    for &t in &durations {
        let cfg = base.with_duration(t)?;
        for (alpha, entries) in time_averaged_offdiagonals(&cfg)?.iter().enumerate() {
            for od in entries {
                w.write_record([
                    format_float(t),
                    (alpha + 1).to_string(),
                    od.n.to_string(),
                    od.m.to_string(),
                    format_float(od.value.norm()),
                    format_float(od.bound),
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write("offdiagonals.csv", &bytes)?;
    let report = channel.resolvability();
    out.write_json("resolvability.json", &report)?;
    Ok(report)
}

fn qubit_demo(config: &RunConfig, out: &mut Outputs) -> Result<ResolvabilityReport> {
    let q = config.qubit()?;
    let deltas = config.deltas(3);
    let protocol = QubitProtocol::new(
        BlochState::new(q.s)?,
        FieldConfig::new(q.omega, q.e)?,
        [deltas[0], deltas[1], deltas[2]],
    )?;
    let channel = protocol.channel().clone().with_kappa(config.kappa)?;
    let runs = sample_batch(
        &channel,
        protocol.density_matrix(),
        &seeds(config.require_seed()?, config.require_samples()?),
    )?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["run_id", "seed", "x1", "x2", "x3", "classified_branch"];
    if config.test_mode {
        header.push("collapsed_branch");
    }
    w.write_record(&header)?;
    let (mut plus, mut minus) = (0usize, 0usize);
    let mut points = Vec::with_capacity(runs.len());
    for (id, s) in runs.iter().enumerate() {
        let branch = QubitBranch::from_classification(s.classified).ok();
        match branch {
            Some(QubitBranch::Plus) => plus += 1,
            Some(QubitBranch::Minus) => minus += 1,
            None => {}
        }
        points.push([s.x[0], s.x[1], s.x[2]]);
        let mut row = vec![id.to_string(), s.seed.to_string()];
        row.extend(s.x.iter().map(|&v| format_float(v)));
        row.push(branch.map_or("ambiguous", QubitBranch::symbol).to_string());
        if config.test_mode {
            let truth = QubitBranch::from_index(s.collapsed_index).expect("qubit branch");
            row.push(truth.symbol().to_string());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write("campaign.csv", &bytes)?;

    let n = runs.len() as f64;
    let report = channel.resolvability();
    let mut summary = serde_json::json!({
        "n_samples": runs.len(),
        "kappa": config.kappa,
        "branch_frequency": {
            "+": plus as f64 / n,
            "-": minus as f64 / n,
            "ambiguous": (runs.len() - plus - minus) as f64 / n,
        },
        "resolvability": report,
    });
    match estimate_axis(&points) {
        Ok(est) => {
            summary["e_est"] = serde_json::json!(est.e_hat);
            if config.test_mode {
                summary["angular_error_deg"] =
                    serde_json::json!(est.angle_to(&q.e).to_degrees());
                summary["plus_probability"] = serde_json::json!(protocol.plus_probability());
            }
        }
        Err(e) => summary["e_est_error"] = serde_json::json!(e.to_string()),
    }
    out.write_json("summary.json", &summary)?;
    Ok(report)
}

fn read_samples_csv(path: &Path) -> Result<Vec<[f64; 3]>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::config("samples_csv", format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let column = |names: &[&str]| {
        headers
            .iter()
            .position(|h| names.contains(&h.trim()))
            .ok_or_else(|| Error::config("samples_csv", format!("missing column {}", names[0])))
    };
    let cols = [
        column(&["x1", "x_1"])?,
        column(&["x2", "x_2"])?,
        column(&["x3", "x_3"])?,
    ];
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut x = [0.0; 3];
        for (slot, &c) in x.iter_mut().zip(&cols) {
            *slot = record[c]
                .trim()
                .parse()
                .map_err(|e| Error::config("samples_csv", format!("bad number: {e}")))?;
        }
        out.push(x);
    }
    Ok(out)
}

fn estimate_axis_mode(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let samples = match (&config.samples, &config.samples_csv) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read_samples_csv(path)?,
        (None, None) => unreachable!("validated"),
    };
    let est = estimate_axis(&samples)?;
    let mut value = serde_json::json!({
        "e_est": est.e_hat,
        "n_samples": est.n_samples,
    });
    if config.test_mode {
        if let Some(SystemSpec::Qubit(q)) = &config.system {
            value["angular_error_deg"] = serde_json::json!(est.angle_to(&q.e).to_degrees());
        }
    }
    out.write_json("axis.json", &value)
}
