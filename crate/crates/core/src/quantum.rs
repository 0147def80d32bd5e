//! States, Hermitian operators, non-degenerate spectral decompositions and the
//! table of stationary expectation values `<n|A_alpha|m>`.

use crate::error::{Error, Result};
use crate::linalg::{eigh, frobenius, hermitian_part, hermiticity_defect, CMatrix, CVector, C64};

/// Tolerance for the Hermiticity and state checks.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Relative spectral gap below which a spectrum counts as degenerate.
pub const DEGENERACY_RELATIVE_TOLERANCE: f64 = 1e-8;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIMENSION: usize = 64;

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 || m.nrows() > MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "dimension {} outside 1..={MAX_DIMENSION}",
            m.nrows()
        )));
    }
    Ok(m.nrows())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A normalized pure state vector or a density matrix.
///
/// Pure states are kept as vectors; [`SystemState::to_density_matrix`] is the only
/// conversion path.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState(Repr);

impl SystemState {
    pub fn pure(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() > MAX_DIMENSION {
            return Err(Error::InvalidState(format!(
                "dimension {} outside 1..={MAX_DIMENSION}",
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "sum |psi_k|^2 = {norm_sqr}, expected 1"
            )));
        }
        Ok(SystemState(Repr::Pure(amplitudes)))
    }

    /// Normalizes `amplitudes` before validation.
    pub fn pure_normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::pure(amplitudes.unscale(norm))
    }

    /// Computational basis state `|k>` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidArgument(format!("basis index {k} >= dimension {d}")));
        }
        let mut v = CVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        Self::pure(v)
    }

    pub fn mixed(rho: CMatrix) -> Result<Self> {
        check_square(&rho)?;
        let defect = hermiticity_defect(&rho);
        if defect > STATE_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > STATE_TOLERANCE || trace.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace = {trace}, expected 1")));
        }
        let (values, _) = eigh(&rho);
        if values[0] < -STATE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                values[0]
            )));
        }
        Ok(SystemState(Repr::Mixed(hermitian_part(&rho))))
    }

    pub fn kind(&self) -> StateKind {
        match self.0 {
            Repr::Pure(_) => StateKind::Pure,
            Repr::Mixed(_) => StateKind::Mixed,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.0 {
            Repr::Pure(v) => v.len(),
            Repr::Mixed(m) => m.nrows(),
        }
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match &self.0 {
            Repr::Pure(v) => Some(v),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Option<&CMatrix> {
        match &self.0 {
            Repr::Pure(_) => None,
            Repr::Mixed(m) => Some(m),
        }
    }

    pub fn to_density_matrix(&self) -> CMatrix {
        match &self.0 {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Mixed(m) => m.clone(),
        }
    }

    /// `<v|rho|v>` for a unit vector `v`.
    pub fn population(&self, v: &CVector) -> Result<f64> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: v.len(),
            });
        }
        Ok(match &self.0 {
            Repr::Pure(psi) => v.dotc(psi).norm_sqr(),
            Repr::Mixed(rho) => v.dotc(&(rho * v)).re,
        })
    }
}

/// A Hermitian matrix, stored exactly Hermitian after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > STATE_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        Ok(HermitianOperator {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(CMatrix::identity(d, d))
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `W A W^dagger`.
    pub fn conjugated(&self, w: &CMatrix) -> Result<Self> {
        Self::new(w * &self.matrix * w.adjoint())
    }

    pub fn commutes_with(&self, other: &HermitianOperator, tol: f64) -> bool {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        frobenius(&c) <= tol
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors (as columns) of a
/// non-degenerate Hermitian operator.
///
/// Each eigenvector is phased so that its largest-modulus entry is real and
/// positive (the first such entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    min_gap: f64,
}

impl SpectralDecomposition {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, n: usize) -> CVector {
        self.eigenvectors.column(n).into_owned()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Largest `|w_n - w_m|`.
    pub fn max_gap(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1] - self.eigenvalues[0]
    }

    /// `|n><n|`.
    pub fn projector(&self, n: usize) -> CMatrix {
        let v = self.eigenvector(n);
        &v * v.adjoint()
    }

    /// `sum_n w_n |n><n|`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let d = self.dimension();
        let scaled = CMatrix::from_fn(d, d, |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled * v.adjoint()
    }

    /// Same eigenvectors, different (distinct) eigenvalues.
    pub fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: eigenvalues.len(),
            });
        }
        let (min_gap, tolerance) = gap_stats(&eigenvalues);
        if min_gap <= tolerance {
            return Err(Error::DegenerateSpectrum { min_gap, tolerance });
        }
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
            min_gap,
        })
    }
}

fn gap_stats(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let range = sorted[sorted.len() - 1] - sorted[0];
    (min_gap, DEGENERACY_RELATIVE_TOLERANCE * range)
}

fn fix_phase(vectors: &mut CMatrix) {
    for j in 0..vectors.ncols() {
        let mut best = 0;
        let mut best_mod = -1.0;
        for i in 0..vectors.nrows() {
            let m = vectors[(i, j)].norm();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        let pivot = vectors[(best, j)];
        let phase = pivot.conj().unscale(pivot.norm());
        for i in 0..vectors.nrows() {
            vectors[(i, j)] *= phase;
        }
        // the pivot is real by construction; drop the rounding residue
        vectors[(best, j)] = C64::new(vectors[(best, j)].re, 0.0);
    }
}

/// Diagonalizes `h`, refusing degenerate spectra.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    if h.dimension() < 2 {
        return Err(Error::InvalidArgument(
            "spectral decomposition requires dimension >= 2".into(),
        ));
    }
    let (eigenvalues, mut eigenvectors) = eigh(h.matrix());
    let (min_gap, tolerance) = gap_stats(&eigenvalues);
    if min_gap <= tolerance {
        return Err(Error::DegenerateSpectrum { min_gap, tolerance });
    }
    fix_phase(&mut eigenvectors);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        min_gap,
    })
}

/// Matrix elements of each observable in the stationary basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTable {
    matrices: Vec<CMatrix>,
    shifts: Vec<Vec<f64>>,
}

impl ExpectationTable {
    pub fn observable_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn dimension(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// `M_alpha[n, m] = <n|A_alpha|m>`.
    pub fn matrix(&self, alpha: usize) -> &CMatrix {
        &self.matrices[alpha]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `<A_alpha>_n` for every `n`.
    pub fn shifts(&self, alpha: usize) -> &[f64] {
        &self.shifts[alpha]
    }

    /// Pointer shift vector of eigenstate `n`: `(<A_1>_n, <A_2>_n, ...)`.
    pub fn shift_vector(&self, n: usize) -> Vec<f64> {
        self.shifts.iter().map(|s| s[n]).collect()
    }

    /// All shift vectors, indexed `[n][alpha]`.
    pub fn shift_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dimension()).map(|n| self.shift_vector(n)).collect()
    }
}

/// Builds the table `<n|A_alpha|m>` for every observable.
pub fn stationary_expectations(
    observables: &[HermitianOperator],
    basis: &SpectralDecomposition,
) -> Result<ExpectationTable> {
    if observables.is_empty() {
        return Err(Error::InvalidArgument("no observables".into()));
    }
    let v = basis.eigenvectors();
    let mut matrices = Vec::with_capacity(observables.len());
    let mut shifts = Vec::with_capacity(observables.len());
    for a in observables {
        if a.dimension() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                found: a.dimension(),
            });
        }
        let m = hermitian_part(&(v.adjoint() * a.matrix() * v));
        shifts.push((0..m.nrows()).map(|n| m[(n, n)].re).collect());
        matrices.push(m);
    }
    Ok(ExpectationTable { matrices, shifts })
}
