//! Small dense complex matrix helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entrywise modulus of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance between `m` and the identity.
pub fn distance_from_identity(m: &CMatrix) -> f64 {
    let id = CMatrix::identity(m.nrows(), m.ncols());
    frobenius(&(m - id))
}

/// Unitarity defect `||U^dagger U - I||_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    distance_from_identity(&(u.adjoint() * u))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending
/// order. No degeneracy check and no phase fixing.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `exp(-i t M)` for Hermitian `M`.
pub fn expm_hermitian(m: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&w| C64::from_polar(1.0, -t * w)),
    );
    let scaled = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| vectors[(i, j)] * phases[j]);
    scaled * vectors.adjoint()
}

/// `exp(-i phi) - 1` without cancellation for small `phi`.
fn expm1_phase(phi: f64) -> C64 {
    let half = 0.5 * phi;
    C64::new(-2.0 * half.sin().powi(2), -phi.sin())
}

/// `exp(-i t M) - I` for Hermitian `M`, accurate when `t M` is small.
pub(crate) fn expm1_hermitian(m: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let scaled = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        vectors[(i, j)] * expm1_phase(t * values[j])
    });
    scaled * vectors.adjoint()
}

/// `diag(exp(-i t w_n)) - I`.
pub(crate) fn phase_diagonal_minus_one(values: &[f64], t: f64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&w| expm1_phase(t * w)),
    ))
}

/// `(I + X)^k - I` by repeated squaring in the `I + X` representation, so that
/// rounding stays relative to `X` rather than to the identity.
pub(crate) fn power_near_identity(x: &CMatrix, mut k: u64) -> CMatrix {
    let mut result = CMatrix::zeros(x.nrows(), x.ncols());
    let mut base = x.clone();
    while k > 0 {
        if k & 1 == 1 {
            // (I + R)(I + B) - I = R + B + R B
            result = &result + &base + &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = base.scale(2.0) + &base * &base;
        }
    }
    result
}

/// Diagonal matrix `diag(exp(-i t w_n))`.
pub(crate) fn phase_diagonal(values: &[f64], t: f64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&w| C64::from_polar(1.0, -t * w)),
    ))
}

/// `m^k` by repeated squaring.
#[cfg(test)]
pub(crate) fn matrix_power(m: &CMatrix, mut k: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// The Pauli matrices `(sigma_x, sigma_y, sigma_z)`.
pub fn pauli() -> [CMatrix; 3] {
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// `v . sigma` for a real 3-vector.
pub fn pauli_dot(v: &[f64; 3]) -> CMatrix {
    let [sx, sy, sz] = pauli();
    sx.scale(v[0]) + sy.scale(v[1]) + sz.scale(v[2])
}
