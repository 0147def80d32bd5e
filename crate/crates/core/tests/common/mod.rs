#![allow(dead_code)]

use protective::linalg::{CMatrix, C64};
use protective::quantum::HermitianOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).unwrap()
}

/// Random unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Plain triple loop `a * b`.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = acc;
        }
    }
    c
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Binomial 3-sigma half-width.
pub fn binomial_3sigma(q: f64, n: usize) -> f64 {
    3.0 * (q * (1.0 - q) / n as f64).sqrt()
}
