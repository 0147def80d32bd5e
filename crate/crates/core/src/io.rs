//! JSON matrix encoding and float formatting for the file outputs.
//!
//! Matrices are row-major lists of rows, each entry an `[re, im]` pair. A flat
//! list of `d * d` pairs is accepted on input as well. Vectors are flat lists
//! of pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Formats with 17 significant digits, `.` as decimal separator.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wire form of a complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixJson::Rows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        match self {
            MatrixJson::Rows(rows) => {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidArgument(
                        "matrix rows must form a non-empty square".into(),
                    ));
                }
                Ok(CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
            }
            MatrixJson::Flat(entries) => {
                let d = (entries.len() as f64).sqrt().round() as usize;
                if d == 0 || d * d != entries.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} entries do not form a square matrix",
                        entries.len()
                    )));
                }
                Ok(CMatrix::from_fn(d, d, |i, j| {
                    let [re, im] = entries[i * d + j];
                    C64::new(re, im)
                }))
            }
        }
    }
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)))
}

pub fn matrix_to_json_string(m: &CMatrix) -> Result<String> {
    Ok(serde_json::to_string(&MatrixJson::from_matrix(m))?)
}

pub fn matrix_from_json_str(s: &str) -> Result<CMatrix> {
    serde_json::from_str::<MatrixJson>(s)?.to_matrix()
}
