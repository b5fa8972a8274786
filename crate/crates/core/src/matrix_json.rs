//! JSON form of complex matrices and vectors.
//!
//! A matrix is an array of rows, each row an array of `[re, im]` pairs. A
//! vector is a flat array of `[re, im]` pairs. `serde_json` writes `f64`
//! with shortest round-trip formatting, so values survive a round trip
//! bit-for-bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;
pub type VectorJson = Vec<[f64; 2]>;

pub fn matrix_to_json(m: &DMatrix<Complex64>) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<DMatrix<Complex64>, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(format!("row {i} has {} entries, expected {ncols}", row.len()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

pub fn vector_to_json(v: &DVector<Complex64>) -> VectorJson {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(entries: &VectorJson) -> DVector<Complex64> {
    DVector::from_iterator(entries.len(), entries.iter().map(|&[re, im]| Complex64::new(re, im)))
}

/// `#[serde(with = "crate::matrix_json::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows = MatrixJson::deserialize(d)?;
        matrix_from_json(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::matrix_json::vector")]`
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        vector_to_json(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<Complex64>, D::Error> {
        Ok(vector_from_json(&VectorJson::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matrix_round_trip_is_lossless(
            entries in prop::collection::vec((any::<f64>(), any::<f64>()), 1..=16),
        ) {
            prop_assume!(entries.iter().all(|(a, b)| a.is_finite() && b.is_finite()));
            let n = entries.len();
            let m = DMatrix::from_fn(1, n, |_, j| Complex64::new(entries[j].0, entries[j].1));
            let text = serde_json::to_string(&matrix_to_json(&m)).unwrap();
            let back: MatrixJson = serde_json::from_str(&text).unwrap();
            let back = matrix_from_json(&back).unwrap();
            for (x, y) in m.iter().zip(back.iter()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: MatrixJson = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(matrix_from_json(&rows).is_err());
    }
}
