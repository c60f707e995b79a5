//! Dense real matrices and stochasticity checks.

use nalgebra::DMatrix;

/// Dense row/column real matrix used for channel, incidence and certificate matrices.
pub type Matrix = DMatrix<f64>;

/// Largest `|row sum - 1|` over all rows. Zero for a matrix with no rows.
pub fn max_row_sum_deviation(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| (row.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Most negative entry, or `0.0` when every entry is nonnegative.
pub fn min_entry(m: &Matrix) -> f64 {
    m.iter().copied().fold(0.0, f64::min)
}

pub fn is_row_stochastic(m: &Matrix, tol: f64) -> bool {
    min_entry(m) >= -tol && max_row_sum_deviation(m) <= tol
}

/// `max_ij |a_ij - b_ij|`. Panics on shape mismatch.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn is_lower_triangular(m: &Matrix, tol: f64) -> bool {
    (0..m.nrows()).all(|i| ((i + 1)..m.ncols()).all(|j| m[(i, j)].abs() <= tol))
}

/// Serde adapter storing a matrix as a list of rows.
pub mod as_rows {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub(crate) fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix, String> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("rows have different lengths".into());
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
    }

    /// Same layout for `Option<Matrix>`, with `null` for `None`.
    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
            match m {
                Some(m) => super::serialize(m, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Matrix>, D::Error> {
            Option::<Vec<Vec<f64>>>::deserialize(d)?
                .map(|rows| from_rows(&rows).map_err(D::Error::custom))
                .transpose()
        }
    }
}
