//! Entropies and mutual informations in nats, with `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Tolerance on the total mass of a probability table.
pub const MASS_TOL: f64 = 1e-12;

/// Shannon entropy of a probability vector.
pub fn entropy<I: IntoIterator<Item = f64>>(p: I) -> f64 {
    p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum()
}

/// Binary entropy `H(x) = -x ln x - (1-x) ln(1-x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy([x, 1.0 - x])
}

/// `sum_y w(y) ln(w(y) / q(y))`; infinite if `q` misses mass of `w`.
pub fn kl_divergence(w: impl IntoIterator<Item = f64>, q: impl IntoIterator<Item = f64>) -> f64 {
    w.into_iter()
        .zip(q)
        .filter(|&(a, _)| a > 0.0)
        .map(|(a, b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

fn check_table(t: &Matrix, what: &str) -> Result<()> {
    if t.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::param(format!("{what} has negative or non-finite entries")));
    }
    let total = t.sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::param(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Mutual information of a joint table `p(x, y)` (rows `x`, columns `y`).
pub fn mutual_information(p_xy: &Matrix) -> Result<f64> {
    check_table(p_xy, "joint table")?;
    Ok(mutual_information_unchecked(p_xy))
}

pub(crate) fn mutual_information_unchecked(p_xy: &Matrix) -> f64 {
    let px: Vec<f64> = p_xy.row_iter().map(|r| r.sum()).collect();
    let py: Vec<f64> = p_xy.column_iter().map(|c| c.sum()).collect();
    let mut acc = 0.0;
    for (i, row) in p_xy.row_iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p * (p / (px[i] * py[j])).ln();
            }
        }
    }
    acc.max(0.0)
}

/// Joint distribution `p(U, X)`: rows index the auxiliary `U`, columns the input `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    #[serde(with = "crate::matrix::as_rows")]
    table: Matrix,
}

impl JointDistribution {
    pub fn new(table: Matrix) -> Result<Self> {
        if table.nrows() == 0 || table.ncols() == 0 {
            return Err(Error::param("joint distribution must be nonempty"));
        }
        check_table(&table, "joint distribution")?;
        Ok(Self { table })
    }

    /// Build from a row-major slice.
    pub fn from_row_slice(u_size: usize, x_size: usize, data: &[f64]) -> Result<Self> {
        if data.len() != u_size * x_size {
            return Err(Error::param("joint data length does not match its shape"));
        }
        Self::new(Matrix::from_row_slice(u_size, x_size, data))
    }

    /// `p(u, x) = p(u) p(x|u)` with `rows[u] = p(x|u)`.
    pub fn from_conditional(p_u: &[f64], rows: &Matrix) -> Result<Self> {
        if p_u.len() != rows.nrows() {
            return Err(Error::param("marginal and conditional disagree on |U|"));
        }
        let mut t = rows.clone();
        for (u, mut row) in t.row_iter_mut().enumerate() {
            row *= p_u[u];
        }
        Self::new(t)
    }

    pub(crate) fn from_table_unchecked(table: Matrix) -> Self {
        Self { table }
    }

    pub fn u_size(&self) -> usize {
        self.table.nrows()
    }

    pub fn x_size(&self) -> usize {
        self.table.ncols()
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }

    pub fn u_marginal(&self) -> Vec<f64> {
        self.table.row_iter().map(|r| r.sum()).collect()
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        self.table.column_iter().map(|c| c.sum()).collect()
    }

    /// `I(U; X)`.
    pub fn mutual_information(&self) -> f64 {
        mutual_information_unchecked(&self.table)
    }

    /// `H(X | U)`, which equals `I(X; X | U)`.
    pub fn conditional_entropy_x_given_u(&self) -> f64 {
        conditional_entropy(&self.table)
    }
}

/// `H(B | A)` for a joint table with rows `A` and columns `B`.
pub(crate) fn conditional_entropy(joint: &Matrix) -> f64 {
    let mut acc = 0.0;
    for row in joint.row_iter() {
        let pa = row.sum();
        for &p in row.iter() {
            if p > 0.0 {
                acc -= p * (p / pa).ln();
            }
        }
    }
    acc.max(0.0)
}

/// Provenance of a rate point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointTag {
    Sampled,
    Boundary,
    Analytic,
    TimeSharing,
}

impl PointTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PointTag::Sampled => "sampled",
            PointTag::Boundary => "boundary",
            PointTag::Analytic => "analytic",
            PointTag::TimeSharing => "time-sharing",
        }
    }
}

/// A rate pair `(R1, R2)` in nats, clamped to be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
    pub tag: PointTag,
    pub seed: Option<u64>,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64, tag: PointTag) -> Self {
        Self { r1: r1.max(0.0), r2: r2.max(0.0), tag, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn tagged(mut self, tag: PointTag) -> Self {
        self.tag = tag;
        self
    }

    /// `r1/c1 + r2/c2 - 1`: positive above the time-sharing line.
    pub fn time_sharing_excess(&self, c1: f64, c2: f64) -> f64 {
        self.r1 / c1 + self.r2 / c2 - 1.0
    }
}

/// `(I(X; Y1 | U), I(U; Y2))` for `U -> X -> (Y1, Y2)`.
pub(crate) fn rate_pair(joint: &Matrix, w1: &Matrix, w2: &Matrix) -> (f64, f64) {
    let a = joint * w1;
    let b = joint * w2;
    let px: Vec<f64> = joint.column_iter().map(|c| c.sum()).collect();
    let h_y1_given_x: f64 = px
        .iter()
        .zip(w1.row_iter())
        .map(|(&p, row)| p * entropy(row.iter().copied()))
        .sum();
    let r1 = (conditional_entropy(&a) - h_y1_given_x).max(0.0);
    let r2 = mutual_information_unchecked(&b);
    (r1, r2)
}

/// Superposition rates `R1 = I(X; Y1 | U)` and `R2 = I(U; Y2)` of a joint `p(U, X)`
/// through the channel matrices `w1`, `w2` (rows indexed by `X`).
pub fn broadcast_rates(joint: &JointDistribution, w1: &Matrix, w2: &Matrix) -> Result<RatePoint> {
    if w1.nrows() != joint.x_size() || w2.nrows() != joint.x_size() {
        return Err(Error::param(format!(
            "channel input sizes ({}, {}) do not match |X| = {}",
            w1.nrows(),
            w2.nrows(),
            joint.x_size()
        )));
    }
    let (r1, r2) = rate_pair(joint.table(), w1, w2);
    Ok(RatePoint::new(r1, r2, PointTag::Sampled))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_distribution_has_zero_information() {
        let px = [0.2, 0.3, 0.5];
        let py = [0.6, 0.4];
        let t = Matrix::from_fn(3, 2, |i, j| px[i] * py[j]);
        assert!(mutual_information(&t).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity_channel_information() {
        let t = Matrix::identity(7, 7) / 7.0;
        assert!((mutual_information(&t).unwrap() - 7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn information_is_symmetric() {
        let t = Matrix::from_row_slice(2, 3, &[0.1, 0.2, 0.05, 0.3, 0.05, 0.3]);
        let a = mutual_information(&t).unwrap();
        let b = mutual_information(&t.transpose()).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn negative_entries_rejected() {
        let t = Matrix::from_row_slice(1, 2, &[1.5, -0.5]);
        assert!(mutual_information(&t).is_err());
        assert!(JointDistribution::new(t).is_err());
    }

    #[test]
    fn degenerate_auxiliaries() {
        let w1 = Matrix::from_row_slice(2, 3, &[0.7, 0.2, 0.1, 0.1, 0.3, 0.6]);
        let w2 = Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
        let px = [0.4, 0.6];

        let constant_u = JointDistribution::from_row_slice(1, 2, &px).unwrap();
        let pt = broadcast_rates(&constant_u, &w1, &w2).unwrap();
        let ixy1 = mutual_information(&Matrix::from_fn(2, 3, |x, y| px[x] * w1[(x, y)])).unwrap();
        assert_eq!(pt.r2, 0.0);
        assert!((pt.r1 - ixy1).abs() < 1e-14);

        let u_is_x = JointDistribution::from_row_slice(2, 2, &[0.4, 0.0, 0.0, 0.6]).unwrap();
        let pt = broadcast_rates(&u_is_x, &w1, &w2).unwrap();
        let ixy2 = mutual_information(&Matrix::from_fn(2, 2, |x, y| px[x] * w2[(x, y)])).unwrap();
        assert!(pt.r1.abs() < 1e-15);
        assert!((pt.r2 - ixy2).abs() < 1e-14);

        let wrong = Matrix::identity(3, 3);
        assert!(broadcast_rates(&u_is_x, &wrong, &w2).is_err());
    }

    #[test]
    fn conditional_entropy_of_joint() {
        let j = JointDistribution::from_row_slice(2, 2, &[0.25, 0.25, 0.5, 0.0]).unwrap();
        assert!((j.conditional_entropy_x_given_u() - 0.5 * 2f64.ln()).abs() < 1e-15);
    }
}
