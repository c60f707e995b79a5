//! Stochastic degradation between the two subchannels of a CMLOBC.
//!
//! For `l < m`, `Y2` is a degraded version of `Y1` exactly when every prefix
//! sum of `eps1` is at most the matching prefix sum of `eps2`. A witness is
//! built in two steps: a lower-triangular stochastic `Λ` on the dimension
//! layers with `eps1 Λ = eps2`, then the block matrix `T = (λ_ij S_ij)` which
//! satisfies `S^(1) T = S^(2)`.
//!
//! [`lp_degradation_oracle`] decides the same question by linear programming,
//! without using the prefix-sum characterization.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelMatrix, ErasurePattern, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeParams};
use crate::lp::{find_feasible, Constraint, Feasibility, SimplexOptions};
use crate::matrix::{is_lower_triangular, max_abs_diff, max_row_sum_deviation, min_entry, Matrix};

/// Slack allowed on prefix-sum comparisons; ties count as satisfied.
pub const PREFIX_TOL: f64 = 1e-12;

/// A certificate passes when `|S^(1) T - S^(2)|_max` is below this.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Verification tolerance for LP witnesses.
pub const LP_WITNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DegradationOrder {
    Y2DegradedFromY1,
    Y1DegradedFromY2,
    Equivalent,
    Incomparable,
}

impl DegradationOrder {
    /// `true` if `Y2` is a degraded version of `Y1` (including equivalence).
    pub fn y2_degraded(self) -> bool {
        matches!(self, Self::Y2DegradedFromY1 | Self::Equivalent)
    }
}

fn check_lengths(a: &ErasurePattern, b: &ErasurePattern) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "pattern lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// First index where a prefix sum of `lo` exceeds that of `hi`.
fn first_prefix_violation(lo: &ErasurePattern, hi: &ErasurePattern) -> Option<(usize, f64, f64)> {
    lo.prefix_sums()
        .into_iter()
        .zip(hi.prefix_sums())
        .enumerate()
        .find(|&(_, (a, b))| a > b + PREFIX_TOL)
        .map(|(i, (a, b))| (i, a, b))
}

/// Degradation order of the pair. With `l_less_than_m == false` (the case `l = m`,
/// a single input symbol) every pair is degraded both ways and `Equivalent` is returned.
pub fn check_degraded(
    eps1: &ErasurePattern,
    eps2: &ErasurePattern,
    l_less_than_m: bool,
) -> Result<DegradationOrder> {
    check_lengths(eps1, eps2)?;
    if !l_less_than_m {
        return Ok(DegradationOrder::Equivalent);
    }
    let forward = first_prefix_violation(eps1, eps2).is_none();
    let backward = first_prefix_violation(eps2, eps1).is_none();
    Ok(match (forward, backward) {
        (true, true) => DegradationOrder::Equivalent,
        (true, false) => DegradationOrder::Y2DegradedFromY1,
        (false, true) => DegradationOrder::Y1DegradedFromY2,
        (false, false) => DegradationOrder::Incomparable,
    })
}

/// Componentwise sufficient condition `eps1[i] <= eps2[i]` for `i < l`.
pub fn check_strong_degraded(eps1: &ErasurePattern, eps2: &ErasurePattern) -> Result<bool> {
    check_lengths(eps1, eps2)?;
    let l = eps1.len() - 1;
    Ok((0..l).all(|i| eps1[i] <= eps2[i] + PREFIX_TOL))
}

/// Lower-triangular row-stochastic `Λ` with `eps1 Λ = eps2`.
///
/// Built greedily from elementary transfers: for each target index `i` in
/// increasing order, the missing mass is pulled from the smallest `j > i`
/// that still holds mass. Each transfer moves a fraction `λ` of component
/// `j` onto component `i`, i.e. multiplies by the identity with row `j`
/// replaced by `λ e_i + (1 - λ) e_j`.
pub fn construct_lambda(eps1: &ErasurePattern, eps2: &ErasurePattern) -> Result<Matrix> {
    check_lengths(eps1, eps2)?;
    if let Some((index, lhs, rhs)) = first_prefix_violation(eps1, eps2) {
        return Err(Error::Infeasible { index, lhs, rhs });
    }
    let n = eps1.len();
    let mut cur = eps1.as_slice().to_vec();
    let mut lambda = Matrix::identity(n, n);
    for i in 0..n {
        let mut deficit = eps2[i] - cur[i];
        for j in (i + 1)..n {
            if deficit <= 0.0 {
                break;
            }
            if cur[j] <= 0.0 {
                continue;
            }
            let frac = (deficit / cur[j]).min(1.0);
            let moved = frac * cur[j];
            // Λ <- Λ E, where E differs from I only in row j; this mixes columns i and j.
            for r in 0..n {
                let x = lambda[(r, j)];
                lambda[(r, i)] += frac * x;
                lambda[(r, j)] = (1.0 - frac) * x;
            }
            cur[i] += moved;
            cur[j] -= moved;
            deficit -= moved;
        }
    }
    Ok(lambda)
}

/// Witness that `Y2` is degraded from `Y1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationCertificate {
    /// Layer-level transfer matrix; `None` for the rank-one construction used when `l = m`.
    #[serde(with = "crate::matrix::as_rows::option")]
    pub lambda: Option<Matrix>,
    /// Degrading channel `T` on the output alphabet.
    #[serde(with = "crate::matrix::as_rows")]
    pub t_matrix: Matrix,
    /// `max |S^(1) T - S^(2)|`.
    pub residual: f64,
}

/// Block matrix `T` with blocks `T_ij = λ_ij S_ij` (`j <= i`) over the output layers.
pub fn block_degrading_channel(lattice: &Lattice, lambda: &Matrix) -> Result<Matrix> {
    let params = lattice.params();
    let l = params.l();
    if lambda.shape() != (l + 1, l + 1) {
        return Err(Error::param("Λ has the wrong shape"));
    }
    let sizes: Vec<usize> = (0..=l).map(|s| params.layer_size(s)).collect::<Result<_>>()?;
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let total = params.output_size();
    let mut t = Matrix::zeros(total, total);
    for i in 0..=l {
        for j in 0..=i {
            let weight = lambda[(i, j)];
            if weight == 0.0 {
                continue;
            }
            let s_ij = lattice.incidence(i, j, true)?;
            let e = s_ij.entries();
            for a in 0..e.nrows() {
                for b in 0..e.ncols() {
                    t[(offsets[i] + a, offsets[j] + b)] = weight * e[(a, b)];
                }
            }
        }
    }
    Ok(t)
}

/// Certificate for `Y2` degraded from `Y1` over a prebuilt lattice.
pub fn certificate_for(
    lattice: &Lattice,
    eps1: &ErasurePattern,
    eps2: &ErasurePattern,
) -> Result<(DegradationCertificate, ChannelMatrix, ChannelMatrix)> {
    let shared = std::sync::Arc::new(lattice.clone());
    let s1 = ChannelMatrix::build(shared.clone(), eps1.clone())?;
    let s2 = ChannelMatrix::build(shared, eps2.clone())?;
    let params = lattice.params();
    let (lambda, t) = if params.l() == params.m() {
        // One input symbol: T = 1 s^(2) maps any output distribution to s^(2).
        let s2_row = s2.matrix().row(0).into_owned();
        let n = s1.output_size();
        (None, Matrix::from_fn(n, n, |_, c| s2_row[c]))
    } else {
        let lambda = construct_lambda(eps1, eps2)?;
        let t = block_degrading_channel(lattice, &lambda)?;
        (Some(lambda), t)
    };
    let residual = max_abs_diff(&(s1.matrix() * &t), s2.matrix());
    Ok((DegradationCertificate { lambda, t_matrix: t, residual }, s1, s2))
}

/// Explicit degrading channel `T` with `S^(1) T = S^(2)`.
pub fn construct_degrading_channel(
    params: LatticeParams,
    eps1: &ErasurePattern,
    eps2: &ErasurePattern,
) -> Result<DegradationCertificate> {
    check_lengths(eps1, eps2)?;
    if eps1.len() != params.l() + 1 {
        return Err(Error::param("pattern length does not match l + 1"));
    }
    let lattice = Lattice::new(params);
    Ok(certificate_for(&lattice, eps1, eps2)?.0)
}

/// Outcome of re-checking a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub residual: f64,
    pub t_row_sum_deviation: f64,
    pub t_min_entry: f64,
    /// `None` when the certificate carries no Λ.
    pub lambda_row_sum_deviation: Option<f64>,
    pub lambda_lower_triangular: Option<bool>,
    pub lambda_entries_in_unit_interval: Option<bool>,
    /// `max |eps1 Λ - eps2|`.
    pub lambda_mapping_error: Option<f64>,
    pub pass: bool,
}

/// Recompute `S^(1) T - S^(2)` and every stochasticity condition of `cert`.
pub fn verify_certificate(
    s1: &ChannelMatrix,
    cert: &DegradationCertificate,
    s2: &ChannelMatrix,
) -> Result<CertificateReport> {
    let m = s1.output_size();
    if s2.output_size() != m || s1.input_size() != s2.input_size() {
        return Err(Error::param("channel matrices have different shapes"));
    }
    if cert.t_matrix.shape() != (m, m) {
        return Err(Error::param("T does not match the output alphabet"));
    }
    let residual = max_abs_diff(&(s1.matrix() * &cert.t_matrix), s2.matrix());
    let t_row = max_row_sum_deviation(&cert.t_matrix);
    let t_min = min_entry(&cert.t_matrix);
    let mut pass = residual < RESIDUAL_TOL && t_row <= STOCHASTIC_TOL && t_min >= 0.0;

    let (mut row_dev, mut lower, mut unit, mut mapping) = (None, None, None, None);
    if let Some(lambda) = &cert.lambda {
        let n = s1.eps().len();
        if lambda.shape() != (n, n) {
            return Err(Error::param("Λ does not match the pattern length"));
        }
        let e1 = Matrix::from_row_slice(1, n, s1.eps().as_slice());
        let e2 = Matrix::from_row_slice(1, n, s2.eps().as_slice());
        let dev = max_row_sum_deviation(lambda);
        let tri = is_lower_triangular(lambda, 0.0);
        let in_unit = lambda.iter().all(|&x| (0.0..=1.0).contains(&x));
        let map_err = max_abs_diff(&(&e1 * lambda), &e2);
        pass &= dev <= STOCHASTIC_TOL && tri && in_unit && map_err <= STOCHASTIC_TOL;
        row_dev = Some(dev);
        lower = Some(tri);
        unit = Some(in_unit);
        mapping = Some(map_err);
    }
    Ok(CertificateReport {
        residual,
        t_row_sum_deviation: t_row,
        t_min_entry: t_min,
        lambda_row_sum_deviation: row_dev,
        lambda_lower_triangular: lower,
        lambda_entries_in_unit_interval: unit,
        lambda_mapping_error: mapping,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpVerdict {
    Feasible(Matrix),
    Infeasible,
}

impl LpVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpVerdict::Feasible(_))
    }
}

/// Decide whether some row-stochastic `T` satisfies `s1 T = s2`.
///
/// Works on the raw matrices only. Before the simplex runs, every variable
/// `T[k, c]` that appears with a positive coefficient in an equation whose
/// right-hand side is zero is fixed at zero; this is exact because all
/// coefficients and variables are nonnegative.
pub fn lp_degradation_oracle(s1: &Matrix, s2: &Matrix) -> Result<LpVerdict> {
    if s1.nrows() != s2.nrows() {
        return Err(Error::param("channel matrices have different input alphabets"));
    }
    if s1.iter().chain(s2.iter()).any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::param("channel matrices must be nonnegative"));
    }
    let (rows, k_out) = s1.shape();
    let c_out = s2.ncols();
    const ZERO: f64 = 1e-15;

    let mut forced_zero = vec![false; k_out * c_out];
    for x in 0..rows {
        for c in 0..c_out {
            if s2[(x, c)] <= ZERO {
                for k in 0..k_out {
                    if s1[(x, k)] > ZERO {
                        forced_zero[k * c_out + c] = true;
                    }
                }
            }
        }
    }
    let mut var_of = vec![usize::MAX; k_out * c_out];
    let mut cells = Vec::new();
    for (cell, &zero) in forced_zero.iter().enumerate() {
        if !zero {
            var_of[cell] = cells.len();
            cells.push(cell);
        }
    }

    let mut constraints = Vec::new();
    for x in 0..rows {
        for c in 0..c_out {
            let rhs = s2[(x, c)];
            if rhs <= ZERO {
                continue;
            }
            let coeffs: Vec<(usize, f64)> = (0..k_out)
                .filter(|&k| s1[(x, k)] > ZERO && var_of[k * c_out + c] != usize::MAX)
                .map(|k| (var_of[k * c_out + c], s1[(x, k)]))
                .collect();
            if coeffs.is_empty() {
                return Ok(LpVerdict::Infeasible);
            }
            constraints.push(Constraint { coeffs, rhs });
        }
    }
    for k in 0..k_out {
        let coeffs: Vec<(usize, f64)> = (0..c_out)
            .filter(|&c| var_of[k * c_out + c] != usize::MAX)
            .map(|c| (var_of[k * c_out + c], 1.0))
            .collect();
        if coeffs.is_empty() {
            return Ok(LpVerdict::Infeasible);
        }
        constraints.push(Constraint { coeffs, rhs: 1.0 });
    }

    match find_feasible(cells.len(), &constraints, SimplexOptions::default())? {
        Feasibility::Infeasible { .. } => Ok(LpVerdict::Infeasible),
        Feasibility::Feasible(x) => {
            let mut t = Matrix::zeros(k_out, c_out);
            for (v, &cell) in cells.iter().enumerate() {
                t[(cell / c_out, cell % c_out)] = x[v];
            }
            let residual = max_abs_diff(&(s1 * &t), s2);
            let rows_dev = max_row_sum_deviation(&t);
            if residual > LP_WITNESS_TOL || rows_dev > LP_WITNESS_TOL {
                return Err(Error::Solver(format!(
                    "witness failed verification (residual {residual:e}, row deviation {rows_dev:e})"
                )));
            }
            Ok(LpVerdict::Feasible(t))
        }
    }
}
