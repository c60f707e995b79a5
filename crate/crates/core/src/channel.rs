//! CMLOC channel matrices and single-channel capacity.
//!
//! A channel of constant dimension `l` maps an `l`-dimensional input subspace
//! `X` to a subspace `Y ⊆ X`; the output dimension `s` is drawn with
//! probability `eps[s]` and `Y` is uniform among the `s`-subspaces of `X`.
//! Columns are ordered by dimension layer, then canonical subspace order, so
//! the matrix is `(eps_0 S_l0 | eps_1 S_l1 | ... | eps_l S_ll)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::degradation::{check_degraded, DegradationOrder};
use crate::error::{Error, Result};
use crate::info::kl_divergence;
use crate::lattice::{Lattice, LatticeParams};
use crate::matrix::{max_row_sum_deviation, Matrix};

/// Tolerance for probability-vector and row-stochastic checks.
pub const STOCHASTIC_TOL: f64 = 1e-12;

pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;
pub const DEFAULT_CAPACITY_MAX_ITER: usize = 100_000;

/// Probabilities `(eps_0, ..., eps_l)` of receiving an output of each dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ErasurePattern(Vec<f64>);

impl ErasurePattern {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::param("erasure pattern is empty"));
        }
        if eps.iter().any(|&e| !e.is_finite() || e < 0.0) {
            return Err(Error::param(format!("erasure pattern {eps:?} has negative entries")));
        }
        let total: f64 = eps.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::param(format!("erasure pattern {eps:?} sums to {total}")));
        }
        Ok(Self(eps))
    }

    /// `(rho, 0, ..., 0, 1 - rho)` of length `l + 1`: a pure erasure channel.
    pub fn erasure_only(rho: f64, l: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::param(format!("erasure probability {rho} outside [0, 1]")));
        }
        if l == 0 {
            return Err(Error::param("erasure-only pattern needs l >= 1"));
        }
        let mut v = vec![0.0; l + 1];
        v[0] = rho;
        v[l] = 1.0 - rho;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Running sums `sum_{j<=i} eps_j`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.0
            .iter()
            .scan(0.0, |acc, &e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for ErasurePattern {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ErasurePattern> for Vec<f64> {
    fn from(p: ErasurePattern) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for ErasurePattern {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Dense transfer matrix `p(Y|X)` of a CMLOC together with its lattice.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    lattice: Arc<Lattice>,
    eps: ErasurePattern,
    matrix: Matrix,
    offsets: Vec<usize>,
}

fn layer_offsets(params: LatticeParams) -> Vec<usize> {
    let mut offsets = vec![0];
    for s in 0..=params.l() {
        let last = *offsets.last().unwrap();
        offsets.push(last + params.layer_size(s).expect("validated params"));
    }
    offsets
}

impl ChannelMatrix {
    /// Assemble `(eps_0 S_l0 | ... | eps_l S_ll)` over a shared lattice.
    pub fn build(lattice: Arc<Lattice>, eps: ErasurePattern) -> Result<Self> {
        let params = lattice.params();
        let l = params.l();
        if eps.len() != l + 1 {
            return Err(Error::param(format!(
                "pattern has {} entries but l + 1 = {}",
                eps.len(),
                l + 1
            )));
        }
        let offsets = layer_offsets(params);
        let mut matrix = Matrix::zeros(params.input_size(), params.output_size());
        for s in 0..=l {
            let d = lattice.incidence(l, s, false)?;
            // eps_s / [l, s]_q, written as a single division so entries are exact.
            let value = eps[s] / d.scale() as f64;
            let block = d.entries();
            for i in 0..block.nrows() {
                for j in 0..block.ncols() {
                    if block[(i, j)] != 0.0 {
                        matrix[(i, offsets[s] + j)] = value;
                    }
                }
            }
        }
        Ok(Self { lattice, eps, matrix, offsets })
    }

    /// Wrap an arbitrary matrix claimed to belong to `(lattice, eps)`; only the shape
    /// is checked. Use [`validate_channel`] to audit the contents.
    pub fn from_raw(lattice: Arc<Lattice>, eps: ErasurePattern, matrix: Matrix) -> Result<Self> {
        let params = lattice.params();
        if eps.len() != params.l() + 1 {
            return Err(Error::param("pattern length does not match l + 1"));
        }
        if matrix.shape() != (params.input_size(), params.output_size()) {
            return Err(Error::param(format!(
                "matrix shape {:?} does not match {:?}",
                matrix.shape(),
                (params.input_size(), params.output_size())
            )));
        }
        let offsets = layer_offsets(params);
        Ok(Self { lattice, eps, matrix, offsets })
    }

    pub fn params(&self) -> LatticeParams {
        self.lattice.params()
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn eps(&self) -> &ErasurePattern {
        &self.eps
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// Column offsets of the dimension layers; block `s` spans `offsets[s]..offsets[s+1]`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn input_size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn output_size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn block(&self, s: usize) -> Matrix {
        let (a, b) = (self.offsets[s], self.offsets[s + 1]);
        self.matrix.columns(a, b - a).into_owned()
    }
}

/// Channel matrix of the CMLOC `(params, eps)`.
pub fn build_cmloc(params: LatticeParams, eps: ErasurePattern) -> Result<ChannelMatrix> {
    ChannelMatrix::build(Arc::new(Lattice::new(params)), eps)
}

/// Two-receiver broadcast channel whose subchannels share the lattice `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cmlobc {
    pub params: LatticeParams,
    pub eps1: ErasurePattern,
    pub eps2: ErasurePattern,
}

impl Cmlobc {
    pub fn new(params: LatticeParams, eps1: ErasurePattern, eps2: ErasurePattern) -> Result<Self> {
        let want = params.l() + 1;
        if eps1.len() != want || eps2.len() != want {
            return Err(Error::param(format!(
                "both patterns need {want} entries, got {} and {}",
                eps1.len(),
                eps2.len()
            )));
        }
        Ok(Self { params, eps1, eps2 })
    }

    /// Channel matrices `(S^(1), S^(2))` built over one shared lattice.
    pub fn channels(&self) -> Result<(ChannelMatrix, ChannelMatrix)> {
        let lattice = Arc::new(Lattice::new(self.params));
        Ok((
            ChannelMatrix::build(lattice.clone(), self.eps1.clone())?,
            ChannelMatrix::build(lattice, self.eps2.clone())?,
        ))
    }

    pub fn degradation_order(&self) -> Result<DegradationOrder> {
        check_degraded(&self.eps1, &self.eps2, self.params.l() < self.params.m())
    }
}

/// Capacity estimate of a discrete memoryless channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// Lower bound on the capacity, within `gap` of the true value.
    pub nats: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    /// Upper minus lower bound at termination.
    pub gap: f64,
    /// Lower bound after each iteration.
    #[serde(skip)]
    pub lower_bounds: Vec<f64>,
}

/// Blahut–Arimoto iteration on an arbitrary row-stochastic matrix `w` (rows = inputs).
///
/// Stops once `max_x D(w_x || q) - ln sum_x p(x) exp D(w_x || q)` drops below `tol`;
/// both quantities bracket the capacity, so the returned value is within `tol`.
pub fn dmc_capacity(w: &Matrix, tol: f64, max_iter: usize) -> Result<Capacity> {
    if w.nrows() == 0 || w.ncols() == 0 {
        return Err(Error::param("channel matrix is empty"));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    if w.iter().any(|&x| !x.is_finite() || x < 0.0) || max_row_sum_deviation(w) > 1e-9 {
        return Err(Error::param("channel matrix is not row-stochastic"));
    }
    let n = w.nrows();
    let mut p = vec![1.0 / n as f64; n];
    let mut lower_bounds = Vec::new();
    let mut gap = f64::INFINITY;
    for it in 0..max_iter {
        let q: Vec<f64> = (0..w.ncols())
            .map(|y| (0..n).map(|x| p[x] * w[(x, y)]).sum())
            .collect();
        let d: Vec<f64> = w
            .row_iter()
            .map(|row| kl_divergence(row.iter().copied(), q.iter().copied()))
            .collect();
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = p.iter().zip(&d).map(|(&pi, &di)| pi * (di - dmax).exp()).sum();
        let lower = dmax + z.ln();
        gap = (dmax - lower).max(0.0);
        lower_bounds.push(lower);
        if gap < tol {
            return Ok(Capacity { nats: lower, input: p, iterations: it + 1, gap, lower_bounds });
        }
        for (pi, &di) in p.iter_mut().zip(&d) {
            *pi *= (di - dmax).exp() / z;
        }
    }
    let nats = lower_bounds.last().copied().unwrap_or(0.0);
    Err(Error::CapacityNotConverged {
        iterations: max_iter,
        gap,
        best: Box::new(Capacity { nats, input: p, iterations: max_iter, gap, lower_bounds }),
    })
}

/// Capacity of a CMLOC in nats, with its optimal input distribution.
pub fn cmloc_capacity(channel: &ChannelMatrix, tol: f64, max_iter: usize) -> Result<Capacity> {
    dmc_capacity(channel.matrix(), tol, max_iter)
}

/// Rates `log_q|M_i| / n` in q-ary symbols per subspace transmission.
pub fn rates(log_m1: f64, log_m2: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::param("block length must be at least 1"));
    }
    Ok((log_m1 / n as f64, log_m2 / n as f64))
}

/// Normalized rates `log_q|M_i| / (l m n)`.
pub fn normalized_rates(
    log_m1: f64,
    log_m2: f64,
    n: usize,
    params: LatticeParams,
) -> Result<(f64, f64)> {
    let (r1, r2) = rates(log_m1, log_m2, n)?;
    let lm = (params.l() * params.m()) as f64;
    if lm == 0.0 {
        return Err(Error::param("normalization undefined for l = 0"));
    }
    Ok((r1 / lm, r2 / lm))
}

/// Audit of a channel matrix against the CMLOC invariants.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChannelReport {
    pub max_row_sum_deviation: f64,
    /// Rows whose sum is off by more than the tolerance.
    pub row_sum_violations: Vec<usize>,
    pub negative_entries: Vec<(usize, usize)>,
    /// `(row, column)` with mass on an output not contained in the input.
    pub support_violations: Vec<(usize, usize)>,
    /// `(layer, max deviation)` where block `s` differs from `eps_s S_ls`.
    pub block_mismatches: Vec<(usize, f64)>,
}

impl ChannelReport {
    pub fn is_clean(&self) -> bool {
        self.row_sum_violations.is_empty()
            && self.negative_entries.is_empty()
            && self.support_violations.is_empty()
            && self.block_mismatches.is_empty()
    }
}

pub fn validate_channel(channel: &ChannelMatrix) -> ChannelReport {
    let tol = STOCHASTIC_TOL;
    let w = channel.matrix();
    let mut report = ChannelReport::default();
    for (i, row) in w.row_iter().enumerate() {
        let dev = (row.sum() - 1.0).abs();
        report.max_row_sum_deviation = report.max_row_sum_deviation.max(dev);
        if dev > tol {
            report.row_sum_violations.push(i);
        }
        for (j, &x) in row.iter().enumerate() {
            if x < 0.0 {
                report.negative_entries.push((i, j));
            }
        }
    }
    let l = channel.params().l();
    for s in 0..=l {
        let Ok(d) = channel.lattice().incidence(l, s, false) else {
            continue;
        };
        let off = channel.offsets()[s];
        let expected = channel.eps()[s] / d.scale() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                let x = w[(i, off + j)];
                let contained = d.entries()[(i, j)] != 0.0;
                if !contained && x.abs() > tol {
                    report.support_violations.push((i, off + j));
                }
                let target = if contained { expected } else { 0.0 };
                worst = worst.max((x - target).abs());
            }
        }
        if worst > tol {
            report.block_mismatches.push((s, worst));
        }
    }
    report
}

/// JSON channel description `{q, m, l, eps}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub q: u32,
    pub m: usize,
    pub l: usize,
    pub eps: Vec<f64>,
}

impl ChannelSpec {
    pub fn from_parts(params: LatticeParams, eps: &ErasurePattern) -> Self {
        Self { q: params.q(), m: params.m(), l: params.l(), eps: eps.as_slice().to_vec() }
    }

    pub fn params(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.q, self.m, self.l)
    }

    pub fn pattern(&self) -> Result<ErasurePattern> {
        ErasurePattern::new(self.eps.clone())
    }

    pub fn build(&self) -> Result<ChannelMatrix> {
        build_cmloc(self.params()?, self.pattern()?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
