//! Achievable rate regions of two-user CMLOBCs.
//!
//! Rate pairs come from superposition coding: a joint `p(U, X)` gives
//! `(I(X; Y1 | U), I(U; Y2))`. Random joints produce the point clouds, the
//! time-sharing filter keeps what lies on or above the line through
//! `(C1, 0)` and `(0, C2)`, and a weighted-sum ascent traces the boundary.
//! The erasure special case has a closed-form region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{cmloc_capacity, Cmlobc, DEFAULT_CAPACITY_MAX_ITER};
use crate::error::{Error, Result};
use crate::info::{rate_pair, JointDistribution, PointTag, RatePoint};
use crate::matrix::Matrix;
use crate::rng::{flat_dirichlet, item_rng, item_seed};

/// Points with `r1/c1 + r2/c2 >= 1 - FILTER_TOL` survive the filter.
pub const FILTER_TOL: f64 = 1e-9;

/// Tolerance of [`erasure_region_contains`].
pub const REGION_TOL: f64 = 1e-9;

/// Capacities attached to region estimates are computed to this accuracy.
pub const REGION_CAPACITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetadata {
    pub samples: usize,
    pub seed: u64,
    pub u_size: usize,
    pub capacity_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub points: Vec<RatePoint>,
    pub c1: f64,
    pub c2: f64,
    pub filtered: bool,
    pub metadata: RegionMetadata,
}

/// Subchannel capacities `(C1, C2)` in nats.
pub fn subchannel_capacities(ch: &Cmlobc) -> Result<(f64, f64)> {
    let (s1, s2) = ch.channels()?;
    let c1 = cmloc_capacity(&s1, REGION_CAPACITY_TOL, DEFAULT_CAPACITY_MAX_ITER)?.nats;
    let c2 = cmloc_capacity(&s2, REGION_CAPACITY_TOL, DEFAULT_CAPACITY_MAX_ITER)?.nats;
    Ok((c1, c2))
}

/// Rate pairs of `n` joints drawn from the flat Dirichlet law on `|U| x |X|` tables.
///
/// Point `i` is generated from its own stream seeded by `(seed, i)` and carries
/// that stream's seed, so the output does not depend on the thread count.
pub fn sample_achievable_points(
    ch: &Cmlobc,
    n: usize,
    seed: u64,
    u_size: usize,
) -> Result<RegionEstimate> {
    if n == 0 {
        return Err(Error::param("sample count must be at least 1"));
    }
    if u_size == 0 {
        return Err(Error::param("|U| must be at least 1"));
    }
    let (s1, s2) = ch.channels()?;
    let (w1, w2) = (s1.matrix(), s2.matrix());
    let x_size = s1.input_size();
    let points: Vec<RatePoint> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(seed, i as u64);
            let table = Matrix::from_row_slice(u_size, x_size, &flat_dirichlet(&mut rng, u_size * x_size));
            let (r1, r2) = rate_pair(&table, w1, w2);
            RatePoint::new(r1, r2, PointTag::Sampled).with_seed(item_seed(seed, i as u64))
        })
        .collect();
    let (c1, c2) = subchannel_capacities(ch)?;
    Ok(RegionEstimate {
        points,
        c1,
        c2,
        filtered: false,
        metadata: RegionMetadata { samples: n, seed, u_size, capacity_tol: REGION_CAPACITY_TOL },
    })
}

/// Drop points strictly below the time-sharing line and append its two corners.
pub fn filter_time_sharing(est: &RegionEstimate) -> Result<RegionEstimate> {
    if !(est.c1 > 0.0 && est.c2 > 0.0) {
        return Err(Error::param(format!(
            "time-sharing filter needs positive capacities, got ({}, {})",
            est.c1, est.c2
        )));
    }
    let mut points: Vec<RatePoint> = est
        .points
        .iter()
        .filter(|p| p.time_sharing_excess(est.c1, est.c2) >= -FILTER_TOL)
        .copied()
        .collect();
    points.push(RatePoint::new(est.c1, 0.0, PointTag::TimeSharing));
    points.push(RatePoint::new(0.0, est.c2, PointTag::TimeSharing));
    Ok(RegionEstimate { points, filtered: true, ..est.clone() })
}

/// Result of one weighted-sum ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRun {
    pub mu: f64,
    pub point: RatePoint,
    pub joint: JointDistribution,
    /// `(R1 + mu R2) / (1 + mu)` before the first and after every accepted step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl BoundaryRun {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

/// Starting joint `p(u, x) = (1/|U|) ((1 - k)/|X| + k [x = u mod |X|])` with `k = 1/2`.
///
/// The product joint is a stationary point of the ascent whenever `mu > 0`,
/// so the start is tilted towards `U = X`.
pub fn default_boundary_init(u_size: usize, x_size: usize) -> Matrix {
    let kappa = 0.5;
    Matrix::from_fn(u_size, x_size, |u, x| {
        let tilt = if x == u % x_size { kappa } else { 0.0 };
        ((1.0 - kappa) / x_size as f64 + tilt) / u_size as f64
    })
}

fn weighted_objective(p: &Matrix, w1: &Matrix, w2: &Matrix, mu: f64) -> (f64, f64, f64) {
    let (r1, r2) = rate_pair(p, w1, w2);
    (r1, r2, (r1 + mu * r2) / (1.0 + mu))
}

/// Gradient of `(R1 + mu R2) / (1 + mu)` with respect to the unnormalized table.
fn objective_gradient(p: &Matrix, w1: &Matrix, w2: &Matrix, mu: f64) -> Matrix {
    let y1 = p * w1;
    let y2 = p * w2;
    let r2: Vec<f64> = y2.column_iter().map(|c| c.sum()).collect();
    let mut g = Matrix::zeros(p.nrows(), p.ncols());
    for u in 0..p.nrows() {
        let pu: f64 = p.row(u).sum();
        for x in 0..p.ncols() {
            let mut d1 = 0.0;
            for (y, &w) in w1.row(x).iter().enumerate() {
                if w > 0.0 {
                    d1 += w * (w * pu / y1[(u, y)]).ln();
                }
            }
            let mut d2 = 0.0;
            if mu > 0.0 {
                for (y, &w) in w2.row(x).iter().enumerate() {
                    if w > 0.0 {
                        d2 += w * (y2[(u, y)] / (pu * r2[y])).ln();
                    }
                }
            }
            g[(u, x)] = (d1 + mu * d2) / (1.0 + mu);
        }
    }
    g
}

/// Smallest entry kept in the table; avoids exact zeros, whose gradient entries are unbounded.
const MASS_FLOOR: f64 = 1e-300;
const MAX_HALVINGS: usize = 40;
const MAX_STEP: f64 = 1024.0;

fn boundary_precondition(ch: &Cmlobc, mu: f64, u_size: usize) -> Result<()> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::param(format!("weight mu must be finite and nonnegative, got {mu}")));
    }
    if u_size == 0 {
        return Err(Error::param("|U| must be at least 1"));
    }
    let order = ch.degradation_order()?;
    if !order.y2_degraded() {
        return Err(Error::Precondition(format!(
            "boundary ascent needs Y2 degraded from Y1, found {order:?}"
        )));
    }
    Ok(())
}

/// Weighted-sum ascent from the default start.
pub fn ba_boundary_point(
    ch: &Cmlobc,
    mu: f64,
    u_size: usize,
    tol: f64,
    max_iter: usize,
) -> Result<BoundaryRun> {
    let x_size = ch.params.input_size();
    ba_boundary_point_from(ch, mu, default_boundary_init(u_size, x_size), tol, max_iter)
}

/// Weighted-sum ascent on `(R1 + mu R2) / (1 + mu)` starting from `init`.
///
/// Each step multiplies the table by `exp(eta (G - max G))` and renormalizes,
/// where `G` is the gradient. A step is accepted only if the objective does
/// not decrease; otherwise `eta` is halved. After an accepted step `eta`
/// doubles, up to a cap. The run stops once an accepted step gains less than
/// `tol`, or when no step size in the backtracking range helps.
pub fn ba_boundary_point_from(
    ch: &Cmlobc,
    mu: f64,
    init: Matrix,
    tol: f64,
    max_iter: usize,
) -> Result<BoundaryRun> {
    boundary_precondition(ch, mu, init.nrows())?;
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let (s1, s2) = ch.channels()?;
    let (w1, w2) = (s1.matrix(), s2.matrix());
    if init.ncols() != s1.input_size() {
        return Err(Error::param("initial joint has the wrong |X|"));
    }
    let mut p = JointDistribution::new(init)?.table().clone();
    p.iter_mut().for_each(|v| *v = v.max(MASS_FLOOR));
    p /= p.sum();

    let (mut r1, mut r2, mut obj) = weighted_objective(&p, w1, w2, mu);
    let mut trace = vec![obj];
    let mut eta = 1.0;
    let mut last_gain = f64::INFINITY;
    let finish = |p: Matrix, r1: f64, r2: f64, trace: Vec<f64>, iterations: usize| BoundaryRun {
        mu,
        point: RatePoint::new(r1, r2, PointTag::Boundary),
        joint: JointDistribution::from_table_unchecked(p),
        objective_trace: trace,
        iterations,
    };

    for it in 0..max_iter {
        let g = objective_gradient(&p, w1, w2, mu);
        let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut cand = p.zip_map(&g, |a, b| (a * (eta * (b - gmax)).exp()).max(MASS_FLOOR));
            cand /= cand.sum();
            let (c1, c2, cobj) = weighted_objective(&cand, w1, w2, mu);
            if cobj >= obj {
                accepted = Some((cand, c1, c2, cobj));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, c1, c2, cobj)) = accepted else {
            return Ok(finish(p, r1, r2, trace, it));
        };
        last_gain = cobj - obj;
        p = cand;
        (r1, r2, obj) = (c1, c2, cobj);
        trace.push(obj);
        eta = (eta * 2.0).min(MAX_STEP);
        if last_gain < tol {
            return Ok(finish(p, r1, r2, trace, it + 1));
        }
    }
    Err(Error::BoundaryNotConverged {
        iterations: max_iter,
        last_gain,
        best: Box::new(finish(p, r1, r2, trace, max_iter)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub restarts: usize,
    pub seed: u64,
    pub u_size: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl SweepSettings {
    pub fn new(seed: u64, u_size: usize) -> Self {
        Self {
            mu_min: 1e-3,
            mu_max: 1e3,
            mu_points: 41,
            restarts: 8,
            seed,
            u_size,
            tol: 1e-12,
            max_iter: 100_000,
        }
    }

    /// Geometric grid from `mu_min` to `mu_max`.
    pub fn mu_grid(&self) -> Result<Vec<f64>> {
        if !(self.mu_min > 0.0 && self.mu_max >= self.mu_min && self.mu_max.is_finite()) {
            return Err(Error::param("need 0 < mu_min <= mu_max"));
        }
        Ok(match self.mu_points {
            0 => return Err(Error::param("mu grid needs at least one point")),
            1 => vec![self.mu_min],
            n => {
                let ratio = (self.mu_max / self.mu_min).ln();
                (0..n)
                    .map(|k| self.mu_min * (ratio * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        })
    }
}

/// Every boundary run of the sweep, grouped by grid point in grid order.
///
/// Restart 0 uses [`default_boundary_init`]; restart `r > 0` starts from a
/// flat-Dirichlet table seeded by `(seed, k * restarts + r)` for grid index `k`.
pub fn sweep_runs(ch: &Cmlobc, settings: &SweepSettings) -> Result<Vec<Vec<BoundaryRun>>> {
    let grid = settings.mu_grid()?;
    let restarts = settings.restarts.max(1);
    boundary_precondition(ch, grid[0], settings.u_size)?;
    let x_size = ch.params.input_size();
    let u_size = settings.u_size;
    let runs: Vec<Result<BoundaryRun>> = (0..grid.len() * restarts)
        .into_par_iter()
        .map(|job| {
            let (k, r) = (job / restarts, job % restarts);
            let init = if r == 0 {
                default_boundary_init(u_size, x_size)
            } else {
                let mut rng = item_rng(settings.seed, job as u64);
                Matrix::from_row_slice(u_size, x_size, &flat_dirichlet(&mut rng, u_size * x_size))
            };
            ba_boundary_point_from(ch, grid[k], init, settings.tol, settings.max_iter)
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut it = runs.into_iter();
    for _ in 0..grid.len() {
        out.push(it.by_ref().take(restarts).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

/// Best run (highest objective, earliest restart on ties) for every `mu` of the grid.
pub fn boundary_sweep(ch: &Cmlobc, settings: &SweepSettings) -> Result<Vec<BoundaryRun>> {
    Ok(sweep_runs(ch, settings)?
        .into_iter()
        .map(|group| {
            group
                .into_iter()
                .reduce(|best, run| if run.objective() > best.objective() { run } else { best })
                .expect("restarts >= 1")
        })
        .collect())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("erasure probability {rho} outside [0, 1]")));
    }
    Ok(())
}

/// `|X| x (|X| + 1)` erasure channel: column 0 is the erasure symbol with
/// probability `rho`, the rest is `(1 - rho) I`.
pub fn erasure_channel(rho: f64, x_size: usize) -> Result<Matrix> {
    check_rho(rho)?;
    if x_size == 0 {
        return Err(Error::param("|X| must be at least 1"));
    }
    Ok(Matrix::from_fn(x_size, x_size + 1, |x, y| match y {
        0 => rho,
        _ if y == x + 1 => 1.0 - rho,
        _ => 0.0,
    }))
}

fn erasure_capacities(rho1: f64, rho2: f64, x_size: usize) -> Result<(f64, f64)> {
    check_rho(rho1)?;
    check_rho(rho2)?;
    if rho1 > rho2 {
        return Err(Error::param(format!("need rho1 <= rho2, got {rho1} > {rho2}")));
    }
    if x_size == 0 {
        return Err(Error::param("|X| must be at least 1"));
    }
    let lx = (x_size as f64).ln();
    Ok(((1.0 - rho1) * lx, (1.0 - rho2) * lx))
}

/// Membership in `R1 / C1 + R2 / C2 <= 1` with `C_i = (1 - rho_i) ln|X|`.
/// A subchannel of zero capacity only admits rates within the tolerance of zero.
pub fn erasure_region_contains(rho1: f64, rho2: f64, x_size: usize, pt: &RatePoint) -> Result<bool> {
    let (c1, c2) = erasure_capacities(rho1, rho2, x_size)?;
    let term = |r: f64, c: f64| {
        if c > 0.0 {
            Some(r / c)
        } else if r <= REGION_TOL {
            Some(0.0)
        } else {
            None
        }
    };
    Ok(match (term(pt.r1, c1), term(pt.r2, c2)) {
        (Some(a), Some(b)) => a + b <= 1.0 + REGION_TOL,
        _ => false,
    })
}

/// Absolute residuals of `I(U; Y) = (1 - rho) I(U; X)` and
/// `I(X; Y | U) = (1 - rho) H(X | U)` through the erasure channel.
pub fn verify_lemma5(joint: &JointDistribution, rho: f64) -> Result<(f64, f64)> {
    let w = erasure_channel(rho, joint.x_size())?;
    let (i_xy_u, i_uy) = rate_pair(joint.table(), &w, &w);
    let res_u = (i_uy - (1.0 - rho) * joint.mutual_information()).abs();
    let res_x = (i_xy_u - (1.0 - rho) * joint.conditional_entropy_x_given_u()).abs();
    Ok((res_u, res_x))
}

/// `C1 C2 - (C2 I(X; Y1 | U) + C1 I(U; Y2))` for the erasure broadcast channel.
pub fn weighted_sum_bound_check(joint: &JointDistribution, rho1: f64, rho2: f64) -> Result<f64> {
    let x_size = joint.x_size();
    let (c1, c2) = erasure_capacities(rho1, rho2, x_size)?;
    let w1 = erasure_channel(rho1, x_size)?;
    let w2 = erasure_channel(rho2, x_size)?;
    let (r1, r2) = rate_pair(joint.table(), &w1, &w2);
    Ok(c1 * c2 - (c2 * r1 + c1 * r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ErasurePattern;
    use crate::lattice::LatticeParams;

    fn example(e1: &[f64], e2: &[f64]) -> Cmlobc {
        Cmlobc::new(
            LatticeParams::new(2, 3, 2).unwrap(),
            ErasurePattern::new(e1.to_vec()).unwrap(),
            ErasurePattern::new(e2.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn example1() -> Cmlobc {
        example(&[0.05, 0.24, 0.71], &[0.30, 0.15, 0.55])
    }

    #[test]
    fn sampling_is_deterministic() {
        let ch = example1();
        let a = sample_achievable_points(&ch, 50, 11, 7).unwrap();
        let b = sample_achievable_points(&ch, 50, 11, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_achievable_points(&ch, 50, 12, 7).unwrap();
        assert_ne!(a.points, c.points);
        let one = sample_achievable_points(&ch, 1, 11, 7).unwrap();
        assert_eq!(one.points[0], a.points[0]);
        assert!(sample_achievable_points(&ch, 0, 1, 7).is_err());
        assert!(sample_achievable_points(&ch, 5, 1, 0).is_err());
    }

    #[test]
    fn filter_keeps_corners_and_drops_interior() {
        let est = RegionEstimate {
            points: vec![
                RatePoint::new(2.0, 0.0, PointTag::Sampled),
                RatePoint::new(1.0, 0.25, PointTag::Sampled),
            ],
            c1: 2.0,
            c2: 1.0,
            filtered: false,
            metadata: RegionMetadata { samples: 2, seed: 0, u_size: 1, capacity_tol: 1e-12 },
        };
        let out = filter_time_sharing(&est).unwrap();
        assert!(out.filtered);
        let kept: Vec<(f64, f64)> = out.points.iter().map(|p| (p.r1, p.r2)).collect();
        assert_eq!(kept, vec![(2.0, 0.0), (2.0, 0.0), (0.0, 1.0)]);
        let zero = RegionEstimate { c2: 0.0, ..est };
        assert!(filter_time_sharing(&zero).is_err());
    }

    #[test]
    fn boundary_trace_is_monotone() {
        let ch = example1();
        for mu in [0.0, 0.5, 1.0, 3.0] {
            let run = ba_boundary_point(&ch, mu, 7, 1e-12, 100_000).unwrap();
            assert!(run.objective_trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn boundary_limits_match_capacities() {
        let ch = example1();
        let (c1, c2) = subchannel_capacities(&ch).unwrap();
        let lo = ba_boundary_point(&ch, 0.0, 7, 1e-13, 100_000).unwrap();
        assert!((lo.point.r1 - c1).abs() < 1e-6, "{} vs {c1}", lo.point.r1);
        let hi = ba_boundary_point(&ch, 1e3, 7, 1e-13, 100_000).unwrap();
        assert!((hi.point.r2 - c2).abs() < 1e-6, "{} vs {c2}", hi.point.r2);
    }

    #[test]
    fn boundary_rejects_non_degraded_pairs() {
        let ch = example(&[0.30, 0.15, 0.55], &[0.05, 0.24, 0.71]);
        assert!(matches!(
            ba_boundary_point(&ch, 1.0, 7, 1e-10, 1000),
            Err(Error::Precondition(_))
        ));
        assert!(ba_boundary_point(&example1(), -1.0, 7, 1e-10, 1000).is_err());
    }

    #[test]
    fn iteration_cap_carries_best_iterate() {
        match ba_boundary_point(&example1(), 1.0, 7, 1e-300, 3) {
            Err(Error::BoundaryNotConverged { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.objective_trace.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn erasure_membership() {
        let ln7 = 7f64.ln();
        let pt = |a, b| RatePoint::new(a, b, PointTag::Analytic);
        assert!(erasure_region_contains(0.0, 0.0, 7, &pt(ln7, 0.0)).unwrap());
        assert!(!erasure_region_contains(0.1, 0.3, 7, &pt(0.9 * ln7, 1e-4)).unwrap());
        assert!(erasure_region_contains(0.1, 0.3, 7, &pt(0.0, 0.0)).unwrap());
        assert!(erasure_region_contains(0.3, 0.1, 7, &pt(0.0, 0.0)).is_err());
        assert!(erasure_region_contains(0.5, 1.0, 7, &pt(0.5 * ln7, 0.0)).unwrap());
        assert!(!erasure_region_contains(0.5, 1.0, 7, &pt(0.0, 0.1)).unwrap());
    }

    #[test]
    fn erasure_identity_edge_cases() {
        let j = JointDistribution::from_row_slice(2, 3, &[0.1, 0.2, 0.1, 0.3, 0.1, 0.2]).unwrap();
        for rho in [0.0, 0.37, 1.0] {
            let (a, b) = verify_lemma5(&j, rho).unwrap();
            assert!(a < 1e-12 && b < 1e-12, "rho {rho}: {a} {b}");
        }
        assert!(verify_lemma5(&j, 1.5).is_err());
    }

    #[test]
    fn bound_slack_cases() {
        let ln7 = 7f64.ln();
        let (c1, c2) = (0.9 * ln7, 0.7 * ln7);
        let u_is_x = JointDistribution::new(Matrix::identity(7, 7) / 7.0).unwrap();
        assert!(weighted_sum_bound_check(&u_is_x, 0.1, 0.3).unwrap().abs() < 1e-9);
        let point = JointDistribution::from_row_slice(1, 7, &[1.0, 0., 0., 0., 0., 0., 0.]).unwrap();
        let s = weighted_sum_bound_check(&point, 0.1, 0.3).unwrap();
        assert!((s - c1 * c2).abs() < 1e-12);
    }

    #[test]
    fn mu_grid_is_geometric() {
        let g = SweepSettings::new(0, 7).mu_grid().unwrap();
        assert_eq!(g.len(), 41);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[40] - 1e3).abs() < 1e-9);
        assert!((g[20] - 1.0).abs() < 1e-12);
    }
}
