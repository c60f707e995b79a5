//! Dense phase-one simplex: feasibility of `A x = b, x >= 0`.
//!
//! Artificial variables start in the basis and are never allowed to re-enter,
//! so the tableau only carries the structural columns. Entering columns are
//! chosen by Dantzig's rule, falling back to Bland's rule after a run of
//! degenerate pivots.

use crate::error::{Error, Result};

/// One equality constraint `sum_j a_j x_j = rhs` in sparse form.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    /// Phase-one optimum: the smallest achievable total constraint violation.
    Infeasible { violation: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Phase-one objective at or below this counts as feasible.
    pub feasibility_tol: f64,
    pub pivot_tol: f64,
    pub max_pivots: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { feasibility_tol: 1e-9, pivot_tol: 1e-11, max_pivots: None }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Basic {
    Artificial,
    Var(usize),
}

const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

pub fn find_feasible(
    num_vars: usize,
    constraints: &[Constraint],
    opts: SimplexOptions,
) -> Result<Feasibility> {
    let m = constraints.len();
    let n = num_vars;
    let width = n + 1;
    let mut t = vec![0.0; m * width];
    for (i, c) in constraints.iter().enumerate() {
        let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in &c.coeffs {
            if j >= n {
                return Err(Error::Solver(format!("variable index {j} out of range")));
            }
            t[i * width + j] += sign * a;
        }
        t[i * width + n] = sign * c.rhs;
    }
    // Reduced costs of sum(artificials); obj[n] holds -objective.
    let mut obj = vec![0.0; width];
    for i in 0..m {
        for j in 0..width {
            obj[j] -= t[i * width + j];
        }
    }
    let mut basis = vec![Basic::Artificial; m];
    let max_pivots = opts.max_pivots.unwrap_or(50 * (m + n) + 1000);
    let mut degenerate_run = 0;

    for _ in 0..max_pivots {
        let use_bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
        let entering = if use_bland {
            (0..n).find(|&j| obj[j] < -opts.pivot_tol)
        } else {
            (0..n)
                .filter(|&j| obj[j] < -opts.pivot_tol)
                .min_by(|&a, &b| obj[a].total_cmp(&obj[b]))
        };
        let Some(pc) = entering else {
            let violation = (-obj[n]).max(0.0);
            if violation > opts.feasibility_tol {
                return Ok(Feasibility::Infeasible { violation });
            }
            let mut x = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                if let Basic::Var(j) = *b {
                    x[j] = t[i * width + n].max(0.0);
                }
            }
            return Ok(Feasibility::Feasible(x));
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + pc];
            if a <= opts.pivot_tol {
                continue;
            }
            let ratio = t[i * width + n] / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((r, best)) => {
                    let better = if (ratio - best).abs() <= 1e-12 {
                        // Prefer driving artificials out, then Bland's smallest index.
                        match (basis[i], basis[r]) {
                            (Basic::Artificial, Basic::Var(_)) => true,
                            (Basic::Var(a), Basic::Var(b)) => a < b,
                            _ => false,
                        }
                    } else {
                        ratio < best
                    };
                    if better { Some((i, ratio)) } else { Some((r, best)) }
                }
            };
        }
        let Some((pr, ratio)) = leave else {
            // Phase one is bounded below by zero, so an unbounded ray means numerical trouble.
            return Err(Error::Solver("unbounded phase-one direction".into()));
        };
        degenerate_run = if ratio <= 1e-12 { degenerate_run + 1 } else { 0 };

        let pivot = t[pr * width + pc];
        for j in 0..width {
            t[pr * width + j] /= pivot;
        }
        let (before, rest) = t.split_at_mut(pr * width);
        let (prow, after) = rest.split_at_mut(width);
        for row in before.chunks_mut(width).chain(after.chunks_mut(width)) {
            let f = row[pc];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
                if row[n] < 0.0 && row[n] > -1e-12 {
                    row[n] = 0.0;
                }
            }
        }
        let f = obj[pc];
        for (x, &p) in obj.iter_mut().zip(prow.iter()) {
            *x -= f * p;
        }
        obj[pc] = 0.0;
        basis[pr] = Basic::Var(pc);
    }
    Err(Error::Solver(format!("pivot limit {max_pivots} reached")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(coeffs: &[(usize, f64)], rhs: f64) -> Constraint {
        Constraint { coeffs: coeffs.to_vec(), rhs }
    }

    #[test]
    fn simple_feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 0.5
        let cons = [c(&[(0, 1.0), (1, 1.0)], 1.0), c(&[(0, 1.0), (1, -1.0)], 0.5)];
        let Feasibility::Feasible(x) = find_feasible(2, &cons, Default::default()).unwrap() else {
            panic!("expected feasible");
        };
        assert!((x[0] - 0.75).abs() < 1e-12 && (x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system() {
        // x0 + x1 = 1, x0 + x1 = 2
        let cons = [c(&[(0, 1.0), (1, 1.0)], 1.0), c(&[(0, 1.0), (1, 1.0)], 2.0)];
        match find_feasible(2, &cons, Default::default()).unwrap() {
            Feasibility::Infeasible { violation } => assert!((violation - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        // x0 = -1 needs a negative variable.
        let cons = [c(&[(0, 1.0)], -1.0)];
        assert!(matches!(
            find_feasible(1, &cons, Default::default()).unwrap(),
            Feasibility::Infeasible { .. }
        ));
    }

    #[test]
    fn redundant_rows_are_fine() {
        let cons = [
            c(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0),
            c(&[(0, 2.0), (1, 2.0), (2, 2.0)], 2.0),
            c(&[(1, 1.0)], 0.25),
        ];
        let Feasibility::Feasible(x) = find_feasible(3, &cons, Default::default()).unwrap() else {
            panic!("expected feasible");
        };
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((x[1] - 0.25).abs() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
    }
}
