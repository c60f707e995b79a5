//! Closed forms on the Fano plane, `(q, m, l) = (2, 3, 2)`.
//!
//! The joint family `p(u, x) = (1/7)(sigma/6 J + (1 - 7 sigma/6) I)` for
//! `sigma` in `[0, 6/7]` traces a curve `Γ(sigma) = (R1, R2)` from `(0, C2)`
//! to `(C1, 0)`. Its curvature has the sign of
//! `eps1^(2) eps2^(1) - eps1^(1) eps2^(2)` (as a function `R2 = f(R1)`).

use serde::{Deserialize, Serialize};

use crate::channel::ErasurePattern;
use crate::degradation::check_degraded;
use crate::error::{Error, Result};
use crate::info::{binary_entropy, JointDistribution};
use crate::lattice::LatticeParams;
use crate::matrix::Matrix;

/// Upper end of the `sigma` range, where the joint becomes uniform.
pub const SIGMA_MAX: f64 = 6.0 / 7.0;

/// Discriminants within this distance of zero are classified as linear.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

pub const DEFAULT_CURVE_POINTS: usize = 1001;

/// An erasure pattern `(eps0, eps1, eps2)` on the Fano plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ErasurePattern", into = "ErasurePattern")]
pub struct Pg22Pattern(ErasurePattern);

impl Pg22Pattern {
    pub fn new(eps: [f64; 3]) -> Result<Self> {
        Self::try_from(ErasurePattern::new(eps.to_vec())?)
    }

    pub fn params() -> LatticeParams {
        LatticeParams::new(2, 3, 2).expect("Fano plane parameters are valid")
    }

    pub fn pattern(&self) -> &ErasurePattern {
        &self.0
    }

    /// `eps_i`.
    pub fn eps(&self, i: usize) -> f64 {
        self.0[i]
    }
}

impl TryFrom<ErasurePattern> for Pg22Pattern {
    type Error = Error;

    fn try_from(p: ErasurePattern) -> Result<Self> {
        if p.len() != 3 {
            return Err(Error::param(format!("Fano-plane pattern needs 3 entries, got {}", p.len())));
        }
        Ok(Self(p))
    }
}

impl From<Pg22Pattern> for ErasurePattern {
    fn from(p: Pg22Pattern) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveCase {
    ConcaveCaseI,
    ConvexCaseII,
    LinearCaseIII,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveClassification {
    pub case: CurveCase,
    /// `eps1^(1) eps2^(2) - eps1^(2) eps2^(1)`.
    pub discriminant: f64,
}

fn check_sigma_closed(sigma: f64) -> Result<()> {
    if !(0.0..=SIGMA_MAX).contains(&sigma) {
        return Err(Error::param(format!("sigma = {sigma} outside [0, 6/7]")));
    }
    Ok(())
}

fn check_sigma_open(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < SIGMA_MAX) {
        return Err(Error::Domain(format!("sigma = {sigma} must lie strictly inside (0, 6/7)")));
    }
    Ok(())
}

fn check_order(eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> Result<()> {
    let order = check_degraded(eps1.pattern(), eps2.pattern(), true)?;
    if !order.y2_degraded() {
        return Err(Error::Precondition(format!(
            "the curve is defined for Y2 degraded from Y1, found {order:?}"
        )));
    }
    Ok(())
}

/// The 7 x 7 joint of the symmetric family.
pub fn symmetric_joint(sigma: f64) -> Result<JointDistribution> {
    check_sigma_closed(sigma)?;
    let off = sigma / 6.0 / 7.0;
    let diag = (1.0 - sigma) / 7.0;
    let t = Matrix::from_fn(7, 7, |u, x| if u == x { diag } else { off });
    JointDistribution::new(t)
}

/// `x ln x` with the value 0 at 0.
fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `Γ(sigma) = (R1, R2)` in nats.
pub fn gamma_rates(sigma: f64, eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> Result<(f64, f64)> {
    check_sigma_closed(sigma)?;
    check_order(eps1, eps2)?;
    let a = 2.0 * sigma / 3.0;
    let (l43, l73, l6, l7) = ((4.0f64 / 3.0).ln(), (7.0f64 / 3.0).ln(), 6f64.ln(), 7f64.ln());
    let (ha, hs) = (binary_entropy(a), binary_entropy(sigma));
    let r1 = eps1.eps(1) * (ha + a * l43) + eps1.eps(2) * (hs + sigma * l6);
    let r2 = eps2.eps(1) * (-ha + l73 - a * l43) + eps2.eps(2) * (-hs + l7 - sigma * l6);
    Ok((r1, r2))
}

/// `(R1'(sigma), R2'(sigma))` on the open interval.
pub fn gamma_derivatives(sigma: f64, eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> Result<(f64, f64)> {
    check_sigma_open(sigma)?;
    check_order(eps1, eps2)?;
    let t1 = (2.0 / 3.0) * (2.0 * (1.0 - 2.0 * sigma / 3.0) / sigma).ln();
    let t2 = (6.0 * (1.0 - sigma) / sigma).ln();
    Ok((eps1.eps(1) * t1 + eps1.eps(2) * t2, -(eps2.eps(1) * t1 + eps2.eps(2) * t2)))
}

pub fn classify_region(eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> CurveClassification {
    let discriminant = eps1.eps(1) * eps2.eps(2) - eps2.eps(1) * eps1.eps(2);
    let case = if discriminant > DISCRIMINANT_TOL {
        CurveCase::ConcaveCaseI
    } else if discriminant < -DISCRIMINANT_TOL {
        CurveCase::ConvexCaseII
    } else {
        CurveCase::LinearCaseIII
    };
    CurveClassification { case, discriminant }
}

/// `C = eps1 ln(7/3) + eps2 ln 7`.
pub fn pg22_capacity(eps: &Pg22Pattern) -> f64 {
    eps.eps(1) * (7.0f64 / 3.0).ln() + eps.eps(2) * 7f64.ln()
}

/// `g(sigma) = (1-σ)ln(1-σ) - (1-2σ/3)ln(1-2σ/3) + (σ/3)ln σ + (1-σ)ln 6 - (1-2σ/3)ln 2`.
pub fn g_function(sigma: f64) -> Result<f64> {
    check_sigma_closed(sigma)?;
    let b = 1.0 - 2.0 * sigma / 3.0;
    Ok(xlnx(1.0 - sigma) - xlnx(b) + xlnx(sigma) / 3.0 + (1.0 - sigma) * 6f64.ln()
        - b * 2f64.ln())
}

/// `R2'' R1' - R1'' R2'`, which has the sign of `f''` because `R1' > 0`.
pub fn second_derivative_numerator(
    sigma: f64,
    eps1: &Pg22Pattern,
    eps2: &Pg22Pattern,
) -> Result<f64> {
    check_sigma_open(sigma)?;
    check_order(eps1, eps2)?;
    let cross = eps2.eps(1) * eps1.eps(2) - eps1.eps(1) * eps2.eps(2);
    let denom = sigma * (1.0 - sigma) * (3.0 - 2.0 * sigma);
    Ok(2.0 * cross / denom * g_function(sigma)?)
}

/// Sign (-1, 0 or 1) of the curvature of `R2 = f(R1)` at `sigma`.
pub fn second_derivative_sign(sigma: f64, eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> Result<i8> {
    let v = second_derivative_numerator(sigma, eps1, eps2)?;
    Ok(if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    })
}

/// A sample `(sigma, R1, R2)` of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sigma: f64,
    pub r1: f64,
    pub r2: f64,
}

/// `Γ` on `points` uniformly spaced values of `sigma` in `[0, 6/7]`.
pub fn gamma_curve(eps1: &Pg22Pattern, eps2: &Pg22Pattern, points: usize) -> Result<Vec<CurvePoint>> {
    if points < 2 {
        return Err(Error::param("curve needs at least two points"));
    }
    (0..points)
        .map(|k| {
            let sigma = if k + 1 == points {
                SIGMA_MAX
            } else {
                SIGMA_MAX * k as f64 / (points - 1) as f64
            };
            let (r1, r2) = gamma_rates(sigma, eps1, eps2)?;
            Ok(CurvePoint { sigma, r1, r2 })
        })
        .collect()
}

/// Second divided differences of `R2` as a function of `R1` at the interior curve points.
pub fn second_divided_differences(curve: &[CurvePoint]) -> Vec<f64> {
    curve
        .windows(3)
        .map(|w| {
            let (x0, x1, x2) = (w[0].r1, w[1].r1, w[2].r1);
            let (y0, y1, y2) = (w[0].r2, w[1].r2, w[2].r2);
            2.0 * ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0)
        })
        .collect()
}

/// `R2 - C2 (1 - R1/C1)`: vertical distance of `Γ(sigma)` above the time-sharing line.
pub fn line_margin(sigma: f64, eps1: &Pg22Pattern, eps2: &Pg22Pattern) -> Result<f64> {
    let (r1, r2) = gamma_rates(sigma, eps1, eps2)?;
    let (c1, c2) = (pg22_capacity(eps1), pg22_capacity(eps2));
    Ok(r2 - c2 * (1.0 - r1 / c1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, c: f64) -> Pg22Pattern {
        Pg22Pattern::new([a, b, c]).unwrap()
    }

    fn ex1() -> (Pg22Pattern, Pg22Pattern) {
        (p(0.05, 0.24, 0.71), p(0.30, 0.15, 0.55))
    }

    #[test]
    fn joint_endpoints() {
        let j = symmetric_joint(0.0).unwrap();
        assert_eq!(j.table(), &(Matrix::identity(7, 7) / 7.0));
        let j = symmetric_joint(SIGMA_MAX).unwrap();
        assert!(j.table().iter().all(|&v| (v - 1.0 / 49.0).abs() < 1e-15));
        for s in [0.1, 0.5, 0.8] {
            let j = symmetric_joint(s).unwrap();
            assert!(j.u_marginal().iter().all(|&m| (m - 1.0 / 7.0).abs() < 1e-15));
        }
        assert!(symmetric_joint(-0.01).is_err());
        assert!(symmetric_joint(0.9).is_err());
    }

    #[test]
    fn example_one_endpoints() {
        let (a, b) = ex1();
        let (r1, r2) = gamma_rates(0.0, &a, &b).unwrap();
        assert!(r1.abs() < 1e-12);
        assert!((r2 - 1.197345261038503).abs() < 1e-12);
        let (r1, r2) = gamma_rates(SIGMA_MAX, &a, &b).unwrap();
        assert!((r1 - 1.5849476923222012).abs() < 1e-12);
        assert!(r2.abs() < 1e-12);
    }

    #[test]
    fn capacities() {
        assert!((pg22_capacity(&p(0.0, 0.0, 1.0)) - 7f64.ln()).abs() < 1e-15);
        assert_eq!(pg22_capacity(&p(1.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn example_classifications() {
        let (a, b) = ex1();
        let c = classify_region(&a, &b);
        assert_eq!(c.case, CurveCase::ConcaveCaseI);
        assert!((c.discriminant - (0.132 - 0.1065)).abs() < 1e-15);
        let c = classify_region(&p(0.05, 0.20, 0.75), &b);
        assert_eq!(c.case, CurveCase::ConvexCaseII);
        assert!((c.discriminant - (0.110 - 0.1125)).abs() < 1e-15);
        let c = classify_region(&p(0.1, 0.0, 0.9), &p(0.3, 0.0, 0.7));
        assert_eq!(c.case, CurveCase::LinearCaseIII);
    }

    #[test]
    fn derivative_signs_and_limits() {
        let (a, b) = ex1();
        for k in 1..50 {
            let s = SIGMA_MAX * k as f64 / 50.0;
            let (d1, d2) = gamma_derivatives(s, &a, &b).unwrap();
            assert!(d1 > 0.0 && d2 < 0.0);
        }
        let (d1, d2) = gamma_derivatives(SIGMA_MAX - 1e-9, &a, &b).unwrap();
        assert!(d1.abs() < 1e-8 && d2.abs() < 1e-8);
        assert!(matches!(gamma_derivatives(0.0, &a, &b), Err(Error::Domain(_))));
        assert!(matches!(gamma_derivatives(SIGMA_MAX, &a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn g_values() {
        // Positive inside, vanishing with zero slope at 6/7.
        for s in [0.1, 0.3, 0.5, 0.7, 0.85] {
            assert!(g_function(s).unwrap() > 0.0);
        }
        assert!(g_function(SIGMA_MAX).unwrap().abs() < 1e-12);
        assert!((g_function(0.0).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn numerator_matches_finite_differences() {
        let (a, b) = ex1();
        let h = 1e-5;
        for s in [0.1, 0.3, 0.4, 0.6, 0.8] {
            let (d1, d2) = gamma_derivatives(s, &a, &b).unwrap();
            let (p1, p2) = gamma_derivatives(s + h, &a, &b).unwrap();
            let (m1, m2) = gamma_derivatives(s - h, &a, &b).unwrap();
            let (dd1, dd2) = ((p1 - m1) / (2.0 * h), (p2 - m2) / (2.0 * h));
            let numeric = dd2 * d1 - dd1 * d2;
            let closed = second_derivative_numerator(s, &a, &b).unwrap();
            assert!((numeric - closed).abs() < 1e-5 * (1.0 + closed.abs()), "{s}: {numeric} {closed}");
        }
        assert_eq!(second_derivative_sign(0.4, &a, &b).unwrap(), -1);
    }

    #[test]
    fn curve_requires_degraded_order() {
        let (a, b) = ex1();
        assert!(matches!(gamma_rates(0.2, &b, &a), Err(Error::Precondition(_))));
        let c = gamma_curve(&a, &b, 11).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c[10].sigma, SIGMA_MAX);
        assert!(line_margin(3.0 / 7.0, &a, &b).unwrap() > 1e-4);
    }
}
