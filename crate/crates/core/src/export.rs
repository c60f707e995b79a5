//! Text rendering of results. Numbers use 17 significant digits in the style
//! of C's `%.17g`, with `.` as decimal separator and LF line endings, so the
//! same values always produce the same bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::RatePoint;
use crate::matrix::Matrix;
use crate::pg22::CurvePoint;

/// `%.17g` formatting.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Unit in which rates are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    Nats,
    Bits,
    /// Logarithms to base `q`.
    Qary(u32),
}

impl LogBase {
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            LogBase::Nats => x,
            LogBase::Bits => x / std::f64::consts::LN_2,
            LogBase::Qary(q) => x / (q as f64).ln(),
        }
    }

    pub fn name(self) -> String {
        match self {
            LogBase::Nats => "nats".into(),
            LogBase::Bits => "bits".into(),
            LogBase::Qary(q) => format!("base-{q}"),
        }
    }

    /// Parse `nats`, `bits` or `qary`; the latter takes the field size `q`.
    pub fn parse(s: &str, q: u32) -> Result<Self> {
        match s {
            "nats" => Ok(LogBase::Nats),
            "bits" => Ok(LogBase::Bits),
            "qary" => {
                if q < 2 {
                    return Err(Error::param("q-ary logarithms need q >= 2"));
                }
                Ok(LogBase::Qary(q))
            }
            other => Err(Error::param(format!("unknown log base {other:?}"))),
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 2)
    }
}

/// CSV with header `r1,r2,tag,seed`; the seed column is empty when absent.
pub fn points_csv(points: &[RatePoint], base: LogBase) -> String {
    let mut out = String::from("r1,r2,tag,seed\n");
    for p in points {
        let seed = p.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(base.from_nats(p.r1)),
            fmt_num(base.from_nats(p.r2)),
            p.tag.as_str(),
            seed
        );
    }
    out
}

/// CSV with header `sigma,r1,r2`.
pub fn curve_csv(curve: &[CurvePoint], base: LogBase) -> String {
    let mut out = String::from("sigma,r1,r2\n");
    for c in curve {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(c.sigma),
            fmt_num(base.from_nats(c.r1)),
            fmt_num(base.from_nats(c.r2))
        );
    }
    out
}

/// One comma-separated line per matrix row, no header.
pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
