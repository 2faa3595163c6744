//! One-sigma interval construction and concentration evaluation.
//!
//! The closed/open distinction is handled in exactly one place: the
//! conversion of the real interval `[mean - sd, mean + sd]` into an integer
//! [`SupportRange`]. Summation loops never compare against the real
//! endpoints.
//!
//! Raw-real parameters decide endpoint integrality by plain binary-float
//! comparison of the computed endpoints. A parameter that sits exactly on a
//! breakpoint (for example `p = sqrt(3) - 1`, whose `sd` is exactly one) is
//! generally not representable, so callers that need the exact convention
//! pass a [`PinnedParam`] instead; the constructors for those live in
//! [`crate::search`].

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::distributions::{
    poisson_pmf, BoundedValue, CompensatedSum, Family, Prob, UNIT_ROUNDOFF,
};
use crate::error::{domain, Error, Result};

/// Closed (`<=`) or open (`<`) one-sigma event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Closed,
    Open,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Closed, Mode::Open];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Closed => "closed",
            Mode::Open => "open",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Mode::Closed),
            "open" => Ok(Mode::Open),
            other => Err(Error::Unknown {
                what: "mode",
                value: other.to_string(),
            }),
        }
    }
}

/// Integers `lo..=hi` inside the one-sigma interval; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportRange {
    pub lo: i64,
    pub hi: i64,
}

impl SupportRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        SupportRange { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !self.is_empty() && self.lo == -self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// A family parameter whose one-sigma endpoints are known to hit the given
/// integers exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnedParam {
    pub family: Family,
    /// `mean - sd` equals this integer.
    pub lower_hit: Option<i64>,
    /// `mean + sd` equals this integer.
    pub upper_hit: Option<i64>,
}

impl PinnedParam {
    /// Validates the family and that each claimed hit agrees with the
    /// floating-point endpoint to within `1e-9` relative.
    pub fn new(family: Family, lower_hit: Option<i64>, upper_hit: Option<i64>) -> Result<Self> {
        family.validate()?;
        let (a, b) = family.one_sigma_interval();
        for (hit, end) in [(lower_hit, a), (upper_hit, b)] {
            if let Some(n) = hit {
                let n = n as f64;
                if (end - n).abs() > 1e-9 * n.abs().max(1.0) {
                    return Err(domain(format!(
                        "{family}: endpoint {end} is not at the pinned integer {n}"
                    )));
                }
            }
        }
        Ok(PinnedParam {
            family,
            lower_hit,
            upper_hit,
        })
    }

    /// Unpinned wrapper around a raw-real parameter.
    pub fn raw(family: Family) -> Self {
        PinnedParam {
            family,
            lower_hit: None,
            upper_hit: None,
        }
    }
}

fn to_i64(x: f64) -> i64 {
    // Saturating; the families in scope never come close.
    x as i64
}

fn range_for(param: &PinnedParam, mode: Mode) -> SupportRange {
    let (a, b) = param.family.one_sigma_interval();
    let mut lo = match (param.lower_hit, mode) {
        (Some(n), Mode::Closed) => n,
        (Some(n), Mode::Open) => n + 1,
        (None, Mode::Closed) => to_i64(a.ceil()),
        (None, Mode::Open) => to_i64(a.floor()) + 1,
    };
    let hi = match (param.upper_hit, mode) {
        (Some(n), Mode::Closed) => n,
        (Some(n), Mode::Open) => n - 1,
        (None, Mode::Closed) => to_i64(b.floor()),
        (None, Mode::Open) => to_i64(b.ceil()) - 1,
    };
    if let Some(min) = param.family.support_min() {
        lo = lo.max(min);
    }
    SupportRange { lo, hi }
}

/// Integer range covered by the one-sigma event of a raw-real parameter.
pub fn stddev_range(family: Family, mode: Mode) -> Result<SupportRange> {
    family.validate()?;
    Ok(range_for(&PinnedParam::raw(family), mode))
}

/// [`stddev_range`] honouring exact endpoint hits.
pub fn stddev_range_pinned(param: &PinnedParam, mode: Mode) -> SupportRange {
    range_for(param, mode)
}

/// Sums the family's pmf over `range`, folding symmetric ranges of the
/// two-sided families into `pmf(0) + 2 sum_{k>=1} pmf(k)`.
pub fn concentration_over(family: Family, range: SupportRange) -> Result<BoundedValue> {
    family.validate()?;
    if range.is_empty() {
        return Ok(BoundedValue::exact(0.0));
    }
    let mut acc = CompensatedSum::new();
    if family.is_symmetric() && range.is_symmetric() {
        let mut tail = CompensatedSum::new();
        for k in 1..=range.hi {
            tail.add_bounded(family.pmf(k)?);
        }
        acc.add_bounded(family.pmf(0)?);
        acc.add_bounded(tail.finish().scale(2.0));
    } else {
        for k in range.iter() {
            acc.add_bounded(family.pmf(k)?);
        }
    }
    Ok(acc.finish())
}

/// `P{|X - E[X]| <= sd}` (closed) or `P{|X - E[X]| < sd}` (open).
pub fn concentration(family: Family, mode: Mode) -> Result<BoundedValue> {
    let range = stddev_range(family, mode)?;
    concentration_over(family, range)
}

/// [`concentration`] at a pinned parameter.
pub fn concentration_pinned(param: &PinnedParam, mode: Mode) -> Result<BoundedValue> {
    concentration_over(param.family, stddev_range_pinned(param, mode))
}

fn pow_bounded(q: f64, n: i64) -> BoundedValue {
    let n = n.max(0);
    let v = q.powi(n as i32);
    let nf = n as f64;
    BoundedValue::with_rel_err(v, nf + 2.0 * (nf + 1.0).log2() + 2.0)
}

fn one_minus(x: BoundedValue) -> BoundedValue {
    let value = 1.0 - x.value;
    BoundedValue::new(value, x.abs_err + UNIT_ROUNDOFF)
}

/// Geometric concentration from the piecewise closed form
/// `1 - q^floor(1/(1 - sqrt q))` (closed) with `q = 1 - p`; the open
/// event drops the top term when `1/(1 - sqrt q)` is an integer.
pub fn geometric_closed_form(p: f64, mode: Mode) -> Result<BoundedValue> {
    crate::distributions::geometric_pmf(p, 0)?;
    let q = 1.0 - p;
    let x = 1.0 / (1.0 - q.sqrt());
    let value = match mode {
        Mode::Closed if p > 0.75 => BoundedValue::exact(p),
        Mode::Closed => one_minus(pow_bounded(q, to_i64(x.floor()))),
        Mode::Open => one_minus(pow_bounded(q, to_i64(x.ceil()) - 1)),
    };
    Ok(value)
}

/// Symmetric geometric concentration from
/// `1 - 2 q^(floor(sqrt(2q)/(1-q)) + 1) / (1 + q)`, with the `p / (2 - p)`
/// branch for `p > sqrt(3) - 1`.
pub fn sym_geometric_closed_form(p: f64, mode: Mode) -> Result<BoundedValue> {
    crate::distributions::sym_geometric_pmf(p, 0)?;
    let q = 1.0 - p;
    let x = (2.0 * q).sqrt() / p;
    let tail = |n: i64| pow_bounded(q, n).scale(2.0 / (1.0 + q));
    let value = match mode {
        Mode::Closed if p > 3f64.sqrt() - 1.0 => BoundedValue::with_rel_err(p / (2.0 - p), 2.0),
        Mode::Closed => one_minus(tail(to_i64(x.floor()) + 1)),
        Mode::Open => one_minus(tail(to_i64(x.ceil()))),
    };
    Ok(BoundedValue::new(value.value, value.abs_err + 4.0 * UNIT_ROUNDOFF))
}

/// Closed-mode concentration of the symmetric four-point law with mass
/// `eps/2` at `±a1` and `(1-eps)/2` at `±a2`.
///
/// A point `x` is inside the one-sigma event iff `Var - x^2 >= 0`; that
/// difference is evaluated as `(a1^2 - x^2) eps + (a2^2 - x^2)(1 - eps)`, whose
/// sign is exact for `x in {a1, a2}`.
pub fn fourpoint_concentration(a1: f64, a2: f64, eps: f64) -> Result<Prob> {
    if !(a1.is_finite() && a2.is_finite() && 0.0 <= a1 && a1 < a2) {
        return Err(domain(format!("need 0 <= a1 < a2, got a1={a1}, a2={a2}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    let points = [(a1, eps / 2.0), (-a1, eps / 2.0), (a2, (1.0 - eps) / 2.0), (-a2, (1.0 - eps) / 2.0)];
    let slack = |x: f64| (a1 * a1 - x * x) * eps + (a2 * a2 - x * x) * (1.0 - eps);
    let mass: f64 = points
        .iter()
        .filter(|(x, _)| slack(*x) >= 0.0)
        .map(|(_, w)| w)
        .sum();
    Ok(Prob::clamped(mass))
}

/// `P{lambda - eps sqrt(lambda) <= N_lambda <= lambda + eps sqrt(lambda)}`
/// for `eps in (0, sqrt(2)/2)` and `lambda in (eps^2, 1/2)`, where the
/// shrunk interval lies strictly inside `(0, 1)`.
pub fn epsilon_gap_check(eps: f64, lambda: f64) -> Result<Prob> {
    if !(eps > 0.0 && eps < std::f64::consts::FRAC_1_SQRT_2) {
        return Err(domain(format!("eps must lie in (0, sqrt(2)/2), got {eps}")));
    }
    if !(lambda > eps * eps && lambda < 0.5) {
        return Err(domain(format!("lambda must lie in (eps^2, 1/2), got {lambda}")));
    }
    let half = eps * lambda.sqrt();
    let lo = to_i64((lambda - half).ceil()).max(0);
    let hi = to_i64((lambda + half).floor());
    let mut total = 0.0;
    for k in lo..=hi {
        total += poisson_pmf(lambda, k as u64)?.value;
    }
    Ok(Prob::clamped(total))
}

/// Open-mode Poisson concentration along a strictly decreasing sequence of
/// rates.
pub fn sup_limit_probe(lambdas: &[f64]) -> Result<Vec<Prob>> {
    for w in lambdas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(domain("rates must be strictly decreasing"));
        }
    }
    lambdas
        .iter()
        .map(|&lambda| Ok(concentration(Family::Poisson { lambda }, Mode::Open)?.to_prob()))
        .collect()
}
