//! Independent high-precision reference engine.
//!
//! Everything here is computed on [`BigReal`], a thin wrapper over
//! `astro_float::BigFloat` with a run-time precision of at least 50
//! significant digits. No routine calls into the `f64` code paths it is
//! used to validate; parameters enter as exactly converted doubles.
//!
//! Results are trusted only after [`converge`] has re-evaluated them at
//! twice the precision and found agreement.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::certify::{normal_cdf, rho_poisson1, ExactTag};
use crate::concentration::{concentration, geometric_closed_form, sym_geometric_closed_form, Mode};
use crate::distributions::{moments, poisson_cdf, poisson_pmf, skellam_pmf, BoundedValue, Family};
use crate::error::{domain, Result};
use crate::search::{breakpoint, g1_value, g2_value, q_truncated, BreakpointKind};

/// Default working precision in significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;
/// Smallest accepted working precision.
pub const MIN_DIGITS: u32 = 50;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(domain(format!(
                "oracle precision must be at least {MIN_DIGITS} digits, got {digits}"
            )));
        }
        Ok(Precision { digits })
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    pub fn doubled(self) -> Self {
        Precision {
            digits: self.digits * 2,
        }
    }

    /// Mantissa bits: the digits plus guard bits.
    pub fn bits(self) -> usize {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
    }

    /// `10^-digits`.
    pub fn epsilon(self) -> BigReal {
        BigReal::int(10, self).powi(self.digits as usize).recip()
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            digits: DEFAULT_DIGITS,
        }
    }
}

/// Arbitrary-precision real; every operation rounds to nearest at the
/// larger operand precision.
#[derive(Debug, Clone)]
pub struct BigReal {
    x: BigFloat,
    p: usize,
}

impl BigReal {
    fn wrap(x: BigFloat, p: usize) -> Self {
        BigReal { x, p }
    }

    /// Exact conversion of a double.
    pub fn from_f64(v: f64, prec: Precision) -> Self {
        let p = prec.bits();
        if v != 0.0 && v.abs() < f64::MIN_POSITIVE {
            // `BigFloat::from_f64` drops subnormals; rescale through 2^64.
            let scaled = Self::wrap(BigFloat::from_f64(v * 2f64.powi(64), p), p);
            return scaled / Self::int(2, prec).powi(64);
        }
        Self::wrap(BigFloat::from_f64(v, p), p)
    }

    pub fn int(n: i64, prec: Precision) -> Self {
        let p = prec.bits();
        Self::wrap(BigFloat::from_i64(n, p), p)
    }

    pub fn zero(prec: Precision) -> Self {
        Self::int(0, prec)
    }

    pub fn one(prec: Precision) -> Self {
        Self::int(1, prec)
    }

    pub fn pi(prec: Precision) -> Self {
        let p = prec.bits();
        Self::wrap(with_cc(|cc| cc.pi(p, RM)), p)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_cc(|cc| self.x.exp(self.p, RM, cc)), self.p)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_cc(|cc| self.x.ln(self.p, RM, cc)), self.p)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.x.sqrt(self.p, RM), self.p)
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.x.powi(n, self.p, RM), self.p)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.x.reciprocal(self.p, RM), self.p)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.x.abs(), self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.x.is_negative() && !self.x.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.x.is_nan() && !self.x.is_inf()
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self * &Self::wrap(BigFloat::from_i64(n, self.p), self.p)
    }

    pub fn div_int(&self, n: i64) -> Self {
        self / &Self::wrap(BigFloat::from_i64(n, self.p), self.p)
    }

    /// Largest integer `<= self`.
    pub fn floor_i64(&self) -> i64 {
        let mut f = self.to_f64().floor() as i64;
        let prec = self.precision();
        while BigReal::int(f, prec) > *self {
            f -= 1;
        }
        while BigReal::int(f + 1, prec) <= *self {
            f += 1;
        }
        f
    }

    /// Smallest integer `>= self`.
    pub fn ceil_i64(&self) -> i64 {
        -(-self).floor_i64()
    }

    fn precision(&self) -> Precision {
        let digits = ((self.p - GUARD_BITS) as f64 / std::f64::consts::LOG2_10).floor() as u32;
        Precision { digits }
    }

    /// Scientific decimal with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let p = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 8;
        let mut y = self.x.clone();
        y.set_precision(p, RM).expect("precision change");
        with_cc(|cc| y.format(Radix::Dec, RM, cc)).expect("decimal formatting")
    }

    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        if self.x.is_zero() {
            return 0.0;
        }
        let s = with_cc(|cc| self.x.format(Radix::Dec, RM, cc)).expect("decimal formatting");
        s.parse::<f64>().unwrap_or(f64::NAN)
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.x.cmp(&other.x) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.x.cmp(&other.x).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.precision().digits as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident) => {
        impl $tr<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                let p = self.p.max(rhs.p);
                BigReal::wrap(self.x.$m(&rhs.x, p, RM), p)
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &BigReal) -> BigReal {
                (&self).$m(rhs)
            }
        }
    };
}

bin_op!(Add, add);
bin_op!(Sub, sub);
bin_op!(Mul, mul);
bin_op!(Div, div);

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::wrap(-self.x.clone(), self.p)
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -&self
    }
}

/// Outcome of evaluating a quantity at two precisions.
#[derive(Debug, Clone)]
pub struct Converged {
    /// Value at the doubled precision.
    pub value: BigReal,
    /// Significant digits on which the two evaluations agree.
    pub digits_agreed: f64,
}

/// Evaluates `f` at `prec` and `2 prec` and requires agreement to all but
/// ten of the working digits.
pub fn converge<F>(prec: Precision, f: F) -> Result<Converged>
where
    F: Fn(Precision) -> Result<BigReal>,
{
    let a = f(prec)?;
    let b = f(prec.doubled())?;
    let full = prec.doubled().digits as f64;
    let diff = (&a - &b).abs();
    let digits_agreed = if diff.is_zero() {
        full
    } else if b.is_zero() {
        -(diff.ln().to_f64() / std::f64::consts::LN_10)
    } else {
        -((diff / b.abs()).ln().to_f64() / std::f64::consts::LN_10)
    };
    let need = prec.digits as f64 - 10.0;
    if !(digits_agreed >= need) {
        return Err(domain(format!(
            "oracle did not converge: {digits_agreed:.1} digits agree, {need} required"
        )));
    }
    Ok(Converged {
        value: b,
        digits_agreed: digits_agreed.min(full),
    })
}

fn check_lambda(lambda: &BigReal) -> Result<()> {
    if !lambda.is_finite() || lambda.is_negative() || lambda.is_zero() {
        return Err(domain(format!("lambda must be positive, got {lambda:.20}")));
    }
    Ok(())
}

/// `e^{-λ} λ^k / k!`.
pub fn oracle_poisson_pmf(lambda: &BigReal, k: u64) -> Result<BigReal> {
    check_lambda(lambda)?;
    let mut t = (-lambda).exp();
    for j in 1..=k {
        t = &t * lambda;
        t = t.div_int(j as i64);
    }
    Ok(t)
}

/// `Σ_{k=0}^{m} e^{-λ} λ^k / k!`, a finite sum with no truncation.
pub fn oracle_poisson_cdf(lambda: &BigReal, m: i64) -> Result<BigReal> {
    check_lambda(lambda)?;
    let mut sum = BigReal::zero(lambda.precision());
    if m < 0 {
        return Ok(sum);
    }
    let mut t = (-lambda).exp();
    sum = &sum + &t;
    for k in 1..=m {
        t = (&t * lambda).div_int(k);
        sum = &sum + &t;
    }
    Ok(sum)
}

/// Adds terms `t_0, t_1, ...` produced by `next` until the ratio bound
/// `ratio(j)` drops to 1/2 and the current term is below `eps` relative to
/// the partial sum, so the geometric tail is at most one more term.
fn sum_series(
    prec: Precision,
    first: BigReal,
    mut next: impl FnMut(u64, &BigReal) -> BigReal,
    ratio_small: impl Fn(u64) -> bool,
) -> BigReal {
    let eps = prec.epsilon().div_int(1_000);
    let mut t = first;
    let mut sum = t.clone();
    let mut j = 0u64;
    loop {
        t = next(j, &t);
        j += 1;
        sum = &sum + &t;
        if ratio_small(j) && t <= &sum * &eps {
            return sum;
        }
    }
}

/// `Σ_j pois(λ, |l| + j) pois(λ, j)`, the convolution form of the equal-rate
/// Skellam mass.
pub fn oracle_skellam_pmf(lambda: &BigReal, l: i64) -> Result<BigReal> {
    check_lambda(lambda)?;
    let prec = lambda.precision();
    let a = l.unsigned_abs();
    let lam = lambda.to_f64();
    let mut p_j = oracle_poisson_pmf(lambda, 0)?;
    let mut p_aj = oracle_poisson_pmf(lambda, a)?;
    let first = &p_j * &p_aj;
    let sum = sum_series(
        prec,
        first,
        |j, _| {
            p_j = (&p_j * lambda).div_int(j as i64 + 1);
            p_aj = (&p_aj * lambda).div_int((a + j + 1) as i64);
            &p_j * &p_aj
        },
        |j| lam * lam <= 0.5 * (j as f64 + 1.0) * (j as f64 + 1.0),
    );
    Ok(sum)
}

/// `e^{-2λ} Σ_k λ^{2k+|l|} / (k! (k+|l|)!)`, i.e. `e^{-2λ} I_l(2λ)`.
pub fn oracle_skellam_series(lambda: &BigReal, l: i64) -> Result<BigReal> {
    check_lambda(lambda)?;
    Ok((-lambda.mul_int(2)).exp() * bessel_series(lambda, l.unsigned_abs(), None))
}

/// `Σ_{k<=K} λ^{2k+l} / (k! (k+l)!)`; all terms when `terms` is `None`.
fn bessel_series(lambda: &BigReal, l: u64, terms: Option<u64>) -> BigReal {
    let prec = lambda.precision();
    let lam2 = lambda * lambda;
    let lam = lambda.to_f64();
    let mut t0 = BigReal::one(prec);
    for j in 1..=l {
        t0 = (&t0 * lambda).div_int(j as i64);
    }
    let step = |k: u64, t: &BigReal| (t * &lam2).div_int(((k + 1) * (k + 1 + l)) as i64);
    match terms {
        Some(k_max) => {
            let mut t = t0;
            let mut sum = t.clone();
            for k in 0..k_max {
                t = step(k, &t);
                sum = &sum + &t;
            }
            sum
        }
        None => sum_series(prec, t0, step, |k| {
            lam * lam <= 0.5 * (k as f64 + 1.0) * (k as f64 + 1.0 + l as f64)
        }),
    }
}

/// `erf(x)` from `(2/√π) e^{-x²} Σ_n 2^n x^{2n+1} / (2n+1)!!`, whose terms
/// are all positive.
pub fn oracle_erf(x: &BigReal) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(domain("erf argument must be finite"));
    }
    let prec = x.precision();
    if x.is_zero() {
        return Ok(BigReal::zero(prec));
    }
    let z = x.abs();
    let z2 = &z * &z;
    let two_z2 = z2.mul_int(2);
    let zf = z.to_f64();
    let series = sum_series(
        prec,
        z.clone(),
        |n, t| (t * &two_z2).div_int(2 * n as i64 + 3),
        |n| 2.0 * zf * zf <= 0.5 * (2.0 * n as f64 + 3.0),
    );
    let scale = (-z2).exp().mul_int(2) / BigReal::pi(prec).sqrt();
    let v = scale * series;
    Ok(if x.is_negative() { -v } else { v })
}

/// `Φ(x) = (1 + erf(x/√2)) / 2`.
pub fn oracle_normal_cdf(x: &BigReal) -> Result<BigReal> {
    let prec = x.precision();
    let arg = x / &BigReal::int(2, prec).sqrt();
    Ok((BigReal::one(prec) + oracle_erf(&arg)?).div_int(2))
}

/// `Σ_k f(k) pois(λ, k)` for `f(k) = |k - c|^r`, stopping once
/// `k > 4λ + 4r + 10` (term ratio below 1/2) and the term is negligible.
pub fn oracle_poisson_moment(lambda: &BigReal, center: &BigReal, r: u32, absolute: bool) -> Result<BigReal> {
    check_lambda(lambda)?;
    let prec = lambda.precision();
    let eps = prec.epsilon().div_int(1_000);
    let cutoff = 4.0 * lambda.to_f64() + 4.0 * r as f64 + 10.0 + center.to_f64().abs();
    let weight = |k: u64| {
        let d = BigReal::int(k as i64, prec) - center;
        let d = if absolute { d.abs() } else { d };
        d.powi(r as usize)
    };
    let mut pmf = (-lambda).exp();
    let mut sum = &pmf * &weight(0);
    let mut k = 0u64;
    loop {
        k += 1;
        pmf = (&pmf * lambda).div_int(k as i64);
        let term = &pmf * &weight(k);
        sum = &sum + &term;
        if k as f64 > cutoff && term.abs() <= &sum.abs() * &eps {
            return Ok(sum);
        }
    }
}

/// Largest `l` with `l^2 <= 2λ`, on the exact double.
fn l_max(lambda: f64) -> u64 {
    let two = 2.0 * lambda;
    let mut l = 0u64;
    while (((l + 1) * (l + 1)) as f64) <= two {
        l += 1;
    }
    l
}

/// `Σ_{|l|<=⌊√(2λ)⌋}` of the Skellam mass, with each inner series cut at
/// `K` terms when `terms` is given.
pub fn oracle_q(lambda: f64, terms: Option<u64>, prec: Precision) -> Result<BigReal> {
    let lam = BigReal::from_f64(lambda, prec);
    check_lambda(&lam)?;
    let mut total = bessel_series(&lam, 0, terms);
    for l in 1..=l_max(lambda) {
        total = total + bessel_series(&lam, l, terms).mul_int(2);
    }
    Ok((-lam.mul_int(2)).exp() * total)
}

/// `Q_full(λ) - Q_K(λ)`: the mass dropped by truncating each inner series
/// after `K` terms.
pub fn oracle_q_truncation_gap(lambda: f64, terms: u64, prec: Precision) -> Result<BigReal> {
    Ok(oracle_q(lambda, None, prec)? - oracle_q(lambda, Some(terms), prec)?)
}

/// Root of `λ + √λ = n` (upper) or `λ - √λ = n` (lower) at working precision.
pub fn oracle_breakpoint(n: u64, kind: BreakpointKind, prec: Precision) -> BigReal {
    let n = n as i64;
    let s = BigReal::int(4 * n + 1, prec).sqrt() + BigReal::int(2 * n + 1, prec);
    match kind {
        BreakpointKind::Upper => BigReal::int(2 * n * n, prec) / s,
        BreakpointKind::Lower => s.div_int(2),
    }
}

/// `P{N_λ <= n - 1}` at the upper breakpoint, with `λ` at working precision.
pub fn oracle_g1(n: u64, prec: Precision) -> Result<BigReal> {
    oracle_poisson_cdf(&oracle_breakpoint(n, BreakpointKind::Upper, prec), n as i64 - 1)
}

/// `P{N_λ <= n}` at the lower breakpoint, with `λ` at working precision.
pub fn oracle_g2(n: u64, prec: Precision) -> Result<BigReal> {
    oracle_poisson_cdf(&oracle_breakpoint(n, BreakpointKind::Lower, prec), n as i64)
}

/// One-sigma interval endpoints at working precision, in the same
/// algebraic forms as the closed-form moments.
fn endpoints(family: Family, prec: Precision) -> (BigReal, BigReal) {
    let one = BigReal::one(prec);
    let v = BigReal::from_f64(family.param(), prec);
    match family {
        Family::Geometric { .. } => {
            let sq = (&one - &v).sqrt();
            ((&one - &sq) / &v - &one, (&one + &sq) / &v - &one)
        }
        Family::SymGeometric { .. } => {
            let s = (&one - &v).mul_int(2).sqrt() / &v;
            (-&s, s)
        }
        Family::Poisson { .. } => {
            let s = v.sqrt();
            (&v - &s, &v + &s)
        }
        Family::SymPoisson { .. } => {
            let s = v.mul_int(2).sqrt();
            (-&s, s)
        }
    }
}

fn oracle_pmf(family: Family, k: i64, prec: Precision) -> Result<BigReal> {
    let one = BigReal::one(prec);
    let v = BigReal::from_f64(family.param(), prec);
    Ok(match family {
        Family::Geometric { .. } if k < 0 => BigReal::zero(prec),
        Family::Geometric { .. } => &v * &(&one - &v).powi(k as usize),
        Family::SymGeometric { .. } => {
            let q = &one - &v;
            &v / &(&one + &q) * q.powi(k.unsigned_abs() as usize)
        }
        Family::Poisson { .. } if k < 0 => BigReal::zero(prec),
        Family::Poisson { .. } => oracle_poisson_pmf(&v, k as u64)?,
        Family::SymPoisson { .. } => oracle_skellam_pmf(&v, k)?,
    })
}

/// Concentration probability by direct summation at working precision.
pub fn oracle_concentration(family: Family, mode: Mode, prec: Precision) -> Result<BigReal> {
    family.validate()?;
    let (a, b) = endpoints(family, prec);
    let (mut lo, hi) = match mode {
        Mode::Closed => (a.ceil_i64(), b.floor_i64()),
        Mode::Open => (a.floor_i64() + 1, b.ceil_i64() - 1),
    };
    if let Some(min) = family.support_min() {
        lo = lo.max(min);
    }
    let mut sum = BigReal::zero(prec);
    for k in lo..=hi {
        sum = sum + oracle_pmf(family, k, prec)?;
    }
    Ok(sum)
}

/// One row of the cross-check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub label: String,
    pub main: f64,
    /// Allowed distance from the oracle: the main build's `abs_err`, or a
    /// fixed tolerance for plain doubles.
    pub allowed: f64,
    pub oracle: f64,
    /// `|main - oracle|`, measured at working precision.
    pub diff: f64,
    pub digits_agreed: f64,
    pub passed: bool,
}

impl fmt::Display for VerifyRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(
            f,
            "{verdict}  {:<44} main {:<24} oracle {:<24} diff {:.2e} <= {:.2e}  ({:.0} digits)",
            self.label,
            crate::fmt::sig17(self.main),
            crate::fmt::sig17(self.oracle),
            self.diff,
            self.allowed,
            self.digits_agreed
        )
    }
}

fn row(
    label: impl Into<String>,
    main: BoundedValue,
    prec: Precision,
    f: impl Fn(Precision) -> Result<BigReal>,
) -> Result<VerifyRow> {
    let c = converge(prec, f)?;
    let diff = (BigReal::from_f64(main.value, prec.doubled()) - &c.value).abs().to_f64();
    Ok(VerifyRow {
        label: label.into(),
        main: main.value,
        allowed: main.abs_err,
        oracle: c.value.to_f64(),
        diff,
        digits_agreed: c.digits_agreed,
        passed: diff <= main.abs_err,
    })
}

fn big(v: f64, prec: Precision) -> BigReal {
    BigReal::from_f64(v, prec)
}

/// Cross-checks the main build against the oracle on a fixed corpus.
pub fn verify_corpus(prec: Precision) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();

    rows.push(row("poisson pmf (4, 6)", poisson_pmf(4.0, 6)?, prec, |p| {
        oracle_poisson_pmf(&big(4.0, p), 6)
    })?);
    rows.push(row("poisson cdf (1, 2)", poisson_cdf(1.0, 2)?, prec, |p| {
        oracle_poisson_cdf(&BigReal::one(p), 2)
    })?);
    for n in [8u64, 9, 20, 629] {
        let bp = breakpoint(n, BreakpointKind::Upper)?.lambda;
        rows.push(row(format!("g1 at n={n}"), g1_value(n)?, prec, |p| {
            oracle_poisson_cdf(&big(bp, p), n as i64 - 1)
        })?);
    }
    for n in [3u64, 4, 579] {
        let bp = breakpoint(n, BreakpointKind::Lower)?.lambda;
        rows.push(row(format!("g2 at n={n}"), g2_value(n)?, prec, |p| {
            oracle_poisson_cdf(&big(bp, p), n as i64)
        })?);
    }
    for (lambda, l) in [(1.0, 1i64), (0.5, 0), (10.0, -3), (50.0, 7)] {
        rows.push(row(format!("skellam pmf ({lambda}, {l})"), skellam_pmf(lambda, l)?, prec, |p| {
            oracle_skellam_pmf(&big(lambda, p), l)
        })?);
    }
    for x in [1.0, 0.0, -0.96, 0.9585, -0.9083, 4.5, -7.0] {
        rows.push(row(format!("normal cdf {x}"), normal_cdf(x)?, prec, |p| {
            oracle_normal_cdf(&big(x, p))
        })?);
    }
    rows.push(row(
        "rho = E|N-1|^3, N ~ Poisson(1)",
        BoundedValue::with_rel_err(rho_poisson1(), 4.0),
        prec,
        |p| oracle_poisson_moment(&BigReal::one(p), &BigReal::one(p), 3, true),
    )?);
    let m = moments(Family::Poisson { lambda: 2.0 })?;
    rows.push(row(
        "poisson third raw moment (2)",
        BoundedValue::with_rel_err(m.third_raw.unwrap_or(f64::NAN), 4.0),
        prec,
        |p| oracle_poisson_moment(&big(2.0, p), &BigReal::zero(p), 3, false),
    )?);
    for lambda in [0.5, 2.0, 17.3, 200.0] {
        rows.push(row(format!("Q_250({lambda})"), q_truncated(lambda, 250)?, prec, |p| {
            oracle_q(lambda, Some(250), p)
        })?);
    }

    let exact: [(ExactTag, fn(Precision) -> Result<BigReal>); 5] = [
        (ExactTag::ThreeQuarters, |p| Ok(BigReal::int(3, p).div_int(4))),
        (ExactTag::Sqrt3Over3, |p| Ok(BigReal::int(3, p).sqrt().div_int(3))),
        (ExactTag::ThreeHalvesOverE, |p| Ok((-BigReal::one(p)).exp().mul_int(3).div_int(2))),
        (ExactTag::OneOverE, |p| Ok((-BigReal::one(p)).exp())),
        (ExactTag::BesselSeriesOverE, |p| oracle_skellam_series(&big(0.5, p), 0)),
    ];
    for (tag, f) in exact {
        rows.push(row(
            format!("infimum {}", tag.exact_form()),
            BoundedValue::new(tag.decimal(), 1e-14),
            prec,
            f,
        )?);
    }

    let cases = [
        (Family::Geometric { p: 0.75 }, Mode::Closed),
        (Family::Geometric { p: 0.3 }, Mode::Open),
        (Family::SymGeometric { p: 0.5 }, Mode::Closed),
        (Family::SymGeometric { p: 0.05 }, Mode::Open),
        (Family::Poisson { lambda: 1.0 }, Mode::Open),
        (Family::Poisson { lambda: 1.0 }, Mode::Closed),
        (Family::Poisson { lambda: 37.5 }, Mode::Closed),
        (Family::SymPoisson { lambda: 0.5 }, Mode::Open),
        (Family::SymPoisson { lambda: 2.0 }, Mode::Closed),
        (Family::SymPoisson { lambda: 45.0 }, Mode::Open),
    ];
    for (family, mode) in cases {
        rows.push(row(format!("{family} {mode}"), concentration(family, mode)?, prec, |p| {
            oracle_concentration(family, mode, p)
        })?);
    }
    for (p_val, mode) in [(0.75, Mode::Closed), (0.3, Mode::Open)] {
        rows.push(row(
            format!("geometric closed form p={p_val} {mode}"),
            geometric_closed_form(p_val, mode)?,
            prec,
            |p| oracle_concentration(Family::Geometric { p: p_val }, mode, p),
        )?);
    }
    for (p_val, mode) in [(0.5, Mode::Closed), (0.05, Mode::Open)] {
        rows.push(row(
            format!("sym-geometric closed form p={p_val} {mode}"),
            sym_geometric_closed_form(p_val, mode)?,
            prec,
            |p| oracle_concentration(Family::SymGeometric { p: p_val }, mode, p),
        )?);
    }
    Ok(rows)
}
