use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Add;

use crate::error::{domain, Result};

/// One ulp of relative error, used as the per-operation rounding unit.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prob(f64);

impl Prob {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Prob(value))
        } else {
            Err(domain(format!("probability out of [0, 1]: {value}")))
        }
    }

    /// Clamps rounding excursions such as `1 + 1e-16` back into range.
    pub fn clamped(value: f64) -> Self {
        Prob(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Prob> for f64 {
    fn from(p: Prob) -> f64 {
        p.0
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A real number together with a certified absolute error bound.
///
/// The true quantity lies in `[value - abs_err, value + abs_err]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedValue {
    pub value: f64,
    pub abs_err: f64,
}

impl BoundedValue {
    pub fn new(value: f64, abs_err: f64) -> Self {
        debug_assert!(abs_err >= 0.0, "negative error bound {abs_err}");
        BoundedValue { value, abs_err }
    }

    pub fn exact(value: f64) -> Self {
        BoundedValue { value, abs_err: 0.0 }
    }

    /// `value` with a relative error of `ulps` rounding units.
    pub fn with_rel_err(value: f64, ulps: f64) -> Self {
        BoundedValue::new(value, value.abs() * ulps * UNIT_ROUNDOFF)
    }

    pub fn lower(&self) -> f64 {
        self.value - self.abs_err
    }

    pub fn upper(&self) -> f64 {
        self.value + self.abs_err
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.abs_err
    }

    /// Scales by an exactly known positive factor, adding one rounding.
    pub fn scale(self, factor: f64) -> Self {
        let value = self.value * factor;
        BoundedValue::new(value, self.abs_err * factor.abs() + value.abs() * UNIT_ROUNDOFF)
    }

    pub fn to_prob(self) -> Prob {
        Prob::clamped(self.value)
    }
}

impl Add for BoundedValue {
    type Output = BoundedValue;

    fn add(self, rhs: BoundedValue) -> BoundedValue {
        let value = self.value + rhs.value;
        BoundedValue::new(value, self.abs_err + rhs.abs_err + value.abs() * UNIT_ROUNDOFF)
    }
}

impl fmt::Display for BoundedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.value, self.abs_err)
    }
}
