use std::f64::consts::PI;

use crate::distributions::{BoundedValue, UNIT_ROUNDOFF};
use crate::error::{domain, Result};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

const SERIES_LIMIT: f64 = 3.0;
const CF_DEPTH: u32 = 400;

/// Standard normal distribution function.
///
/// For `|x| <= 3` this sums `Φ(x) = 1/2 + φ(x) Σ x^{2k+1} / (2k+1)!!`, whose
/// terms are all of one sign. Beyond that the upper tail
/// `φ(z) / (z + 1/(z + 2/(z + 3/(z + ...))))` is evaluated bottom-up.
pub fn normal_cdf(x: f64) -> Result<BoundedValue> {
    if !x.is_finite() {
        return Err(domain(format!("normal_cdf needs a finite argument, got {x}")));
    }
    if x.abs() <= SERIES_LIMIT {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0u32;
        loop {
            k += 1;
            term *= x2 / (2 * k + 1) as f64;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        let phi = normal_pdf(x);
        let half_width = phi * sum;
        let value = 0.5 + half_width;
        let err = (k as f64 + 8.0) * UNIT_ROUNDOFF * (0.5 + half_width.abs());
        return Ok(BoundedValue::new(value, err));
    }
    let z = x.abs();
    let mut frac = z;
    for k in (1..=CF_DEPTH).rev() {
        frac = z + k as f64 / frac;
    }
    let tail = normal_pdf(z) / frac;
    let tail_err = 16.0 * UNIT_ROUNDOFF * tail + 1e-300;
    if x < 0.0 {
        Ok(BoundedValue::new(tail, tail_err))
    } else {
        Ok(BoundedValue::new(1.0 - tail, tail_err + UNIT_ROUNDOFF))
    }
}
