use super::bounded::{BoundedValue, UNIT_ROUNDOFF};
use super::check_lambda;
use super::lnfact::{ln_factorial, ln_factorial_magnitude};
use super::sum::CompensatedSum;
use crate::error::Result;

/// Relative size below which a geometric tail bound ends the cdf summation.
const CDF_TAIL_REL: f64 = 1e-30;

/// `exp(log_value)` where `log_value` carries an absolute error of
/// `log_err`; returns the value with a relative bound covering both.
pub(crate) fn exp_bounded(log_value: f64, log_err: f64) -> BoundedValue {
    let value = log_value.exp();
    let rel = log_err * (1.0 + 2.0 * log_err) + 2.0 * UNIT_ROUNDOFF;
    BoundedValue::new(value, value * rel)
}

/// Poisson probability mass `e^{-lambda} lambda^k / k!`, evaluated in log
/// space so that `lambda` and `k` in the hundreds do not overflow.
pub fn poisson_pmf(lambda: f64, k: u64) -> Result<BoundedValue> {
    check_lambda(lambda)?;
    Ok(pmf_unchecked(lambda, lambda.ln(), k))
}

pub(crate) fn pmf_unchecked(lambda: f64, ln_lambda: f64, k: u64) -> BoundedValue {
    if k == 0 {
        return exp_bounded(-lambda, lambda * UNIT_ROUNDOFF);
    }
    let kf = k as f64;
    let log_value = -lambda + kf * ln_lambda - ln_factorial(k);
    let magnitude = lambda + kf * ln_lambda.abs() + ln_factorial_magnitude(k);
    exp_bounded(log_value, 8.0 * UNIT_ROUNDOFF * magnitude)
}

/// `P{N_lambda <= m}` by compensated forward summation from `k = 0`.
///
/// Once past the mode, summation stops early when the geometric tail bound
/// `t_k r / (1 - r)` with `r = lambda / (k + 1)` drops below `1e-30` of the
/// partial sum; that bound is folded into `abs_err`.
pub fn poisson_cdf(lambda: f64, m: i64) -> Result<BoundedValue> {
    check_lambda(lambda)?;
    if m < 0 {
        return Ok(BoundedValue::exact(0.0));
    }
    let ln_lambda = lambda.ln();
    let mut acc = CompensatedSum::new();
    for k in 0..=m as u64 {
        let term = pmf_unchecked(lambda, ln_lambda, k);
        acc.add_bounded(term);
        let kf = k as f64;
        if kf + 1.0 > lambda && k < m as u64 {
            let r = lambda / (kf + 1.0);
            let tail = term.upper() * r / (1.0 - r);
            if tail < CDF_TAIL_REL * acc.value() {
                acc.add_err(tail);
                break;
            }
        }
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_at_zero_is_exp_minus_lambda() {
        let v = poisson_pmf(1.0, 0).unwrap();
        assert_eq!(v.value, (-1.0f64).exp());
        let v = poisson_pmf(1.0, 2).unwrap();
        assert!((v.value - (-1.0f64).exp() / 2.0).abs() <= v.abs_err + 1e-17);
    }

    #[test]
    fn pmf_at_one_one_is_exact_inverse_e() {
        assert_eq!(poisson_pmf(1.0, 1).unwrap().value, 0.36787944117144233);
    }

    #[test]
    fn pmf_large_lambda_does_not_overflow() {
        let v = poisson_pmf(650.0, 700).unwrap();
        assert!(v.value.is_finite() && v.value > 0.0 && v.value < 0.02);
    }

    #[test]
    fn cdf_closed_case_iii() {
        let v = poisson_cdf(1.0, 2).unwrap();
        assert!((v.value - 2.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v.value - 0.9197).abs() < 5e-5);
    }

    #[test]
    fn cdf_negative_m_is_empty_sum() {
        assert_eq!(poisson_cdf(0.5, -1).unwrap().value, 0.0);
    }

    #[test]
    fn cdf_telescopes() {
        for &lambda in &[0.3, 4.0, 37.5, 600.0] {
            for m in [0i64, 3, 40, 620] {
                let a = poisson_cdf(lambda, m).unwrap();
                let b = poisson_cdf(lambda, m - 1).unwrap();
                let t = poisson_pmf(lambda, m as u64).unwrap();
                let gap = (a.value - b.value - t.value).abs();
                assert!(gap <= a.abs_err + b.abs_err + t.abs_err + 1e-16, "{lambda} {m}");
            }
        }
    }

    #[test]
    fn cdf_strictly_decreasing_in_lambda() {
        for m in [0i64, 2, 7, 30] {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let v = poisson_cdf(i as f64 * 0.25, m).unwrap().value;
                // Strict until the value saturates at 1 in f64.
                assert!(v < prev || (1.0 - prev < 1e-12 && v <= prev + 4.0 * f64::EPSILON), "m={m} i={i}");
                prev = v;
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(poisson_pmf(0.0, 1).is_err());
        assert!(poisson_pmf(f64::NAN, 1).is_err());
        assert!(poisson_cdf(-2.0, 1).is_err());
    }
}
