use super::bounded::{BoundedValue, UNIT_ROUNDOFF};
use super::check_lambda;
use super::lnfact::{ln_factorial, ln_factorial_magnitude};
use super::poisson::exp_bounded;
use crate::error::{domain, Result};

/// Series terms smaller than this fraction of the partial sum may end the
/// summation in either direction.
const REL_STOP: f64 = 8.470329472543003e-22; // 2^-70

/// Default absolute tolerance on the truncated series tail.
const DEFAULT_TAIL_TOL: f64 = 1e-20;

/// `P{N - N' = l}` for independent `N, N' ~ Poisson(lambda)`:
/// `e^{-2 lambda} sum_k lambda^{2k+|l|} / (k! (k+|l|)!)`.
pub fn skellam_pmf(lambda: f64, l: i64) -> Result<BoundedValue> {
    skellam_pmf_with_tol(lambda, l, DEFAULT_TAIL_TOL)
}

/// [`skellam_pmf`] with an explicit bound on the truncated tail.
///
/// The series is summed outward from its largest term, with every term
/// expressed relative to that peak so that neither `e^{-2 lambda}` nor the
/// power series overflows. In each direction the summation stops once the
/// current term is below `2^-70` of the partial sum and the geometric tail
/// bound (ratios are monotone away from the peak) is below `tol`.
pub fn skellam_pmf_with_tol(lambda: f64, l: i64, tol: f64) -> Result<BoundedValue> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(domain(format!("tail tolerance must be positive, got {tol}")));
    }
    let l = l.unsigned_abs();
    let lf = l as f64;
    let lam2 = lambda * lambda;
    let ln_lambda = lambda.ln();

    // Ratio t_{k+1}/t_k = lambda^2 / ((k+1)(k+1+l)) crosses 1 near this k.
    let peak = (((lf * lf + 4.0 * lam2).sqrt() - lf) / 2.0 - 1.0).max(0.0).floor() as u64;
    let pf = peak as f64;
    let log_peak =
        -2.0 * lambda + (2.0 * pf + lf) * ln_lambda - ln_factorial(peak) - ln_factorial(peak + l);
    let log_mag = 2.0 * lambda
        + (2.0 * pf + lf) * ln_lambda.abs()
        + ln_factorial_magnitude(peak)
        + ln_factorial_magnitude(peak + l);
    let scale = exp_bounded(log_peak, 8.0 * UNIT_ROUNDOFF * log_mag);
    let tail_tol_rel = if scale.value > 0.0 { tol / scale.value } else { f64::INFINITY };

    let mut sum = 1.0;
    let mut rounding = 0.0;
    let mut tail = 0.0;

    // Upward from the peak.
    let mut term = 1.0;
    let mut k = peak;
    loop {
        let kf = k as f64;
        let r = lam2 / ((kf + 1.0) * (kf + 1.0 + lf));
        if r < 1.0 && term < REL_STOP * sum {
            let bound = term * r / (1.0 - r);
            if bound < tail_tol_rel {
                tail += bound;
                break;
            }
        }
        term *= r;
        k += 1;
        sum += term;
        rounding += term * 4.0 * (k - peak) as f64;
    }

    // Downward towards k = 0.
    let mut term = 1.0;
    let mut k = peak;
    while k > 0 {
        let kf = k as f64;
        let r = kf * (kf + lf) / lam2;
        if r < 1.0 && term < REL_STOP * sum {
            let bound = term * r / (1.0 - r);
            if bound < tail_tol_rel {
                tail += bound;
                break;
            }
        }
        term *= r;
        k -= 1;
        sum += term;
        rounding += term * 4.0 * (peak - k) as f64;
    }

    let series_err = rounding * UNIT_ROUNDOFF + 2.0 * UNIT_ROUNDOFF * sum + tail;
    let value = scale.value * sum;
    let abs_err = scale.abs_err * (sum + series_err) + scale.value * series_err + value * UNIT_ROUNDOFF;
    Ok(BoundedValue::new(value, abs_err))
}

#[cfg(test)]
mod tests {
    use super::super::poisson::poisson_pmf;
    use super::*;

    fn convolution(lambda: f64, l: i64) -> f64 {
        let l = l.unsigned_abs();
        (0..400u64)
            .map(|j| poisson_pmf(lambda, l + j).unwrap().value * poisson_pmf(lambda, j).unwrap().value)
            .sum()
    }

    #[test]
    fn half_lambda_at_zero_is_bessel_constant() {
        let v = skellam_pmf(0.5, 0).unwrap();
        let series: f64 = (0..30)
            .map(|k| {
                let f: f64 = (1..=k).map(|i| i as f64).product();
                1.0 / (4f64.powi(k) * f * f)
            })
            .sum();
        let expected = (-1.0f64).exp() * series;
        assert!((v.value - expected).abs() <= v.abs_err + 1e-16);
        assert!((v.value - 0.46576).abs() < 5e-6);
    }

    #[test]
    fn lambda_one_l_one_matches_convolution() {
        let v = skellam_pmf(1.0, 1).unwrap();
        let c = convolution(1.0, 1);
        assert!((v.value - c).abs() < 1e-15);
        assert!((v.value - 0.215269).abs() < 1e-6);
    }

    #[test]
    fn symmetric_in_l() {
        for l in 0..20 {
            assert_eq!(skellam_pmf(3.7, l).unwrap(), skellam_pmf(3.7, -l).unwrap());
        }
    }

    #[test]
    fn large_lambda_is_finite_and_normalized() {
        let lambda = 650.0;
        let total: f64 = (-400..=400).map(|l| skellam_pmf(lambda, l).unwrap().value).sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(skellam_pmf(0.0, 0).is_err());
        assert!(skellam_pmf_with_tol(1.0, 0, 0.0).is_err());
    }
}
