use serde::{Deserialize, Serialize};

use super::{ExactTag, Replay};
use crate::distributions::BoundedValue;
use crate::error::{domain, Result};
use crate::search::GridScanResult;

/// Bound on `|dP^0/dλ|` over `(1/2, 200)`: `2(2n - 1)` at `n = 20`.
pub const GLOBAL_LIPSCHITZ: f64 = 78.0;

/// `-2(2n - 1)`, a lower bound on `dP^0/dλ` on `((n-1)^2/2, n^2/2)`.
pub fn lipschitz_bound(n: u64) -> Result<f64> {
    if !(2..=20).contains(&n) {
        return Err(domain(format!("piece index must lie in [2, 20], got {n}")));
    }
    Ok(-2.0 * (2.0 * n as f64 - 1.0))
}

/// Rounds `x` down to `digits` decimals.
pub fn floor_decimals(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).floor() / scale
}

/// `grid_min - lipschitz * step`, rounded down to five decimals.
pub fn lipschitz_grid_bound(grid_min: f64, lipschitz: f64, step: f64) -> f64 {
    floor_decimals(grid_min - lipschitz * step, 5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzGridBound {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub points: u64,
    pub truncation_k: u64,
    pub grid_min: f64,
    pub lambda_star: f64,
    pub lipschitz: f64,
    pub penalty: f64,
    /// `grid_min - penalty` before rounding.
    pub raw_bound: f64,
    /// Certified lower bound on `P^0` over the covered interval.
    pub bound: f64,
    pub checks: Vec<Replay>,
}

fn is_reference_grid(grid: &GridScanResult) -> bool {
    grid.lo == 0.5 && grid.hi == 200.0 && grid.step == 0.0005 && grid.truncation_k == 250
}

/// Lower bound on `P^0_λ` over `(1/2, 200)` from a `Q` grid scan: every
/// `λ` lies at most one step right of a grid point, and `P^0` drops by at
/// most [`GLOBAL_LIPSCHITZ`] per unit. The truncated `Q` never exceeds
/// the full series, so the grid minimum is itself a lower bound.
pub fn certify_interval_0p5_200(grid: &GridScanResult) -> Result<LipschitzGridBound> {
    if grid.lo > 0.5 || grid.hi < 200.0 {
        return Err(domain(format!(
            "grid [{}, {}] does not cover [0.5, 200]",
            grid.lo, grid.hi
        )));
    }
    let penalty = GLOBAL_LIPSCHITZ * grid.step;
    let raw_bound = grid.min_value - penalty;
    let bound = lipschitz_grid_bound(grid.min_value, GLOBAL_LIPSCHITZ, grid.step);
    let mut checks = Vec::new();
    if is_reference_grid(grid) {
        checks.push(Replay::approx("grid minimum of Q", grid.min_value, 0.564565, 5e-7));
        checks.push(Replay::approx("Lipschitz step penalty", penalty, 0.039, 1e-15));
        checks.push(Replay::approx("certified bound", bound, 0.52556, 0.0));
    }
    checks.push(Replay::above(
        "certified bound exceeds the infimum",
        bound,
        ExactTag::BesselSeriesOverE.decimal(),
    ));
    Ok(LipschitzGridBound {
        lo: grid.lo,
        hi: grid.hi,
        step: grid.step,
        points: grid.points,
        truncation_k: grid.truncation_k,
        grid_min: grid.min_value,
        lambda_star: grid.lambda_star,
        lipschitz: GLOBAL_LIPSCHITZ,
        penalty,
        raw_bound,
        bound,
        checks,
    })
}

/// `-1 + λ + λ^3/2 + λ^2 e^λ` at `λ = 1/2`; `dP^0/dλ < 2e^{-2λ}` times this
/// on `(0, 1/2)`.
pub fn step1_derivative_bound() -> f64 {
    -1.0 + 0.5 + 0.5f64.powi(3) / 2.0 + 0.25 * 0.5f64.exp()
}

pub fn step1_derivative_check() -> BoundedValue {
    BoundedValue::with_rel_err(step1_derivative_bound(), 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::skellam_pmf;
    use crate::search::sym_poisson_l_max;

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_bound(20).unwrap(), -78.0);
        assert_eq!(lipschitz_bound(2).unwrap(), -6.0);
        assert!(lipschitz_bound(1).is_err());
        assert!(lipschitz_bound(21).is_err());
    }

    #[test]
    fn reference_arithmetic() {
        assert_eq!(lipschitz_grid_bound(0.564565, 78.0, 0.0005), 0.52556);
        assert!(0.564565 - 0.039 >= 0.52556);
    }

    fn p_open(lambda: f64, n: i64) -> f64 {
        let mut s = skellam_pmf(lambda, 0).unwrap().value;
        for l in 1..n {
            s += 2.0 * skellam_pmf(lambda, l).unwrap().value;
        }
        s
    }

    #[test]
    fn finite_difference_slopes_respect_the_bound() {
        let h = 1e-5;
        for n in 2..=6u64 {
            let lo = ((n - 1) * (n - 1)) as f64 / 2.0;
            let hi = (n * n) as f64 / 2.0;
            let bound = lipschitz_bound(n).unwrap();
            for i in 1..20 {
                let x = lo + (hi - lo) * i as f64 / 20.0;
                assert_eq!(sym_poisson_l_max(x) as u64, n - 1);
                let slope = (p_open(x + h, n as i64) - p_open(x - h, n as i64)) / (2.0 * h);
                assert!(slope >= bound - 1e-3, "n={n} x={x} slope={slope}");
            }
        }
    }

    #[test]
    fn step1_value() {
        let v = step1_derivative_check();
        assert!(v.value < 0.0);
        assert!((v.value - -0.0253).abs() < 5e-5);
    }
}
