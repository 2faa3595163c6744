use super::bounded::{BoundedValue, Prob};
use super::check_p;
use crate::error::Result;

/// `P{X_p = k} = p (1 - p)^k`.
pub fn geometric_pmf(p: f64, k: u64) -> Result<Prob> {
    Ok(geometric_pmf_bounded(p, k)?.to_prob())
}

/// [`geometric_pmf`] with a rounding bound of `(2 log2(k) + k + 4)` ulps.
pub fn geometric_pmf_bounded(p: f64, k: u64) -> Result<BoundedValue> {
    check_p(p)?;
    let q = 1.0 - p;
    let value = p * powu(q, k);
    Ok(BoundedValue::with_rel_err(value, pow_ulps(k) + 2.0))
}

/// Symmetric geometric mass `(1 - q) q^|k| / (1 + q)`, `q = 1 - p`.
pub fn sym_geometric_pmf(p: f64, k: i64) -> Result<Prob> {
    Ok(sym_geometric_pmf_bounded(p, k)?.to_prob())
}

pub fn sym_geometric_pmf_bounded(p: f64, k: i64) -> Result<BoundedValue> {
    check_p(p)?;
    let q = 1.0 - p;
    let n = k.unsigned_abs();
    let value = p * powu(q, n) / (1.0 + q);
    Ok(BoundedValue::with_rel_err(value, pow_ulps(n) + 4.0))
}

fn powu(base: f64, exp: u64) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

// q = 1 - p carries one rounding, so q^k inherits k of them.
fn pow_ulps(k: u64) -> f64 {
    let k = k as f64;
    k + 2.0 * (k + 1.0).log2() + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_examples() {
        assert_eq!(geometric_pmf(0.75, 0).unwrap().value(), 0.75);
        assert_eq!(geometric_pmf(0.5, 3).unwrap().value(), 1.0 / 16.0);
        let partial: f64 = (0..=5).map(|k| geometric_pmf(0.25, k).unwrap().value()).sum();
        assert!((partial - (1.0 - 0.75f64.powi(6))).abs() < 1e-15);
        assert!((partial - 0.822021).abs() < 1e-6);
    }

    #[test]
    fn sym_geometric_examples() {
        let p = 3f64.sqrt() - 1.0;
        let v = sym_geometric_pmf(p, 0).unwrap().value();
        assert!((v - 3f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((sym_geometric_pmf(0.5, 1).unwrap().value() - 1.0 / 6.0).abs() < 1e-16);
        for k in 0..30 {
            assert_eq!(
                sym_geometric_pmf(0.37, k).unwrap(),
                sym_geometric_pmf(0.37, -k).unwrap()
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(geometric_pmf(0.0, 0).is_err());
        assert!(geometric_pmf(1.0, 0).is_err());
        assert!(sym_geometric_pmf(1.2, 0).is_err());
    }
}
