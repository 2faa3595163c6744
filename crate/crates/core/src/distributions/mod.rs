//! Error-bounded pmf, cdf and moment evaluation for the four lattice families.
//!
//! Every quantity that downstream modules consume is produced here, either as
//! a plain [`Prob`] (closed-form geometric masses) or as a [`BoundedValue`]
//! whose `abs_err` covers both series truncation and floating-point rounding.

mod bounded;
mod geometric;
mod lnfact;
mod poisson;
mod skellam;
mod sum;

pub use bounded::{BoundedValue, Prob, UNIT_ROUNDOFF};
pub use geometric::{geometric_pmf, geometric_pmf_bounded, sym_geometric_pmf, sym_geometric_pmf_bounded};
pub use lnfact::ln_factorial;
pub use poisson::{poisson_cdf, poisson_pmf};
pub use skellam::{skellam_pmf, skellam_pmf_with_tol};
pub use sum::CompensatedSum;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// One of the four infinitely divisible families, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Geometric { p: f64 },
    SymGeometric { p: f64 },
    Poisson { lambda: f64 },
    SymPoisson { lambda: f64 },
}

/// The family tag without a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Geometric,
    SymGeometric,
    Poisson,
    SymPoisson,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::Geometric,
        FamilyKind::SymGeometric,
        FamilyKind::Poisson,
        FamilyKind::SymPoisson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Geometric => "geometric",
            FamilyKind::SymGeometric => "sym-geometric",
            FamilyKind::Poisson => "poisson",
            FamilyKind::SymPoisson => "sym-poisson",
        }
    }

    /// Builds a validated family from a raw parameter.
    pub fn with_param(self, param: f64) -> Result<Family> {
        let family = match self {
            FamilyKind::Geometric => Family::Geometric { p: param },
            FamilyKind::SymGeometric => Family::SymGeometric { p: param },
            FamilyKind::Poisson => Family::Poisson { lambda: param },
            FamilyKind::SymPoisson => Family::SymPoisson { lambda: param },
        };
        family.validate()?;
        Ok(family)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(FamilyKind::Geometric),
            "sym-geometric" => Ok(FamilyKind::SymGeometric),
            "poisson" => Ok(FamilyKind::Poisson),
            "sym-poisson" => Ok(FamilyKind::SymPoisson),
            other => Err(Error::Unknown {
                what: "family",
                value: other.to_string(),
            }),
        }
    }
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Geometric { .. } => FamilyKind::Geometric,
            Family::SymGeometric { .. } => FamilyKind::SymGeometric,
            Family::Poisson { .. } => FamilyKind::Poisson,
            Family::SymPoisson { .. } => FamilyKind::SymPoisson,
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Family::Geometric { p } | Family::SymGeometric { p } => p,
            Family::Poisson { lambda } | Family::SymPoisson { lambda } => lambda,
        }
    }

    /// Checks that the parameter lies strictly inside its open domain.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Geometric { p } | Family::SymGeometric { p } => check_p(p),
            Family::Poisson { lambda } | Family::SymPoisson { lambda } => check_lambda(lambda),
        }
    }

    /// Smallest support point, `None` for the two-sided families.
    pub fn support_min(&self) -> Option<i64> {
        match self {
            Family::Geometric { .. } | Family::Poisson { .. } => Some(0),
            Family::SymGeometric { .. } | Family::SymPoisson { .. } => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.support_min().is_none()
    }

    /// Endpoints `(mean - sd, mean + sd)` of the one-sigma interval, each
    /// evaluated through the algebraic form with the fewest roundings.
    pub fn one_sigma_interval(&self) -> (f64, f64) {
        match *self {
            Family::Geometric { p } => {
                let sq = (1.0 - p).sqrt();
                ((1.0 - sq) / p - 1.0, (1.0 + sq) / p - 1.0)
            }
            Family::SymGeometric { p } => {
                let s = (2.0 * (1.0 - p)).sqrt() / p;
                (-s, s)
            }
            Family::Poisson { lambda } => {
                let s = lambda.sqrt();
                (lambda - s, lambda + s)
            }
            Family::SymPoisson { lambda } => {
                let s = (2.0 * lambda).sqrt();
                (-s, s)
            }
        }
    }

    /// Probability mass at `k`, with its error bound.
    pub fn pmf(&self, k: i64) -> Result<BoundedValue> {
        match *self {
            Family::Geometric { p } => {
                if k < 0 {
                    Ok(BoundedValue::exact(0.0))
                } else {
                    geometric_pmf_bounded(p, k as u64)
                }
            }
            Family::SymGeometric { p } => sym_geometric_pmf_bounded(p, k),
            Family::Poisson { lambda } => {
                if k < 0 {
                    Ok(BoundedValue::exact(0.0))
                } else {
                    poisson_pmf(lambda, k as u64)
                }
            }
            Family::SymPoisson { lambda } => skellam_pmf(lambda, k),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Geometric { p } => write!(f, "Geometric(p={p})"),
            Family::SymGeometric { p } => write!(f, "SymGeometric(p={p})"),
            Family::Poisson { lambda } => write!(f, "Poisson(lambda={lambda})"),
            Family::SymPoisson { lambda } => write!(f, "SymPoisson(lambda={lambda})"),
        }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("p must lie in (0, 1), got {p}")))
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("lambda must be finite and positive, got {lambda}")))
    }
}

/// Mean, variance and (for Poisson) third and fourth raw moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub third_raw: Option<f64>,
    pub fourth_raw: Option<f64>,
}

/// Closed-form moments of a family.
pub fn moments(family: Family) -> Result<MomentSet> {
    family.validate()?;
    let set = match family {
        Family::Geometric { p } => MomentSet {
            mean: 1.0 / p - 1.0,
            variance: (1.0 - p) / (p * p),
            third_raw: None,
            fourth_raw: None,
        },
        Family::SymGeometric { p } => MomentSet {
            mean: 0.0,
            variance: 2.0 * (1.0 - p) / (p * p),
            third_raw: None,
            fourth_raw: None,
        },
        Family::Poisson { lambda: l } => MomentSet {
            mean: l,
            variance: l,
            third_raw: Some(l * (1.0 + 3.0 * l + l * l)),
            fourth_raw: Some(l * (1.0 + 7.0 * l + 6.0 * l * l + l * l * l)),
        },
        Family::SymPoisson { lambda } => MomentSet {
            mean: 0.0,
            variance: 2.0 * lambda,
            third_raw: None,
            fourth_raw: None,
        },
    };
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_moments_at_one() {
        let m = moments(Family::Poisson { lambda: 1.0 }).unwrap();
        assert_eq!(m.third_raw, Some(5.0));
        assert_eq!(m.fourth_raw, Some(15.0));
    }

    #[test]
    fn geometric_three_quarters() {
        let m = moments(Family::Geometric { p: 0.75 }).unwrap();
        assert!((m.mean - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.variance - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_third_raw_at_two_matches_brute_force() {
        let m = moments(Family::Poisson { lambda: 2.0 }).unwrap();
        assert_eq!(m.third_raw, Some(22.0));
        let brute: f64 = (0..80u64)
            .map(|k| (k as f64).powi(3) * poisson_pmf(2.0, k).unwrap().value)
            .sum();
        assert!((brute - 22.0).abs() < 1e-10);
    }

    #[test]
    fn moments_match_brute_force_sums() {
        let families = [
            Family::Geometric { p: 0.3 },
            Family::Geometric { p: 0.8 },
            Family::SymGeometric { p: 0.4 },
            Family::Poisson { lambda: 0.7 },
            Family::Poisson { lambda: 3.5 },
            Family::SymPoisson { lambda: 1.25 },
        ];
        for fam in families {
            let m = moments(fam).unwrap();
            let (lo, hi) = if fam.is_symmetric() { (-400, 400) } else { (0, 400) };
            let raw = |r: i32| -> f64 {
                (lo..=hi)
                    .map(|k| (k as f64).powi(r) * fam.pmf(k).unwrap().value)
                    .sum()
            };
            let mean = raw(1);
            let var = raw(2) - mean * mean;
            assert!((mean - m.mean).abs() < 1e-10, "{fam} mean {mean} vs {}", m.mean);
            assert!((var - m.variance).abs() < 1e-10, "{fam} var {var} vs {}", m.variance);
            if let Some(t) = m.third_raw {
                assert!((raw(3) - t).abs() < 1e-10 * t.max(1.0));
            }
            if let Some(f) = m.fourth_raw {
                assert!((raw(4) - f).abs() < 1e-10 * f.max(1.0));
            }
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(FamilyKind::Geometric.with_param(1.0).is_err());
        assert!(FamilyKind::SymGeometric.with_param(0.0).is_err());
        assert!(FamilyKind::Poisson.with_param(-1.0).is_err());
        assert!(FamilyKind::SymPoisson.with_param(f64::NAN).is_err());
        assert!(FamilyKind::SymPoisson.with_param(f64::INFINITY).is_err());
    }

    #[test]
    fn family_kind_round_trips_through_str() {
        for kind in FamilyKind::ALL {
            assert_eq!(kind.as_str().parse::<FamilyKind>().unwrap(), kind);
        }
        assert!("binomial".parse::<FamilyKind>().is_err());
    }
}
