//! Certified bounds and infimum certificates.
//!
//! Every numeric comparison against a quoted constant is stored as a
//! [`Replay`] holding both sides, so a certificate can be audited without
//! re-deriving anything.

mod berry_esseen;
mod certificate;
mod lipschitz;
mod normal;
mod pieces;

pub use berry_esseen::{
    be_band, be_threshold_check, rho_poisson1, skellam_abs_third_moment, skellam_be_lower,
    skellam_fourth_moment, skellam_rho_bound, BeBand, BeChain, ChainBand, ThresholdCheck,
    C_CITED, C_DEFAULT,
};
pub use certificate::{
    infimum_certificate, infimum_certificate_with, infimum_claim, Certificate, CertifyOptions,
    DerivativeCheck, Evidence, InfimumClaim, SegmentBound, SequenceBound, SkellamTail,
};
pub use lipschitz::{
    certify_interval_0p5_200, floor_decimals, lipschitz_bound, lipschitz_grid_bound,
    step1_derivative_bound, step1_derivative_check, LipschitzGridBound, GLOBAL_LIPSCHITZ,
};
pub use normal::{normal_cdf, normal_pdf};
pub use pieces::{
    geometric_head_piece, poisson_case_table, poisson_window, sym_geometric_head_piece,
    sym_poisson_step1_piece, InfLocation, Interval, Monotonicity, PieceReport, ProbeSummary,
};

use serde::{Deserialize, Serialize};
use std::fmt;

/// How a computed number is compared with a quoted one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "kebab-case")]
pub enum Relation {
    /// `|computed - quoted| <= tol`.
    Approx { tol: f64 },
    /// `computed > quoted`.
    Above,
    /// `computed < quoted`.
    Below,
    /// `lo < computed < hi`, with `quoted = lo`.
    Within { hi: f64 },
}

/// One recorded comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub label: String,
    pub computed: f64,
    pub quoted: f64,
    #[serde(flatten)]
    pub relation: Relation,
    /// Signed slack; positive when the comparison holds.
    pub margin: f64,
    pub passed: bool,
}

impl Replay {
    pub fn new(label: impl Into<String>, computed: f64, quoted: f64, relation: Relation) -> Self {
        let margin = match relation {
            Relation::Approx { tol } => tol - (computed - quoted).abs(),
            Relation::Above => computed - quoted,
            Relation::Below => quoted - computed,
            Relation::Within { hi } => (computed - quoted).min(hi - computed),
        };
        Replay {
            label: label.into(),
            computed,
            quoted,
            relation,
            margin,
            passed: match relation {
                Relation::Approx { .. } => margin >= 0.0,
                _ => margin > 0.0,
            },
        }
    }

    pub fn approx(label: impl Into<String>, computed: f64, quoted: f64, tol: f64) -> Self {
        Self::new(label, computed, quoted, Relation::Approx { tol })
    }

    pub fn above(label: impl Into<String>, computed: f64, quoted: f64) -> Self {
        Self::new(label, computed, quoted, Relation::Above)
    }

    pub fn below(label: impl Into<String>, computed: f64, quoted: f64) -> Self {
        Self::new(label, computed, quoted, Relation::Below)
    }

    pub fn within(label: impl Into<String>, computed: f64, lo: f64, hi: f64) -> Self {
        Self::new(label, computed, lo, Relation::Within { hi })
    }
}

impl fmt::Display for Replay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Approx { tol } => format!("≈ {} (tol {tol:e})", self.quoted),
            Relation::Above => format!("> {}", self.quoted),
            Relation::Below => format!("< {}", self.quoted),
            Relation::Within { hi } => format!("in ({}, {hi})", self.quoted),
        };
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{verdict}  {}: {:.9} {rel}", self.label, self.computed)
    }
}

/// Tolerance for "≈" comparisons against values printed to five decimals.
pub const QUOTE_TOL: f64 = 5e-5;

/// The five infima in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExactTag {
    ThreeQuarters,
    Sqrt3Over3,
    ThreeHalvesOverE,
    OneOverE,
    BesselSeriesOverE,
}

impl ExactTag {
    pub fn decimal(self) -> f64 {
        match self {
            ExactTag::ThreeQuarters => 0.75,
            ExactTag::Sqrt3Over3 => 3f64.sqrt() / 3.0,
            ExactTag::ThreeHalvesOverE => 1.5 * (-1f64).exp(),
            ExactTag::OneOverE => (-1f64).exp(),
            ExactTag::BesselSeriesOverE => bessel_series_over_e(),
        }
    }

    pub fn exact_form(self) -> &'static str {
        match self {
            ExactTag::ThreeQuarters => "3/4",
            ExactTag::Sqrt3Over3 => "sqrt(3)/3",
            ExactTag::ThreeHalvesOverE => "1.5/e",
            ExactTag::OneOverE => "1/e",
            ExactTag::BesselSeriesOverE => "e^-1 * sum_k 1/(4^k (k!)^2)",
        }
    }
}

/// `e^{-1} Σ_{k≥0} 1/(4^k (k!)^2)`, i.e. `e^{-1} I_0(1)`.
fn bessel_series_over_e() -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    while term > f64::EPSILON * sum * 1e-3 {
        term /= 4.0 * k * k;
        sum += term;
        k += 1.0;
    }
    sum * (-1f64).exp()
}

/// A tagged constant together with its decimal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactConst {
    pub tag: ExactTag,
    pub decimal: f64,
}

impl From<ExactTag> for ExactConst {
    fn from(tag: ExactTag) -> Self {
        ExactConst {
            tag,
            decimal: tag.decimal(),
        }
    }
}

impl fmt::Display for ExactConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.tag.exact_form(), self.decimal)
    }
}
