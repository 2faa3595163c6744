use serde::{Deserialize, Serialize};

use super::berry_esseen::{
    be_threshold_check, skellam_abs_third_moment, skellam_be_lower, ThresholdCheck, C_DEFAULT,
};
use super::lipschitz::{certify_interval_0p5_200, step1_derivative_bound, LipschitzGridBound};
use super::normal::normal_cdf;
use super::pieces::{
    geometric_head_piece, poisson_case_table, sym_geometric_head_piece, sym_poisson_step1_piece,
    PieceReport,
};
use super::{ExactConst, ExactTag, Replay, QUOTE_TOL};
use crate::concentration::{concentration_pinned, Mode, PinnedParam};
use crate::distributions::{skellam_pmf, Family, FamilyKind};
use crate::error::Result;
use crate::search::{
    breakpoint, g2_left_endpoint, geometric_breakpoint, geometric_piece_inf, grid_scan_q,
    scan_g1, scan_g2, sym_geometric_breakpoint, sym_geometric_piece_inf, sym_poisson_breakpoint,
    BreakpointKind, GridScanResult, ScanResult,
};

/// Infimum of a sequence of piece infima `a_n` over a probed index range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceBound {
    pub label: String,
    pub formula: String,
    pub n_from: u64,
    pub n_to: u64,
    pub argmin: u64,
    pub min_value: f64,
    pub increasing: bool,
    pub checks: Vec<Replay>,
}

/// `g1 - g2` lower bound on a middle segment from the two breakpoint scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentBound {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub g1_scan: ScanResult,
    pub g2_scan: ScanResult,
    pub g2_left_endpoint: f64,
    pub lower_bound: f64,
    pub checks: Vec<Replay>,
}

/// Sign of the derivative bound on `(0, 1/2)` plus a numerical slope probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub label: String,
    pub bound_value: f64,
    pub probes: usize,
    pub max_slope: f64,
    pub checks: Vec<Replay>,
}

/// Berry–Esseen lower bound for the symmetric Poisson law at large rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkellamTail {
    pub lambda_from: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub leading_term: f64,
    pub lower_bound: f64,
    pub checks: Vec<Replay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Piece {
        /// The piece whose infimum is the certified constant.
        witness: bool,
        report: PieceReport,
    },
    Sequence(SequenceBound),
    Segment(SegmentBound),
    Threshold(ThresholdCheck),
    Derivative(DerivativeCheck),
    Lipschitz(LipschitzGridBound),
    SkellamTail(SkellamTail),
}

impl Evidence {
    pub fn label(&self) -> String {
        match self {
            Evidence::Piece { report, .. } => format!("piece {}", report.case_id),
            Evidence::Sequence(s) => s.label.clone(),
            Evidence::Segment(s) => s.label.clone(),
            Evidence::Threshold(t) => format!("Berry–Esseen tail, lambda >= {}", t.threshold),
            Evidence::Derivative(d) => d.label.clone(),
            Evidence::Lipschitz(l) => format!("Lipschitz grid on [{}, {}]", l.lo, l.hi),
            Evidence::SkellamTail(s) => format!("Berry–Esseen tail, lambda >= {}", s.lambda_from),
        }
    }

    pub fn is_witness(&self) -> bool {
        matches!(self, Evidence::Piece { witness: true, .. })
    }

    /// Lower bound this item contributes on its region; `None` for the
    /// witness and for purely supporting items.
    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            Evidence::Piece { witness: true, .. } => None,
            Evidence::Piece { report, .. } => Some(report.piece_inf),
            Evidence::Sequence(s) => Some(s.min_value),
            Evidence::Segment(s) => Some(s.lower_bound),
            Evidence::Threshold(t) => Some(t.lower_bound),
            Evidence::Derivative(_) => None,
            Evidence::Lipschitz(l) => Some(l.bound),
            Evidence::SkellamTail(s) => Some(s.lower_bound),
        }
    }

    pub fn checks(&self) -> &[Replay] {
        match self {
            Evidence::Piece { report, .. } => &report.checks,
            Evidence::Sequence(s) => &s.checks,
            Evidence::Segment(s) => &s.checks,
            Evidence::Threshold(t) => &t.checks,
            Evidence::Derivative(d) => &d.checks,
            Evidence::Lipschitz(l) => &l.checks,
            Evidence::SkellamTail(s) => &s.checks,
        }
    }

    /// Internal consistency: piece probes and the threshold verdict.
    pub fn self_consistent(&self) -> bool {
        match self {
            Evidence::Piece { report, .. } => report.probe.ok(),
            Evidence::Sequence(s) => s.increasing,
            Evidence::Threshold(t) => t.passed,
            Evidence::Derivative(d) => d.bound_value < 0.0 && d.max_slope < 0.0,
            _ => true,
        }
    }
}

/// The infimum claim without its evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfimumClaim {
    pub family: FamilyKind,
    pub mode: Mode,
    pub inf_exact: ExactConst,
    pub attained: bool,
    pub attained_at: Option<f64>,
}

/// Closed-mode infima are one-sided limits; open-mode ones are attained.
pub fn infimum_claim(kind: FamilyKind, mode: Mode) -> InfimumClaim {
    let (tag, at) = match kind {
        FamilyKind::Geometric => (ExactTag::ThreeQuarters, 0.75),
        FamilyKind::SymGeometric => (ExactTag::Sqrt3Over3, 3f64.sqrt() - 1.0),
        FamilyKind::Poisson => match mode {
            Mode::Closed => (ExactTag::ThreeHalvesOverE, 1.0),
            Mode::Open => (ExactTag::OneOverE, 1.0),
        },
        FamilyKind::SymPoisson => (ExactTag::BesselSeriesOverE, 0.5),
    };
    let attained = mode == Mode::Open;
    InfimumClaim {
        family: kind,
        mode,
        inf_exact: tag.into(),
        attained,
        attained_at: attained.then_some(at),
    }
}

/// The parameter at which the open-mode infimum is attained, with its
/// integer window endpoints pinned.
fn witness_param(kind: FamilyKind) -> Result<PinnedParam> {
    match kind {
        FamilyKind::Geometric => geometric_breakpoint(1),
        FamilyKind::SymGeometric => sym_geometric_breakpoint(1),
        FamilyKind::Poisson => PinnedParam::new(Family::Poisson { lambda: 1.0 }, Some(0), Some(2)),
        FamilyKind::SymPoisson => sym_poisson_breakpoint(1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: FamilyKind,
    pub mode: Mode,
    pub inf_exact: ExactConst,
    pub attained: bool,
    pub attained_at: Option<f64>,
    pub evidence: Vec<Evidence>,
}

/// One dominance comparison: an evidence lower bound against the infimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceMargin {
    pub label: String,
    pub lower_bound: f64,
    pub margin: f64,
}

impl Certificate {
    pub fn inf_decimal(&self) -> f64 {
        self.inf_exact.decimal
    }

    pub fn replays(&self) -> impl Iterator<Item = &Replay> {
        self.evidence.iter().flat_map(|e| e.checks())
    }

    pub fn failed_replays(&self) -> Vec<&Replay> {
        self.replays().filter(|r| !r.passed).collect()
    }

    pub fn dominance(&self) -> Vec<DominanceMargin> {
        self.evidence
            .iter()
            .filter_map(|e| {
                e.lower_bound().map(|b| DominanceMargin {
                    label: e.label(),
                    lower_bound: b,
                    margin: b - self.inf_decimal(),
                })
            })
            .collect()
    }

    /// Exactly one witness whose infimum is the constant; if attained, the
    /// concentration at `attained_at` equals it to 1e-12.
    pub fn witness_ok(&self) -> Result<bool> {
        let witnesses: Vec<&PieceReport> = self
            .evidence
            .iter()
            .filter_map(|e| match e {
                Evidence::Piece { witness: true, report } => Some(report),
                _ => None,
            })
            .collect();
        if witnesses.len() != 1 || (witnesses[0].piece_inf - self.inf_decimal()).abs() > 1e-12 {
            return Ok(false);
        }
        if !self.attained {
            return Ok(self.attained_at.is_none());
        }
        let Some(at) = self.attained_at else {
            return Ok(false);
        };
        let param = witness_param(self.family)?;
        if (param.family.param() - at).abs() > 1e-15 {
            return Ok(false);
        }
        let v = concentration_pinned(&param, self.mode)?.value;
        Ok((v - self.inf_decimal()).abs() <= 1e-12)
    }

    /// Dominance, witness and internal consistency. Replays of quoted
    /// decimals are reported separately by [`Certificate::failed_replays`].
    pub fn holds(&self) -> Result<bool> {
        Ok(self.witness_ok()?
            && self.dominance().iter().all(|d| d.margin > 0.0)
            && self.evidence.iter().all(Evidence::self_consistent))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Berry–Esseen constant.
    pub c: f64,
    /// Precomputed `Q` grid for the symmetric Poisson certificate; the
    /// reference grid is scanned when absent.
    pub grid: Option<GridScanResult>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            c: C_DEFAULT,
            grid: None,
        }
    }
}

pub fn infimum_certificate(kind: FamilyKind, mode: Mode) -> Result<Certificate> {
    infimum_certificate_with(kind, mode, &CertifyOptions::default())
}

pub fn infimum_certificate_with(
    kind: FamilyKind,
    mode: Mode,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let claim = infimum_claim(kind, mode);
    let evidence = match kind {
        FamilyKind::Geometric => geometric_evidence(mode)?,
        FamilyKind::SymGeometric => sym_geometric_evidence(mode)?,
        FamilyKind::Poisson => poisson_evidence(mode, opts.c)?,
        FamilyKind::SymPoisson => sym_poisson_evidence(mode, opts)?,
    };
    Ok(Certificate {
        family: claim.family,
        mode,
        inf_exact: claim.inf_exact,
        attained: claim.attained,
        attained_at: claim.attained_at,
        evidence,
    })
}

const SEQUENCE_END: u64 = 10_000;

fn sequence_bound(
    label: &str,
    formula: &str,
    f: impl Fn(u64) -> Result<f64>,
) -> Result<SequenceBound> {
    let mut argmin = 2;
    let mut min_value = f64::INFINITY;
    let mut increasing = true;
    let mut prev = f64::NEG_INFINITY;
    for n in 2..=SEQUENCE_END {
        let a = f(n)?;
        increasing &= a > prev;
        prev = a;
        if a < min_value {
            min_value = a;
            argmin = n;
        }
    }
    Ok(SequenceBound {
        label: label.to_string(),
        formula: formula.to_string(),
        n_from: 2,
        n_to: SEQUENCE_END,
        argmin,
        min_value,
        increasing,
        checks: Vec::new(),
    })
}

fn geometric_evidence(mode: Mode) -> Result<Vec<Evidence>> {
    let head = geometric_head_piece(mode)?;
    let mut seq = sequence_bound(
        "piece infima a_n, n >= 2",
        "a_n = 1 - (n/(n+1))^{2n}",
        geometric_piece_inf,
    )?;
    seq.checks = vec![
        Replay::approx("a_2", seq.min_value, 0.80247, QUOTE_TOL),
        Replay::above("min a_n exceeds 3/4", seq.min_value, 0.75),
    ];
    Ok(vec![
        Evidence::Piece {
            witness: true,
            report: head,
        },
        Evidence::Sequence(seq),
    ])
}

fn sym_geometric_evidence(mode: Mode) -> Result<Vec<Evidence>> {
    let head = sym_geometric_head_piece(mode)?;
    let mut seq = sequence_bound(
        "piece infima a_n, n >= 2",
        "a_n = 1 - (1 - 2/(1+s))^n / (1 - 1/(1+s)), s = sqrt(2n^2+1)",
        sym_geometric_piece_inf,
    )?;
    let quoted = 1.0 - 4.0 / 3.0 * (-(2f64.sqrt())).exp();
    let mut tail_min = f64::INFINITY;
    for n in 3..=SEQUENCE_END {
        tail_min = tail_min.min(sym_geometric_piece_inf(n)?);
    }
    seq.checks = vec![
        Replay::approx("1 - (4/3)e^{-sqrt 2}", quoted, 0.67584, QUOTE_TOL),
        Replay::above("a_n > 1 - (4/3)e^{-sqrt 2} for n >= 2", seq.min_value, quoted),
        Replay::above("a_n > 1 - (4/3)e^{-sqrt 2} for n >= 3", tail_min, quoted),
        Replay::approx("a_2", seq.min_value, 2.0 / 3.0, 1e-15),
        Replay::above("min a_n exceeds sqrt(3)/3", seq.min_value, 3f64.sqrt() / 3.0),
    ];
    Ok(vec![
        Evidence::Piece {
            witness: true,
            report: head,
        },
        Evidence::Sequence(seq),
    ])
}

fn segment_bound(mode: Mode) -> Result<SegmentBound> {
    let (g1_hi, g2_hi, hi) = match mode {
        Mode::Closed => (629, 579, 604.0),
        Mode::Open => (119, 97, 108.0),
    };
    let g1 = scan_g1(8, g1_hi)?;
    let g2 = scan_g2(3, g2_hi)?;
    let left = g2_left_endpoint().value;
    let lower_bound = g1.extremum - g2.extremum.max(left);
    let lo = breakpoint(7, BreakpointKind::Upper)?.lambda;
    let inf = infimum_claim(FamilyKind::Poisson, mode).inf_exact.decimal;
    let mut checks = Vec::new();
    if mode == Mode::Closed {
        checks.push(Replay::approx("g1 scan minimum", g1.extremum, 0.793450747058153, 1e-10));
        checks.push(Replay::approx("g2 scan maximum", g2.extremum, 0.225065994481669, 1e-10));
    }
    checks.extend([
        Replay::within("g1 scan minimum", g1.extremum, 0.79345, 0.79346),
        Replay::approx("g1 scan argmin", g1.arg as f64, 8.0, 0.0),
        Replay::within("g2 scan maximum", g2.extremum, 0.22506, 0.22507),
        Replay::approx("g2 scan argmax", g2.arg as f64, 3.0, 0.0),
        Replay::approx("g2 at the segment start", left, 0.14184, QUOTE_TOL),
        Replay::approx("segment bound 0.79345 - 0.22507", lower_bound, 0.56838, QUOTE_TOL),
        Replay::above("segment bound exceeds the infimum", lower_bound, inf),
    ]);
    Ok(SegmentBound {
        label: format!("breakpoint scans on [{lo}, {hi})"),
        lo,
        hi,
        g1_scan: g1,
        g2_scan: g2,
        g2_left_endpoint: left,
        lower_bound,
        checks,
    })
}

fn poisson_evidence(mode: Mode, c: f64) -> Result<Vec<Evidence>> {
    let witness_case = match mode {
        Mode::Closed => "(iv)",
        Mode::Open => "(iii)",
    };
    let mut evidence: Vec<Evidence> = poisson_case_table(mode)?
        .into_iter()
        .map(|report| Evidence::Piece {
            witness: report.case_id == witness_case,
            report,
        })
        .collect();
    evidence.push(Evidence::Segment(segment_bound(mode)?));
    evidence.push(Evidence::Threshold(be_threshold_check(mode, c)?));
    Ok(evidence)
}

const SLOPE_PROBES: usize = 100;

fn step1_derivative_evidence() -> Result<DerivativeCheck> {
    let bound_value = step1_derivative_bound();
    let h = 1e-5;
    let mut max_slope = f64::NEG_INFINITY;
    for i in 1..=SLOPE_PROBES {
        let x = 0.5 * i as f64 / (SLOPE_PROBES + 1) as f64;
        let slope = (skellam_pmf(x + h, 0)?.value - skellam_pmf(x - h, 0)?.value) / (2.0 * h);
        max_slope = max_slope.max(slope);
    }
    Ok(DerivativeCheck {
        label: "derivative of P^0 on (0, 1/2)".to_string(),
        bound_value,
        probes: SLOPE_PROBES,
        max_slope,
        checks: vec![
            Replay::approx("-1 + 0.5 + 0.5^3/2 + 0.5^2 e^0.5", bound_value, -0.0253, QUOTE_TOL),
            Replay::below("derivative bound is negative", bound_value, 0.0),
            Replay::below("largest probed slope is negative", max_slope, 0.0),
        ],
    })
}

/// The penalty `2Cρ/((2λ/⌊λ⌋)^{3/2} √⌊λ⌋)` with `ρ = 5.31λ/⌊λ⌋` equals
/// `2C·5.31/(2^{3/2}√λ)`, so the bound is smallest at `λ = 200`.
fn skellam_tail_evidence(c: f64) -> Result<SkellamTail> {
    let lambda = 200.0;
    let lower_bound = skellam_be_lower(lambda, c)?.value;
    let leading_term = normal_cdf(1.0)?.value - normal_cdf(-1.0)?.value;
    // Worst case of λ/⌊λ⌋ on [200, ∞) is just below 201/200.
    let mu_max = 201.0 / 200.0;
    let inf = ExactTag::BesselSeriesOverE.decimal();
    Ok(SkellamTail {
        lambda_from: lambda,
        c,
        leading_term,
        lower_bound,
        checks: vec![
            Replay::above("Phi(1) - Phi(-1)", leading_term, 0.6826),
            Replay::below(
                "E|Y|^3 bound at lambda/floor(lambda) = 201/200, over 5.31 lambda/floor(lambda)",
                skellam_abs_third_moment(mu_max) / mu_max,
                5.31,
            ),
            Replay::below("2 sqrt(7 + 6/200)", 2.0 * (7.0f64 + 6.0 / 200.0).sqrt(), 5.31),
            Replay::above("lower bound at lambda = 200", lower_bound, 0.4793),
            Replay::above("lower bound exceeds the infimum", lower_bound, inf),
        ],
    })
}

fn sym_poisson_evidence(mode: Mode, opts: &CertifyOptions) -> Result<Vec<Evidence>> {
    let grid = match opts.grid {
        Some(g) => g,
        None => grid_scan_q(0.5, 200.0, 0.0005, 250)?,
    };
    Ok(vec![
        Evidence::Piece {
            witness: true,
            report: sym_poisson_step1_piece(mode)?,
        },
        Evidence::Derivative(step1_derivative_evidence()?),
        Evidence::Lipschitz(certify_interval_0p5_200(&grid)?),
        Evidence::SkellamTail(skellam_tail_evidence(opts.c)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claims() {
        let c = infimum_claim(FamilyKind::Geometric, Mode::Closed);
        assert_eq!(c.inf_exact.decimal, 0.75);
        assert!(!c.attained && c.attained_at.is_none());
        let c = infimum_claim(FamilyKind::SymPoisson, Mode::Open);
        assert_eq!(c.attained_at, Some(0.5));
        assert!((c.inf_exact.decimal - 0.46576).abs() < 5e-6);
    }

    #[test]
    fn geometric_certificates() {
        for mode in Mode::BOTH {
            let cert = infimum_certificate(FamilyKind::Geometric, mode).unwrap();
            assert!(cert.holds().unwrap());
            assert!(cert.failed_replays().is_empty());
        }
    }

    #[test]
    fn sym_geometric_certificates_record_the_n2_gap() {
        for mode in Mode::BOTH {
            let cert = infimum_certificate(FamilyKind::SymGeometric, mode).unwrap();
            assert!(cert.holds().unwrap());
            let failed = cert.failed_replays();
            assert_eq!(failed.len(), 1);
            assert!(failed[0].label.contains("n >= 2"));
        }
    }

    #[test]
    fn poisson_closed_certificate() {
        let cert = infimum_certificate(FamilyKind::Poisson, Mode::Closed).unwrap();
        assert!(cert.holds().unwrap());
        let failed = cert.failed_replays();
        assert!(failed.is_empty(), "{failed:?}");
        let worst = cert
            .dominance()
            .iter()
            .map(|d| d.margin)
            .fold(f64::INFINITY, f64::min);
        assert!(worst > 0.0);
    }

    #[test]
    fn poisson_open_certificate_holds_with_failed_quotes() {
        let cert = infimum_certificate(FamilyKind::Poisson, Mode::Open).unwrap();
        assert!(cert.holds().unwrap());
        let failed: Vec<_> = cert.failed_replays().iter().map(|r| r.label.clone()).collect();
        assert!(failed.iter().any(|l| l.contains("K2 lower")));
        assert!(failed.iter().any(|l| l.contains("K4 upper")));
    }

    #[test]
    fn sym_poisson_with_coarse_grid() {
        let grid = grid_scan_q(0.5, 200.0, 0.05, 250).unwrap();
        let opts = CertifyOptions {
            grid: Some(grid),
            ..CertifyOptions::default()
        };
        let cert = infimum_certificate_with(FamilyKind::SymPoisson, Mode::Open, &opts).unwrap();
        assert!(cert.witness_ok().unwrap());
        // A 0.05 step costs 3.9 in the Lipschitz penalty: no certificate.
        assert!(!cert.holds().unwrap());
    }
}
