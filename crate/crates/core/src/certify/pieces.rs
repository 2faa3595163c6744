use serde::{Deserialize, Serialize};

use super::{Replay, QUOTE_TOL};
use crate::concentration::{concentration, Mode};
use crate::distributions::{skellam_pmf, Family};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x, true, true)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `count` points strictly inside, evenly spaced; the point itself for
    /// a degenerate interval.
    pub fn probe_points(&self, count: usize) -> Vec<f64> {
        if self.is_point() {
            return vec![self.lo];
        }
        (1..=count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (count + 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", content = "at", rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    /// Increasing up to the stationary point, decreasing after it.
    UnimodalAt(f64),
    /// Single-point piece.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "where", content = "at", rename_all = "kebab-case")]
pub enum InfLocation {
    Left,
    Right,
    Interior(f64),
    /// Approached at an excluded endpoint.
    Limit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub points: usize,
    pub min: f64,
    pub max: f64,
    /// Adjacent probe values are ordered as the monotonicity claims.
    pub shape_holds: bool,
    /// The formula agrees with the direct concentration at every probe.
    pub formula_matches: bool,
    /// `piece_inf <= every probe value + 1e-12`.
    pub inf_below_probes: bool,
}

impl ProbeSummary {
    pub fn ok(&self) -> bool {
        self.shape_holds && self.formula_matches && self.inf_below_probes
    }
}

/// One interval of a case analysis with its closed-form formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub case_id: String,
    pub mode: Mode,
    pub interval: Interval,
    pub formula: String,
    pub monotonicity: Monotonicity,
    pub piece_inf: f64,
    pub inf_location: InfLocation,
    pub probe: ProbeSummary,
    pub checks: Vec<Replay>,
}

const PROBES: usize = 100;
const PROBE_TOL: f64 = 1e-12;

struct PieceSpec<'a> {
    case_id: &'a str,
    mode: Mode,
    interval: Interval,
    formula: &'a str,
    monotonicity: Monotonicity,
}

fn build_piece(
    spec: PieceSpec<'_>,
    f: &dyn Fn(f64) -> f64,
    direct: &dyn Fn(f64) -> Result<f64>,
    quote: impl FnOnce(f64) -> Option<Replay>,
) -> Result<PieceReport> {
    let iv = spec.interval;
    let at_lo = || {
        if iv.lo_closed {
            InfLocation::Left
        } else {
            InfLocation::Limit(iv.lo)
        }
    };
    let at_hi = || {
        if iv.hi_closed {
            InfLocation::Right
        } else {
            InfLocation::Limit(iv.hi)
        }
    };
    let (piece_inf, inf_location) = match spec.monotonicity {
        Monotonicity::Constant => (f(iv.lo), InfLocation::Left),
        Monotonicity::Increasing => (f(iv.lo), at_lo()),
        Monotonicity::Decreasing => (f(iv.hi), at_hi()),
        Monotonicity::UnimodalAt(_) => {
            let (a, b) = (f(iv.lo), f(iv.hi));
            if a <= b {
                (a, at_lo())
            } else {
                (b, at_hi())
            }
        }
    };

    let xs = iv.probe_points(PROBES);
    let mut values = Vec::with_capacity(xs.len());
    let mut formula_matches = true;
    for &x in &xs {
        let v = f(x);
        formula_matches &= (v - direct(x)?).abs() <= PROBE_TOL;
        values.push(v);
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let shape_holds = match spec.monotonicity {
        Monotonicity::Constant => values.len() == 1,
        Monotonicity::Increasing => diffs.iter().all(|&d| d > 0.0),
        Monotonicity::Decreasing => diffs.iter().all(|&d| d < 0.0),
        Monotonicity::UnimodalAt(x_star) => {
            let switches = diffs.windows(2).filter(|w| w[0] > 0.0 && w[1] < 0.0).count();
            let first_drop = diffs.iter().position(|&d| d < 0.0);
            let switch_near = first_drop
                .map(|i| xs[i.saturating_sub(1)] <= x_star && x_star <= xs[i + 1])
                .unwrap_or(false);
            switches == 1 && switch_near && diffs.iter().all(|&d| d != 0.0)
        }
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let probe = ProbeSummary {
        points: xs.len(),
        min,
        max,
        shape_holds,
        formula_matches,
        inf_below_probes: piece_inf <= min + PROBE_TOL,
    };
    Ok(PieceReport {
        case_id: spec.case_id.to_string(),
        mode: spec.mode,
        interval: iv,
        formula: spec.formula.to_string(),
        monotonicity: spec.monotonicity,
        piece_inf,
        inf_location,
        probe,
        checks: quote(piece_inf).into_iter().collect(),
    })
}

/// `e^{-λ} Σ_{k=a}^{b} λ^k / k!`.
pub fn poisson_window(lambda: f64, a: u32, b: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..=b {
        if k > 0 {
            term *= lambda / k as f64;
        }
        if k >= a {
            sum += term;
        }
    }
    (-lambda).exp() * sum
}

enum Quote {
    Approx(f64),
    Above(f64),
    Within(f64, f64),
}

struct Case {
    id: &'static str,
    interval: Interval,
    window: (u32, u32),
    formula: &'static str,
    shape: Monotonicity,
    quote: Quote,
}

/// Pieces (i)–(x) of the Poisson case analysis on `(0, (15 - √29)/2]`.
///
/// Interval endpoints follow the mode: in the closed mode a window grows
/// as soon as `λ ± √λ` reaches an integer, in the open mode just after.
pub fn poisson_case_table(mode: Mode) -> Result<Vec<PieceReport>> {
    let b1 = (3.0 - 5f64.sqrt()) / 2.0;
    let b2 = (7.0 - 13f64.sqrt()) / 2.0;
    let b3 = (9.0 - 17f64.sqrt()) / 2.0;
    let b4 = (3.0 + 5f64.sqrt()) / 2.0;
    let b5 = (11.0 - 21f64.sqrt()) / 2.0;
    let b6 = (15.0 - 29f64.sqrt()) / 2.0;
    let closed = mode == Mode::Closed;
    // Endpoint flags: `c` for a bracket in the closed mode, `!c` for one in the open mode.
    let c = closed;
    let cases = [
        Case {
            id: "(i)",
            interval: Interval::new(0.0, b1, false, !c),
            window: (0, 0),
            formula: "e^{-λ}",
            shape: Monotonicity::Decreasing,
            quote: Quote::Approx(0.68252),
        },
        Case {
            id: "(ii)",
            interval: Interval::new(b1, 1.0, c, false),
            window: (0, 1),
            formula: "e^{-λ}(1+λ)",
            shape: Monotonicity::Decreasing,
            quote: Quote::Approx(0.73576),
        },
        if closed {
            Case {
                id: "(iii)",
                interval: Interval::point(1.0),
                window: (0, 2),
                formula: "e^{-λ}(1+λ+λ²/2)",
                shape: Monotonicity::Constant,
                quote: Quote::Approx(0.9197),
            }
        } else {
            Case {
                id: "(iii)",
                interval: Interval::point(1.0),
                window: (1, 1),
                formula: "e^{-λ}λ",
                shape: Monotonicity::Constant,
                quote: Quote::Approx(0.36788),
            }
        },
        Case {
            id: "(iv)",
            interval: Interval::new(1.0, b2, false, !c),
            window: (1, 2),
            formula: "f1 = e^{-λ}(λ+λ²/2)",
            shape: Monotonicity::UnimodalAt(2f64.sqrt()),
            quote: Quote::Approx(0.55182),
        },
        Case {
            id: "(v)",
            interval: Interval::new(b2, b3, c, !c),
            window: (1, 3),
            formula: "f2 = e^{-λ}(λ+λ²/2+λ³/6)",
            shape: Monotonicity::UnimodalAt(6f64.cbrt()),
            quote: Quote::Within(0.68335, 0.68336),
        },
        Case {
            id: "(vi)",
            interval: Interval::new(b3, b4, c, c),
            window: (1, 4),
            formula: "f3 = e^{-λ}(λ+λ²/2+λ³/6+λ⁴/24)",
            shape: Monotonicity::Decreasing,
            quote: Quote::Within(0.80191, 0.80192),
        },
        Case {
            id: "(vii)",
            interval: Interval::new(b4, b5, !c, !c),
            window: (2, 4),
            formula: "f4 = e^{-λ}(λ²/2+λ³/6+λ⁴/24)",
            shape: Monotonicity::UnimodalAt(24f64.cbrt()),
            quote: Quote::Within(0.60899, 0.609),
        },
        Case {
            id: "(viii)",
            interval: Interval::new(b5, 4.0, c, false),
            window: (2, 5),
            formula: "f5 = e^{-λ}(λ²/2+λ³/6+λ⁴/24+λ⁵/120)",
            shape: Monotonicity::UnimodalAt(120f64.powf(0.25)),
            quote: Quote::Within(0.69355, 0.69356),
        },
        if closed {
            Case {
                id: "(ix)",
                interval: Interval::point(4.0),
                window: (2, 6),
                formula: "e^{-λ}(λ²/2+λ³/6+λ⁴/24+λ⁵/120+λ⁶/720)",
                shape: Monotonicity::Constant,
                quote: Quote::Above(0.79774),
            }
        } else {
            Case {
                id: "(ix)",
                interval: Interval::point(4.0),
                window: (3, 5),
                formula: "e^{-λ}(λ³/6+λ⁴/24+λ⁵/120)",
                shape: Monotonicity::Constant,
                quote: Quote::Above(0.547),
            }
        },
        Case {
            id: "(x)",
            interval: Interval::new(4.0, b6, false, !c),
            window: (3, 6),
            formula: "f6 = e^{-λ}(λ³/6+λ⁴/24+λ⁵/120+λ⁶/720)",
            // f6' = e^{-λ}(λ²/2 - λ⁶/720) vanishes at 360^{1/4} ≈ 4.356, inside the piece.
            shape: Monotonicity::UnimodalAt(360f64.powf(0.25)),
            quote: Quote::Within(0.64792, 0.64793),
        },
    ];

    cases
        .into_iter()
        .map(|case| {
            let (a, b) = case.window;
            let f = move |x: f64| poisson_window(x, a, b);
            let direct = |x: f64| Ok(concentration(Family::Poisson { lambda: x }, mode)?.value);
            let label = format!("case {} piece infimum", case.id);
            build_piece(
                PieceSpec {
                    case_id: case.id,
                    mode,
                    interval: case.interval,
                    formula: case.formula,
                    monotonicity: case.shape,
                },
                &f,
                &direct,
                |inf| {
                    Some(match case.quote {
                        Quote::Approx(q) => Replay::approx(label, inf, q, QUOTE_TOL),
                        Quote::Above(q) => Replay::above(label, inf, q),
                        Quote::Within(lo, hi) => Replay::within(label, inf, lo, hi),
                    })
                },
            )
        })
        .collect()
}

/// The geometric piece where only `0` lies in the one-sigma window:
/// `p ∈ (3/4, 1)` closed, `p ∈ [3/4, 1)` open, value `p`.
pub fn geometric_head_piece(mode: Mode) -> Result<PieceReport> {
    build_piece(
        PieceSpec {
            case_id: "(i)",
            mode,
            interval: Interval::new(0.75, 1.0, mode == Mode::Open, false),
            formula: "p",
            monotonicity: Monotonicity::Increasing,
        },
        &|p| p,
        &|p| Ok(concentration(Family::Geometric { p }, mode)?.value),
        |inf| Some(Replay::approx("head piece infimum", inf, 0.75, 0.0)),
    )
}

/// The symmetric geometric piece where only `0` lies in the window:
/// `p ∈ (√3 - 1, 1)` closed, `[√3 - 1, 1)` open, value `p/(2 - p)`.
pub fn sym_geometric_head_piece(mode: Mode) -> Result<PieceReport> {
    build_piece(
        PieceSpec {
            case_id: "(i)",
            mode,
            interval: Interval::new(3f64.sqrt() - 1.0, 1.0, mode == Mode::Open, false),
            formula: "p/(2-p)",
            monotonicity: Monotonicity::Increasing,
        },
        &|p| p / (2.0 - p),
        &|p| Ok(concentration(Family::SymGeometric { p }, mode)?.value),
        |inf| Some(Replay::approx("head piece infimum", inf, 0.57735, QUOTE_TOL)),
    )
}

/// `P^0_λ = e^{-2λ} Σ λ^{2k}/(k!)^2` on `(0, 1/2)`, decreasing; the right
/// end is included in the open mode only.
pub fn sym_poisson_step1_piece(mode: Mode) -> Result<PieceReport> {
    build_piece(
        PieceSpec {
            case_id: "step 1",
            mode,
            interval: Interval::new(0.0, 0.5, false, mode == Mode::Open),
            formula: "e^{-2λ} Σ_k λ^{2k}/(k!)²",
            monotonicity: Monotonicity::Decreasing,
        },
        &|x| skellam_pmf(x, 0).map(|v| v.value).unwrap_or(f64::NAN),
        &|x| Ok(concentration(Family::SymPoisson { lambda: x }, mode)?.value),
        |inf| Some(Replay::approx("P^0 at 1/2", inf, 0.46576, QUOTE_TOL)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        let e = (-1f64).exp();
        assert!((poisson_window(1.0, 0, 2) - 2.5 * e).abs() < 1e-15);
        assert!((poisson_window(1.0, 1, 2) - 1.5 * e).abs() < 1e-15);
        assert!((poisson_window(4.0, 3, 5) - 0.547).abs() < 1e-3);
    }

    #[test]
    fn closed_case_table() {
        let t = poisson_case_table(Mode::Closed).unwrap();
        assert_eq!(t.len(), 10);
        for p in &t {
            assert!(p.probe.ok(), "{} {:?}", p.case_id, p.probe);
            for r in &p.checks {
                assert!(r.passed, "{r}");
            }
        }
        let iv = &t[3];
        assert_eq!(iv.case_id, "(iv)");
        assert_eq!(iv.inf_location, InfLocation::Limit(1.0));
        assert!((iv.piece_inf - 1.5 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(iv.monotonicity, Monotonicity::UnimodalAt(2f64.sqrt()));
        assert!((t[0].piece_inf - 0.68252).abs() < 5e-6);
        assert!(t[8].piece_inf > 0.79774);
    }

    #[test]
    fn open_case_table() {
        let t = poisson_case_table(Mode::Open).unwrap();
        for p in &t {
            assert!(p.probe.ok(), "{} {:?}", p.case_id, p.probe);
            for r in &p.checks {
                assert!(r.passed, "{r}");
            }
        }
        assert_eq!(t[2].piece_inf, (-1f64).exp());
        assert!(t[8].piece_inf > 0.547);
        assert_eq!(t[0].inf_location, InfLocation::Right);
    }

    #[test]
    fn head_pieces() {
        let g = geometric_head_piece(Mode::Closed).unwrap();
        assert_eq!(g.piece_inf, 0.75);
        assert_eq!(g.inf_location, InfLocation::Limit(0.75));
        assert!(g.probe.ok());
        let s = sym_geometric_head_piece(Mode::Open).unwrap();
        assert!((s.piece_inf - 3f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(s.inf_location, InfLocation::Left);
        assert!(s.probe.ok());
        let p = sym_poisson_step1_piece(Mode::Open).unwrap();
        assert!(p.probe.ok(), "{:?}", p.probe);
        assert_eq!(p.inf_location, InfLocation::Right);
    }
}
