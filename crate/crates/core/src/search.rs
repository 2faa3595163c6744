//! Breakpoint enumeration, the discrete breakpoint scans, the geometric
//! piece-infimum sequences, the truncated symmetric-Poisson grid scan and
//! figure tables.
//!
//! Scans run in parallel over disjoint index ranges. Every reduction orders
//! candidates by value and then by argument, so the result is the same for
//! any partitioning or thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io;

use crate::concentration::{concentration, Mode, PinnedParam};
use crate::distributions::{
    ln_factorial, poisson_cdf, BoundedValue, Family, UNIT_ROUNDOFF,
};
use crate::error::{domain, Error, Result};
use crate::fmt::sig17;

/// Which endpoint of the Poisson one-sigma interval sits on the integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakpointKind {
    /// `lambda + sqrt(lambda) = n`.
    Upper,
    /// `lambda - sqrt(lambda) = n`.
    Lower,
}

/// Root of `lambda ± sqrt(lambda) = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub n: u64,
    pub kind: BreakpointKind,
    pub lambda: f64,
}

impl Breakpoint {
    /// `lambda ± sqrt(lambda) - n`.
    pub fn residual(&self) -> f64 {
        let s = self.lambda.sqrt();
        match self.kind {
            BreakpointKind::Upper => self.lambda + s - self.n as f64,
            BreakpointKind::Lower => self.lambda - s - self.n as f64,
        }
    }

    /// The Poisson parameter with the corresponding endpoint pinned to `n`.
    pub fn pinned(&self) -> PinnedParam {
        let n = self.n as i64;
        let (lower_hit, upper_hit) = match self.kind {
            BreakpointKind::Upper => (None, Some(n)),
            BreakpointKind::Lower => (Some(n), None),
        };
        PinnedParam {
            family: Family::Poisson { lambda: self.lambda },
            lower_hit,
            upper_hit,
        }
    }
}

/// Residual tolerance `4 ulp · n`.
pub fn breakpoint_tolerance(n: u64) -> f64 {
    4.0 * f64::EPSILON * (n as f64).max(1.0)
}

/// Root of `lambda + sqrt(lambda) = n` (`Upper`, the root below `n`) or
/// `lambda - sqrt(lambda) = n` (`Lower`, the root above `n`).
///
/// The upper root is evaluated as `2n^2 / (2n + 1 + sqrt(4n + 1))`, which is
/// algebraically `(2n + 1 - sqrt(4n + 1)) / 2` without the cancellation.
pub fn breakpoint(n: u64, kind: BreakpointKind) -> Result<Breakpoint> {
    if n == 0 {
        return Err(domain("breakpoint index must be at least 1"));
    }
    let nf = n as f64;
    let root = (4.0 * nf + 1.0).sqrt();
    let lambda = match kind {
        BreakpointKind::Upper => 2.0 * nf * nf / (2.0 * nf + 1.0 + root),
        BreakpointKind::Lower => (2.0 * nf + 1.0 + root) / 2.0,
    };
    let mut bp = Breakpoint { n, kind, lambda };
    if bp.residual().abs() > breakpoint_tolerance(n) {
        // One Newton step on lambda ± sqrt(lambda) - n.
        let s = bp.lambda.sqrt();
        let slope = match kind {
            BreakpointKind::Upper => 1.0 + 0.5 / s,
            BreakpointKind::Lower => 1.0 - 0.5 / s,
        };
        bp.lambda -= bp.residual() / slope;
        if bp.residual().abs() > breakpoint_tolerance(n) {
            return Err(domain(format!("breakpoint {n} did not converge")));
        }
    }
    Ok(bp)
}

/// Geometric parameter `p = 1 - (n/(n+1))^2`, where `mean + sd = n`.
pub fn geometric_breakpoint(n: u64) -> Result<PinnedParam> {
    if n == 0 {
        return Err(domain("geometric breakpoint index must be at least 1"));
    }
    let r = n as f64 / (n as f64 + 1.0);
    let p = 1.0 - r * r;
    PinnedParam::new(Family::Geometric { p }, None, Some(n as i64))
}

/// Symmetric geometric parameter `p = 2 / (1 + sqrt(1 + 2n^2))`, where
/// `sd = n`; `n = 1` gives `sqrt(3) - 1`.
pub fn sym_geometric_breakpoint(n: u64) -> Result<PinnedParam> {
    if n == 0 {
        return Err(domain("symmetric geometric breakpoint index must be at least 1"));
    }
    let nf = n as f64;
    let p = 2.0 / (1.0 + (1.0 + 2.0 * nf * nf).sqrt());
    let n = n as i64;
    PinnedParam::new(Family::SymGeometric { p }, Some(-n), Some(n))
}

/// Symmetric Poisson parameter `lambda = n^2 / 2`, where `sd = n`.
pub fn sym_poisson_breakpoint(n: u64) -> Result<PinnedParam> {
    if n == 0 {
        return Err(domain("symmetric Poisson breakpoint index must be at least 1"));
    }
    let lambda = (n * n) as f64 / 2.0;
    let n = n as i64;
    PinnedParam::new(Family::SymPoisson { lambda }, Some(-n), Some(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

/// Extremum of a discrete scan over `range_lo..=range_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub arg: i64,
    pub extremum: f64,
    pub direction: Direction,
    pub range_lo: i64,
    pub range_hi: i64,
    pub samples: u64,
}

/// `P{N_{lambda_n^(1)} <= n - 1}` at the upper breakpoint `lambda + sqrt(lambda) = n`.
pub fn g1_value(n: u64) -> Result<BoundedValue> {
    let bp = breakpoint(n, BreakpointKind::Upper)?;
    poisson_cdf(bp.lambda, n as i64 - 1)
}

/// `P{N_{lambda_n^(2)} <= n}` at the lower breakpoint `lambda - sqrt(lambda) = n`.
pub fn g2_value(n: u64) -> Result<BoundedValue> {
    let bp = breakpoint(n, BreakpointKind::Lower)?;
    poisson_cdf(bp.lambda, n as i64)
}

fn better(direction: Direction, a: (i64, f64), b: (i64, f64)) -> (i64, f64) {
    let ord = match direction {
        Direction::Min => a.1.total_cmp(&b.1),
        Direction::Max => b.1.total_cmp(&a.1),
    };
    match ord.then(a.0.cmp(&b.0)) {
        Ordering::Greater => b,
        _ => a,
    }
}

fn discrete_scan<F>(lo: u64, hi: u64, direction: Direction, f: F) -> Result<ScanResult>
where
    F: Fn(u64) -> Result<BoundedValue> + Sync,
{
    if lo > hi {
        return Err(Error::EmptyRange(format!("[{lo}, {hi}]")));
    }
    let values: Vec<(i64, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|n| f(n).map(|v| (n as i64, v.value)))
        .collect::<Result<_>>()?;
    let (arg, extremum) = values
        .iter()
        .copied()
        .reduce(|a, b| better(direction, a, b))
        .expect("non-empty range");
    Ok(ScanResult {
        arg,
        extremum,
        direction,
        range_lo: lo as i64,
        range_hi: hi as i64,
        samples: hi - lo + 1,
    })
}

/// Minimum of [`g1_value`] over `n_lo..=n_hi`, ties toward smaller `n`.
pub fn scan_g1(n_lo: u64, n_hi: u64) -> Result<ScanResult> {
    if n_lo < 8 {
        return Err(domain(format!("g1 scans start at n >= 8, got {n_lo}")));
    }
    discrete_scan(n_lo, n_hi, Direction::Min, g1_value)
}

/// Maximum of [`g2_value`] over `n_lo..=n_hi`, ties toward smaller `n`.
pub fn scan_g2(n_lo: u64, n_hi: u64) -> Result<ScanResult> {
    if n_lo < 3 {
        return Err(domain(format!("g2 scans start at n >= 3, got {n_lo}")));
    }
    discrete_scan(n_lo, n_hi, Direction::Max, g2_value)
}

/// `(n, value)` rows of a g1 or g2 scan.
pub fn scan_table(which: ScanKind, n_lo: u64, n_hi: u64) -> Result<Vec<(u64, f64)>> {
    let f = match which {
        ScanKind::G1 => g1_value,
        ScanKind::G2 => g2_value,
    };
    (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| f(n).map(|v| (n, v.value)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    G1,
    G2,
}

/// `lambda_7^(1) = (15 - sqrt 29)/2`, the left end of the scanned segment.
pub fn segment_start() -> f64 {
    breakpoint(7, BreakpointKind::Upper)
        .expect("n = 7 is valid")
        .lambda
}

/// `P{N_lambda <= 2}` at `lambda = (15 - sqrt 29)/2`.
pub fn g2_left_endpoint() -> BoundedValue {
    poisson_cdf(segment_start(), 2).expect("positive rate")
}

/// `a_n = 1 - (n/(n+1))^{2n}`, the infimum of the geometric piece on which
/// `floor(1/(1 - sqrt q)) = n`.
pub fn geometric_piece_inf(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("piece index must be at least 2, got {n}")));
    }
    let nf = n as f64;
    Ok(1.0 - (-2.0 * nf * (1.0 / nf).ln_1p()).exp())
}

/// `a_n = 1 - (1 - 2/(1+s))^n / (1 - 1/(1+s))` with `s = sqrt(2n^2 + 1)`, the
/// infimum of the symmetric geometric piece ending where `sd = n`.
pub fn sym_geometric_piece_inf(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("piece index must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let s = (2.0 * nf * nf + 1.0).sqrt();
    let num = (nf * (-2.0 / (1.0 + s)).ln_1p()).exp();
    Ok(1.0 - num / (1.0 - 1.0 / (1.0 + s)))
}

/// `floor(sqrt(2 lambda))`, corrected so that `lambda = n^2/2` gives `n`.
pub fn sym_poisson_l_max(lambda: f64) -> u64 {
    let two = 2.0 * lambda;
    let mut l = two.sqrt().floor() as u64;
    while ((l + 1) * (l + 1)) as f64 <= two {
        l += 1;
    }
    while l > 0 && (l * l) as f64 > two {
        l -= 1;
    }
    l
}

/// `e^{-2λ}[Σ_{k≤K} λ^{2k}/(k!)^2 + 2 Σ_{l=1}^{⌊√(2λ)⌋} Σ_{k≤K} λ^{2k+l}/(k!(k+l)!)]`.
///
/// The truncation at `K` is part of the definition; `abs_err` covers
/// rounding only. Terms follow `t_{k+1} = t_k λ^2 / ((k+1)(k+1+l))` from a
/// log-space start that already contains `e^{-2λ}`.
pub fn q_truncated(lambda: f64, terms: u64) -> Result<BoundedValue> {
    crate::distributions::poisson_pmf(lambda, 0)?;
    Ok(q_truncated_unchecked(lambda, terms))
}

fn q_truncated_unchecked(lambda: f64, terms: u64) -> BoundedValue {
    let l_max = sym_poisson_l_max(lambda);
    let lam2 = lambda * lambda;
    let ln_lambda = lambda.ln();
    let mut total = 0.0;
    let mut err = 0.0;
    for l in 0..=l_max {
        let lf = l as f64;
        let log_t0 = -2.0 * lambda + lf * ln_lambda - ln_factorial(l);
        let log_mag = 2.0 * lambda + lf * ln_lambda.abs() + lf * (lf + 1.0).ln() + lf + 2.0;
        let mut t = log_t0.exp();
        let start_rel = 8.0 * UNIT_ROUNDOFF * log_mag + 2.0 * UNIT_ROUNDOFF;
        let mut s = t;
        let mut weighted = 0.0;
        for k in 0..terms {
            let kf = k as f64;
            t *= lam2 / ((kf + 1.0) * (kf + 1.0 + lf));
            if t == 0.0 {
                break;
            }
            s += t;
            weighted += t * (kf + 1.0);
        }
        let series_err = s * start_rel + 4.0 * UNIT_ROUNDOFF * weighted + (terms as f64 + 1.0) * UNIT_ROUNDOFF * s;
        let w = if l == 0 { 1.0 } else { 2.0 };
        total += w * s;
        err += w * series_err;
    }
    err += (l_max as f64 + 2.0) * UNIT_ROUNDOFF * total;
    BoundedValue::new(total, err)
}

/// Arithmetic grid `lo, lo + step, ..., hi`.
///
/// When `1/step` and `lo/step` are integers (to 1e-9), points are evaluated
/// as `(lo/step + r) / (1/step)`, so grid points such as `n^2/2` are hit
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    points: u64,
    rational: Option<(f64, f64)>,
}

fn near_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r)
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(domain("grid bounds and step must be finite"));
        }
        if !(step > 0.0) {
            return Err(domain(format!("grid step must be positive, got {step}")));
        }
        if lo > hi {
            return Err(Error::EmptyRange(format!("grid [{lo}, {hi}]")));
        }
        let span = (hi - lo) / step;
        let intervals = near_integer(span).unwrap_or(span.floor());
        let rational = near_integer(1.0 / step)
            .and_then(|den| near_integer(lo * den).map(|num| (num, den)));
        Ok(GridSpec {
            lo,
            hi,
            step,
            points: intervals as u64 + 1,
            rational,
        })
    }

    /// `floor((hi - lo)/step) + 1`.
    pub fn points(&self) -> u64 {
        self.points
    }

    pub fn point(&self, r: u64) -> f64 {
        match self.rational {
            Some((num, den)) => (num + r as f64) / den,
            None => self.lo + r as f64 * self.step,
        }
    }
}

/// Minimum of [`q_truncated`] over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridScanResult {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub lambda_star: f64,
    pub min_value: f64,
    pub min_abs_err: f64,
    pub truncation_k: u64,
    pub points: u64,
}

fn grid_min(grid: &GridSpec, terms: u64, range: std::ops::Range<u64>) -> (f64, f64, f64) {
    range
        .map(|r| {
            let lambda = grid.point(r);
            let q = q_truncated_unchecked(lambda, terms);
            (q.value, lambda, q.abs_err)
        })
        .reduce(min_by_value_then_arg)
        .expect("non-empty partition")
}

fn min_by_value_then_arg(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    match a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)) {
        Ordering::Greater => b,
        _ => a,
    }
}

fn check_grid_args(lo: f64, terms: u64) -> Result<()> {
    if !(lo > 0.0) {
        return Err(domain(format!("grid must start at a positive rate, got {lo}")));
    }
    if terms == 0 {
        return Err(domain("truncation order must be at least 1"));
    }
    Ok(())
}

/// Minimum of `q_truncated(·, terms)` over the grid `lo..=hi` by `step`,
/// ties toward smaller `lambda`. Work is split by rayon.
pub fn grid_scan_q(lo: f64, hi: f64, step: f64, terms: u64) -> Result<GridScanResult> {
    check_grid_args(lo, terms)?;
    let grid = GridSpec::new(lo, hi, step)?;
    let best = (0..grid.points())
        .into_par_iter()
        .map(|r| {
            let lambda = grid.point(r);
            let q = q_truncated_unchecked(lambda, terms);
            (q.value, lambda, q.abs_err)
        })
        .reduce_with(min_by_value_then_arg)
        .expect("grid has at least one point");
    Ok(grid_result(&grid, terms, best))
}

/// [`grid_scan_q`] with the grid split into `partitions` contiguous blocks,
/// each reduced on its own before the blocks are combined.
pub fn grid_scan_q_partitioned(
    lo: f64,
    hi: f64,
    step: f64,
    terms: u64,
    partitions: u64,
) -> Result<GridScanResult> {
    check_grid_args(lo, terms)?;
    if partitions == 0 {
        return Err(domain("need at least one partition"));
    }
    let grid = GridSpec::new(lo, hi, step)?;
    let n = grid.points();
    let parts = partitions.min(n);
    let chunk = n.div_ceil(parts);
    let best = (0..parts)
        .into_par_iter()
        .filter_map(|i| {
            let start = i * chunk;
            let end = ((i + 1) * chunk).min(n);
            (start < end).then(|| grid_min(&grid, terms, start..end))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(min_by_value_then_arg)
        .expect("grid has at least one point");
    Ok(grid_result(&grid, terms, best))
}

fn grid_result(grid: &GridSpec, terms: u64, best: (f64, f64, f64)) -> GridScanResult {
    GridScanResult {
        lo: grid.lo,
        hi: grid.hi,
        step: grid.step,
        lambda_star: best.1,
        min_value: best.0,
        min_abs_err: best.2,
        truncation_k: terms,
        points: grid.points(),
    }
}

/// `(lambda, Q)` rows over a grid.
pub fn grid_table(lo: f64, hi: f64, step: f64, terms: u64) -> Result<Vec<(f64, f64)>> {
    check_grid_args(lo, terms)?;
    let grid = GridSpec::new(lo, hi, step)?;
    Ok((0..grid.points())
        .into_par_iter()
        .map(|r| {
            let lambda = grid.point(r);
            (lambda, q_truncated_unchecked(lambda, terms).value)
        })
        .collect())
}

/// Plot data for one of the four figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureTable {
    pub figure: u8,
    pub header: Vec<String>,
    /// First column is an integer index for figures 1 and 2.
    pub integer_index: bool,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    /// Writes the table as CSV: header row, 17-significant-digit decimals.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            let fields = row.iter().enumerate().map(|(i, &x)| {
                if i == 0 && self.integer_index {
                    format!("{}", x as i64)
                } else {
                    sig17(x)
                }
            });
            out.write_record(fields)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn sym_poisson_rows(count: u64, denom: f64) -> Result<Vec<Vec<f64>>> {
    (1..count)
        .into_par_iter()
        .map(|i| {
            let lambda = i as f64 / denom;
            let fam = Family::SymPoisson { lambda };
            let closed = concentration(fam, Mode::Closed)?.value;
            let open = concentration(fam, Mode::Open)?.value;
            Ok(vec![lambda, closed, open])
        })
        .collect()
}

/// Figure 1: `(n, P{N_{lambda_n^(1)} <= n-1})`, `n in [8, 629]`.
/// Figure 2: `(n, P{N_{lambda_n^(2)} <= n})`, `n in [3, 579]`.
/// Figure 3: `(lambda, P_lambda, P^0_lambda)` on `(0, 1/2)` by `1/1000`.
/// Figure 4: the same on `(0, 10)` by `1/100`.
pub fn figure_data(which: u8) -> Result<FigureTable> {
    let scan_header = || vec!["n".to_string(), "prob".to_string()];
    let sym_header = || {
        vec![
            "lambda".to_string(),
            "p_closed".to_string(),
            "p_open".to_string(),
        ]
    };
    let to_rows = |t: Vec<(u64, f64)>| t.into_iter().map(|(n, v)| vec![n as f64, v]).collect();
    let (header, integer_index, rows) = match which {
        1 => (scan_header(), true, to_rows(scan_table(ScanKind::G1, 8, 629)?)),
        2 => (scan_header(), true, to_rows(scan_table(ScanKind::G2, 3, 579)?)),
        3 => (sym_header(), false, sym_poisson_rows(500, 1000.0)?),
        4 => (sym_header(), false, sym_poisson_rows(1000, 100.0)?),
        other => {
            return Err(Error::Unknown {
                what: "figure",
                value: other.to_string(),
            })
        }
    };
    Ok(FigureTable {
        figure: which,
        header,
        integer_index,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) < 0.0) == (f(m) < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn breakpoint_examples() {
        let bp = breakpoint(7, BreakpointKind::Upper).unwrap();
        assert!((bp.lambda - (15.0 - 29f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((bp.lambda - 4.80742).abs() < 5e-6);

        let lower3 = bisect(|l| l - l.sqrt() - 3.0, 4.0, 10.0);
        let bp = breakpoint(3, BreakpointKind::Lower).unwrap();
        assert!((bp.lambda - lower3).abs() < 1e-13);
        assert!((bp.lambda - 5.302776).abs() < 1e-6);

        let upper8 = bisect(|l| l + l.sqrt() - 8.0, 1.0, 8.0);
        let bp = breakpoint(8, BreakpointKind::Upper).unwrap();
        assert!((bp.lambda - upper8).abs() < 1e-13);
        assert!((bp.lambda - 5.627719).abs() < 1e-6);

        assert!(breakpoint(0, BreakpointKind::Upper).is_err());
    }

    #[test]
    fn breakpoint_residuals_and_ordering() {
        for n in 1..=10_000u64 {
            let up = breakpoint(n, BreakpointKind::Upper).unwrap();
            let lo = breakpoint(n, BreakpointKind::Lower).unwrap();
            assert!(up.residual().abs() <= breakpoint_tolerance(n), "upper {n}");
            assert!(lo.residual().abs() <= breakpoint_tolerance(n), "lower {n}");
            assert!(lo.lambda > n as f64 + 1.0);
            if n >= 8 {
                assert!(up.lambda < n as f64 - 1.0);
            }
        }
        // The "< n - 1" ordering does not hold for the smallest indices.
        assert_eq!(breakpoint(2, BreakpointKind::Upper).unwrap().lambda, 1.0);
        assert!(breakpoint(3, BreakpointKind::Upper).unwrap().lambda > 2.0 - 1.0);
    }

    #[test]
    fn singleton_scans() {
        let s = scan_g1(8, 8).unwrap();
        assert_eq!(s.arg, 8);
        assert_eq!(s.extremum, g1_value(8).unwrap().value);
        assert_eq!(s.samples, 1);
        let s = scan_g2(10, 10).unwrap();
        assert_eq!(s.extremum, g2_value(10).unwrap().value);
        assert!(scan_g1(9, 8).is_err());
        assert!(scan_g1(7, 9).is_err());
        assert!(scan_g2(2, 9).is_err());
    }

    #[test]
    fn g2_left_endpoint_value() {
        let v = g2_left_endpoint();
        assert!((v.value - 0.14184).abs() < 5e-6);
        assert!(v.value < poisson_cdf(4.8, 2).unwrap().value);
    }

    #[test]
    fn geometric_piece_sequence() {
        assert!((geometric_piece_inf(2).unwrap() - 65.0 / 81.0).abs() < 1e-15);
        assert!((geometric_piece_inf(3).unwrap() - (1.0 - 0.75f64.powi(6))).abs() < 1e-15);
        let mut prev = 0.0;
        for n in 2..5000 {
            let a = geometric_piece_inf(n).unwrap();
            assert!(a > prev);
            prev = a;
        }
        assert!((prev - (1.0 - (-2.0f64).exp())).abs() < 1e-4);
        assert!(geometric_piece_inf(1).is_err());
    }

    #[test]
    fn sym_geometric_piece_sequence() {
        assert!((sym_geometric_piece_inf(2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let bound = 1.0 - 4.0 / 3.0 * (-(2f64.sqrt())).exp();
        for n in 3..=10_000 {
            assert!(sym_geometric_piece_inf(n).unwrap() > bound, "n={n}");
        }
        assert!(sym_geometric_piece_inf(1).is_err());
    }

    #[test]
    fn l_max_is_exact_at_squares() {
        for n in 1..=40u64 {
            let lambda = (n * n) as f64 / 2.0;
            assert_eq!(sym_poisson_l_max(lambda), n);
            assert_eq!(sym_poisson_l_max(lambda - 1e-9), n - 1);
        }
    }

    #[test]
    fn q_with_zero_terms_is_a_lower_partial_sum() {
        for &lambda in &[0.7, 3.0, 25.0] {
            let q0 = q_truncated(lambda, 0).unwrap().value;
            let l_max = sym_poisson_l_max(lambda);
            let mut expected = 1.0;
            let mut fact = 1.0;
            for l in 1..=l_max {
                fact *= l as f64;
                expected += 2.0 * lambda.powi(l as i32) / fact;
            }
            expected *= (-2.0 * lambda).exp();
            assert!((q0 - expected).abs() < 1e-13 * expected.max(1.0));
            assert!(q0 <= q_truncated(lambda, 250).unwrap().value);
        }
    }

    #[test]
    fn q_at_two_matches_closed_concentration() {
        let q = q_truncated(2.0, 250).unwrap().value;
        let p = concentration(Family::SymPoisson { lambda: 2.0 }, Mode::Closed).unwrap().value;
        assert!((q - p).abs() < 1e-10);
    }

    #[test]
    fn grid_points_and_single_point() {
        let g = GridSpec::new(0.5, 200.0, 0.0005).unwrap();
        assert_eq!(g.points(), 399_001);
        assert_eq!(g.point(3000), 2.0);
        assert_eq!(g.point(399_000), 200.0);
        let r = grid_scan_q(0.5, 0.5, 0.1, 250).unwrap();
        assert_eq!(r.points, 1);
        assert_eq!(r.lambda_star, 0.5);
        assert!(GridSpec::new(1.0, 0.5, 0.1).is_err());
        assert!(GridSpec::new(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn figure_ids() {
        assert!(figure_data(5).is_err());
        let f = figure_data(3).unwrap();
        assert_eq!(f.rows.len(), 499);
        let row = &f.rows[249];
        assert_eq!(row[0], 0.25);
        assert_eq!(row[1], row[2]);
    }
}
