use serde::{Deserialize, Serialize};

use super::normal::normal_cdf;
use super::Replay;
use crate::concentration::Mode;
use crate::distributions::{poisson_cdf, BoundedValue};
use crate::error::{domain, Result};

/// Berry–Esseen constant used in the arithmetic.
pub const C_DEFAULT: f64 = 0.7656;
/// Sharper published value of the same constant.
pub const C_CITED: f64 = 0.7655;

/// `E|Y - 1|^3 = 1 + 2/e` for `Y ~ Poisson(1)`.
pub fn rho_poisson1() -> f64 {
    1.0 + 2.0 * (-1f64).exp()
}

/// `[Φ(t) - Cρ/√n, Φ(t) + Cρ/√n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeBand {
    pub n: u64,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub rho: f64,
}

impl BeBand {
    pub fn half_width(&self) -> f64 {
        self.c * self.rho / (self.n as f64).sqrt()
    }

    /// The band intersected with `[0, 1]`.
    pub fn clamped(&self) -> (f64, f64) {
        (self.lower.clamp(0.0, 1.0), self.upper.clamp(0.0, 1.0))
    }

    pub fn strictly_contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

pub fn be_band(n: u64, t: f64, rho: f64, c: f64) -> Result<BeBand> {
    if n == 0 {
        return Err(domain("Berry–Esseen band needs n >= 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("C must be positive, got {c}")));
    }
    let phi = normal_cdf(t)?.value;
    let h = c * rho / (n as f64).sqrt();
    Ok(BeBand {
        n,
        t,
        lower: phi - h,
        upper: phi + h,
        c,
        rho,
    })
}

/// The four normal approximations for a Poisson sum of `n` unit summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeChain {
    /// `P{N_n <= n + √n}` against `Φ(1)`.
    K1,
    /// `P{N_{n+1} <= n + √n}` against `Φ((√n - 1)/√(n+1))`, with `n + 1` summands.
    K2,
    /// `P{N_n <= n - √n}` against `Φ(-1)`.
    K3,
    /// `P{N_n <= n + 1 - √(n+1)}` against `Φ((1 - √(n+1))/√n)`.
    K4,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn ceil_sqrt(n: u64) -> u64 {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

impl BeChain {
    pub const ALL: [BeChain; 4] = [BeChain::K1, BeChain::K2, BeChain::K3, BeChain::K4];

    /// Number of unit summands and standardized threshold at index `n`.
    pub fn summands_and_t(self, n: u64) -> (u64, f64) {
        let nf = n as f64;
        match self {
            BeChain::K1 => (n, 1.0),
            BeChain::K2 => (n + 1, (nf.sqrt() - 1.0) / (nf + 1.0).sqrt()),
            BeChain::K3 => (n, -1.0),
            BeChain::K4 => (n, (1.0 - (nf + 1.0).sqrt()) / nf.sqrt()),
        }
    }

    pub fn band(self, n: u64, c: f64) -> Result<BeBand> {
        let (m, t) = self.summands_and_t(n);
        be_band(m, t, rho_poisson1(), c)
    }

    /// The Poisson probability the band approximates.
    pub fn target(self, n: u64) -> Result<BoundedValue> {
        if n == 0 {
            return Err(domain("chain index must be at least 1"));
        }
        let (rate, m) = match self {
            BeChain::K1 => (n, n + isqrt(n)),
            BeChain::K2 => (n + 1, n + isqrt(n)),
            BeChain::K3 => (n, n - ceil_sqrt(n)),
            BeChain::K4 => (n, n + 1 - ceil_sqrt(n + 1)),
        };
        poisson_cdf(rate as f64, m as i64)
    }

    /// Whether the band is used as a lower bound (`K1`, `K2`) or an upper bound.
    pub fn bounds_from_below(self) -> bool {
        matches!(self, BeChain::K1 | BeChain::K2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBand {
    pub chain: BeChain,
    pub band: BeBand,
}

/// Large-rate tail of the Poisson case analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub mode: Mode,
    /// Rates `lambda >= threshold` are covered.
    pub threshold: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub rho: f64,
    pub bands: Vec<ChainBand>,
    /// `min(K1.lower, K2.lower)`.
    pub g1_lower: f64,
    /// `max(K3.upper, K4.upper)`.
    pub g2_upper: f64,
    pub lower_bound: f64,
    pub target_inf: f64,
    pub passed: bool,
    pub checks: Vec<Replay>,
}

struct Quotes {
    k1: f64,
    k2_t: f64,
    k2_half: f64,
    k2: f64,
    k3: f64,
    k4_t: f64,
    k4_half: f64,
    k4: f64,
    conclusion: f64,
}

const PROBE_SPAN: u64 = 10_000;

fn monotone_probe(chain: BeChain, n0: u64, c: f64) -> Result<Replay> {
    let mut worst = f64::INFINITY;
    let mut prev = chain.band(n0, c)?;
    for n in n0 + 1..=n0 + PROBE_SPAN {
        let cur = chain.band(n, c)?;
        let step = if chain.bounds_from_below() {
            cur.lower - prev.lower
        } else {
            prev.upper - cur.upper
        };
        worst = worst.min(step);
        prev = cur;
    }
    let (side, dir) = if chain.bounds_from_below() {
        ("lower", "increasing")
    } else {
        ("upper", "decreasing")
    };
    Ok(Replay::above(
        format!("{chain:?} {side} end {dir} in n on [{n0}, {}]: min step", n0 + PROBE_SPAN),
        worst,
        0.0,
    ))
}

/// Berry–Esseen argument for large rates: at `n = 604` (closed) or
/// `n = 108` (open), the four bands bound `g1` from below and `g2` from
/// above, and `g1 - g2` must exceed the infimum.
pub fn be_threshold_check(mode: Mode, c: f64) -> Result<ThresholdCheck> {
    let (n, target_inf, q) = match mode {
        Mode::Closed => (
            604,
            1.5 * (-1f64).exp(),
            Quotes {
                k1: 0.7872,
                k2_t: 0.9585,
                k2_half: 0.0541,
                k2: 0.7769,
                k3: 0.2128,
                k4_t: -0.96,
                k4_half: 0.0541,
                k4: 0.2227,
                conclusion: 0.5542,
            },
        ),
        Mode::Open => (
            108,
            (-1f64).exp(),
            Quotes {
                k1: 0.7134,
                k2_t: 0.8996,
                k2_half: 0.1273,
                k2: 0.6886,
                k3: 0.2866,
                k4_t: -0.9083,
                k4_half: 0.1279,
                k4: 0.3093,
                conclusion: 0.3793,
            },
        ),
    };
    let rho = rho_poisson1();
    let bands = BeChain::ALL
        .iter()
        .map(|&chain| chain.band(n, c).map(|band| ChainBand { chain, band }))
        .collect::<Result<Vec<_>>>()?;
    let [k1, k2, k3, k4] = [bands[0].band, bands[1].band, bands[2].band, bands[3].band];
    let g1_lower = k1.lower.min(k2.lower);
    let g2_upper = k3.upper.max(k4.upper);
    let lower_bound = g1_lower - g2_upper;

    let mut checks = vec![
        Replay::below("C*rho", c * rho, 1.328898),
        Replay::above(format!("K1 lower end at n={n}"), k1.lower, q.k1),
        Replay::above("K2 threshold t", k2.t, q.k2_t),
        Replay::below("K2 half-width C*rho/sqrt(n+1)", k2.half_width(), q.k2_half),
        Replay::above(format!("K2 lower end at n={n} (g1 bound)"), k2.lower, q.k2),
        Replay::below(format!("K3 upper end at n={n}"), k3.upper, q.k3),
        Replay::below("K4 threshold t", k4.t, q.k4_t),
        Replay::below("K4 half-width C*rho/sqrt(n)", k4.half_width(), q.k4_half),
        Replay::below(format!("K4 upper end at n={n} (g2 bound)"), k4.upper, q.k4),
        Replay::above("g1 bound - g2 bound", lower_bound, q.conclusion),
        Replay::above("g1 bound - g2 bound exceeds the infimum", lower_bound, target_inf),
    ];
    for chain in BeChain::ALL {
        checks.push(monotone_probe(chain, n, c)?);
    }
    Ok(ThresholdCheck {
        mode,
        threshold: n,
        c,
        rho,
        bands,
        g1_lower,
        g2_upper,
        lower_bound,
        target_inf,
        passed: lower_bound > target_inf,
        checks,
    })
}

/// `E[Y^4]` for `Y = N - N'`, `N, N' ~ Poisson(mu)` i.i.d., from the raw
/// moments `E[N^k]`.
pub fn skellam_fourth_moment(mu: f64) -> f64 {
    let m1 = mu;
    let m2 = mu * (1.0 + mu);
    let m3 = mu * (1.0 + 3.0 * mu + mu * mu);
    let m4 = mu * (1.0 + 7.0 * mu + 6.0 * mu * mu + mu * mu * mu);
    2.0 * m4 - 8.0 * m1 * m3 + 6.0 * m2 * m2
}

/// Cauchy–Schwarz bound `E|Y|^3 <= sqrt(E[Y^2] E[Y^4])`, `Y = N - N'`.
pub fn skellam_abs_third_moment(mu: f64) -> f64 {
    (2.0 * mu * skellam_fourth_moment(mu)).sqrt()
}

/// `5.31 λ / ⌊λ⌋`, which dominates [`skellam_abs_third_moment`] at
/// `mu = λ/⌊λ⌋` once `λ >= 200`.
pub fn skellam_rho_bound(lambda: f64) -> f64 {
    5.31 * lambda / lambda.floor()
}

/// `Φ(1) - Φ(-1) - 2Cρ / ((2λ/⌊λ⌋)^{3/2} √⌊λ⌋)` with `ρ = 5.31λ/⌊λ⌋`.
pub fn skellam_be_lower(lambda: f64, c: f64) -> Result<BoundedValue> {
    if !(lambda >= 200.0) || !lambda.is_finite() {
        return Err(domain(format!("the large-rate bound needs lambda >= 200, got {lambda}")));
    }
    let m = lambda.floor();
    let sigma2 = 2.0 * lambda / m;
    let rho = skellam_rho_bound(lambda);
    let lead = normal_cdf(1.0)?.value - normal_cdf(-1.0)?.value;
    let penalty = 2.0 * c * rho / (sigma2.powf(1.5) * m.sqrt());
    Ok(BoundedValue::with_rel_err(lead - penalty, 32.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_and_c_rho() {
        assert!((rho_poisson1() - 1.735758882342885).abs() < 1e-15);
        assert!(C_DEFAULT * rho_poisson1() < 1.328898);
    }

    #[test]
    fn band_examples() {
        let b = be_band(604, 1.0, rho_poisson1(), C_DEFAULT).unwrap();
        assert!(b.lower > 0.7872);
        let b = be_band(604, -1.0, rho_poisson1(), C_DEFAULT).unwrap();
        assert!(b.upper < 0.2128);
        assert!(be_band(0, 1.0, 1.0, 1.0).is_err());
        assert!(be_band(1, 1.0, 0.0, 1.0).is_err());
        assert!(be_band(1, 1.0, 1.0, -1.0).is_err());
        let wide = be_band(1, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(wide.clamped(), (0.0, 1.0));
    }

    #[test]
    fn integer_roots() {
        assert_eq!(isqrt(604), 24);
        assert_eq!(isqrt(625), 25);
        assert_eq!(ceil_sqrt(625), 25);
        assert_eq!(ceil_sqrt(626), 26);
    }

    #[test]
    fn containment_at_604_and_1000() {
        for n in [604u64, 1000] {
            for chain in BeChain::ALL {
                let band = chain.band(n, C_DEFAULT).unwrap();
                let target = chain.target(n).unwrap().value;
                assert!(band.strictly_contains(target), "{chain:?} n={n}");
            }
        }
    }

    #[test]
    fn closed_threshold_passes_every_quote() {
        let t = be_threshold_check(Mode::Closed, C_DEFAULT).unwrap();
        assert!(t.passed);
        for r in &t.checks {
            assert!(r.passed, "{r}");
        }
        assert!((t.lower_bound - 0.554507).abs() < 1e-6);
    }

    #[test]
    fn open_threshold_conclusion_holds() {
        let t = be_threshold_check(Mode::Open, C_DEFAULT).unwrap();
        assert!(t.passed);
        assert!((t.g1_lower - 0.688553).abs() < 1e-6);
        assert!((t.g2_upper - 0.309708).abs() < 1e-6);
        assert!(t.lower_bound > (-1f64).exp());
    }

    #[test]
    fn skellam_moments() {
        for &mu in &[0.3, 1.0, 1.004, 2.5] {
            assert!((skellam_fourth_moment(mu) - 2.0 * mu * (1.0 + 6.0 * mu)).abs() < 1e-12);
        }
        // lambda/floor(lambda) stays below 201/200 once lambda >= 200.
        let lambda: f64 = 201.0 - 1e-9;
        let mu = lambda / lambda.floor();
        assert!(skellam_abs_third_moment(mu) < skellam_rho_bound(lambda));
    }

    #[test]
    fn skellam_lower_examples() {
        let v = skellam_be_lower(200.0, C_DEFAULT).unwrap();
        assert!(v.value > 0.4793);
        let far = skellam_be_lower(1e6, C_DEFAULT).unwrap();
        assert!((far.value - 0.6826).abs() < 5e-3);
        assert!(far.value > v.value);
        assert!(skellam_be_lower(199.9, C_DEFAULT).is_err());
    }
}
