use idconc::concentration::{concentration, concentration_pinned};
use idconc::distributions::{poisson_cdf, skellam_pmf};
use idconc::search::sym_poisson_breakpoint;
use idconc::{Family, FamilyKind, Mode};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (0.01f64..0.99).prop_map(|p| Family::Geometric { p }),
        (0.01f64..0.99).prop_map(|p| Family::SymGeometric { p }),
        (0.01f64..50.0).prop_map(|lambda| Family::Poisson { lambda }),
        (0.01f64..50.0).prop_map(|lambda| Family::SymPoisson { lambda }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn open_never_exceeds_closed(fam in family()) {
        let closed = concentration(fam, Mode::Closed).unwrap();
        let open = concentration(fam, Mode::Open).unwrap();
        prop_assert!(open.value <= closed.value + open.abs_err + closed.abs_err,
            "{fam}: open {} > closed {}", open.value, closed.value);
    }

    #[test]
    fn poisson_cdf_decreases_in_lambda(a in 0.01f64..50.0, frac in 0.001f64..1.0, m in 0i64..80) {
        let b = a * (1.0 + frac);
        let va = poisson_cdf(a, m).unwrap();
        let vb = poisson_cdf(b, m).unwrap();
        // Saturated at one: both round to 1 within their error bars.
        prop_assume!(1.0 - va.value > 1e-12);
        prop_assert!(vb.value < va.value, "m={m}: cdf({b})={} not below cdf({a})={}", vb.value, va.value);
        if 1.0 - va.value > 1e-9 {
            prop_assert!(vb.value + vb.abs_err < va.value - va.abs_err,
                "m={m}: cdf({b}) band overlaps cdf({a}) band");
        }
    }

    #[test]
    fn skellam_is_symmetric(lambda in 0.01f64..100.0, l in 1i64..60) {
        prop_assert_eq!(skellam_pmf(lambda, l).unwrap(), skellam_pmf(lambda, -l).unwrap());
    }

    #[test]
    fn skellam_total_mass_is_one(lambda in 0.01f64..50.0) {
        let span = (20.0 + 12.0 * (2.0 * lambda).sqrt()) as i64;
        let mut total = skellam_pmf(lambda, 0).unwrap().value;
        for l in 1..=span {
            total += 2.0 * skellam_pmf(lambda, l).unwrap().value;
        }
        prop_assert!((total - 1.0).abs() < 1e-10, "lambda={lambda}: mass {total}");
    }
}

#[test]
fn sym_poisson_one_sided_continuity_at_breakpoints() {
    let h = 1e-9;
    for n in 1..=6u64 {
        let at = sym_poisson_breakpoint(n).unwrap();
        let lambda = at.family.param();
        let closed = concentration_pinned(&at, Mode::Closed).unwrap().value;
        let open = concentration_pinned(&at, Mode::Open).unwrap().value;
        let right = concentration(Family::SymPoisson { lambda: lambda + h }, Mode::Closed).unwrap().value;
        let left = concentration(Family::SymPoisson { lambda: lambda - h }, Mode::Open).unwrap().value;
        // Closed is right-continuous, open is left-continuous; both jump by 2 pmf(n).
        assert!((closed - right).abs() < 1e-6, "n={n}: {closed} vs {right}");
        assert!((open - left).abs() < 1e-6, "n={n}: {open} vs {left}");
        let jump = 2.0 * skellam_pmf(lambda, n as i64).unwrap().value;
        assert!((closed - open - jump).abs() < 1e-14, "n={n}");
        assert!(jump > 1e-3);
    }
}

#[test]
fn sym_poisson_open_decreases_below_one_half() {
    let probes: Vec<f64> = (1..=100).map(|i| 0.5 * i as f64 / 101.0).collect();
    let values: Vec<f64> = probes
        .iter()
        .map(|&lambda| {
            FamilyKind::SymPoisson
                .with_param(lambda)
                .and_then(|f| concentration(f, Mode::Open))
                .unwrap()
                .value
        })
        .collect();
    for (w, x) in values.windows(2).zip(&probes) {
        assert!(w[1] < w[0], "not decreasing after lambda={x}");
    }
}
