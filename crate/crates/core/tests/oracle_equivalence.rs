use idconc::concentration::{concentration, geometric_closed_form, sym_geometric_closed_form};
use idconc::distributions::{moments, poisson_cdf, poisson_pmf, skellam_pmf};
use idconc::oracle::{
    oracle_concentration, oracle_poisson_cdf, oracle_poisson_moment, oracle_poisson_pmf,
    oracle_skellam_pmf, BigReal, Precision,
};
use idconc::{BoundedValue, Family, Mode};
use proptest::prelude::*;

fn prec() -> Precision {
    Precision::default()
}

fn within(main: BoundedValue, oracle: &BigReal) -> (bool, f64) {
    let diff = (BigReal::from_f64(main.value, prec()) - oracle).abs().to_f64();
    (diff <= main.abs_err, diff)
}

fn triple() -> impl Strategy<Value = (Family, Mode)> {
    let fam = prop_oneof![
        (0.01f64..0.99).prop_map(|p| Family::Geometric { p }),
        (0.01f64..0.99).prop_map(|p| Family::SymGeometric { p }),
        (0.001f64..50.0).prop_map(|lambda| Family::Poisson { lambda }),
        (0.001f64..50.0).prop_map(|lambda| Family::SymPoisson { lambda }),
    ];
    let mode = prop_oneof![Just(Mode::Closed), Just(Mode::Open)];
    (fam, mode)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn concentration_within_its_error_bar((fam, mode) in triple()) {
        let main = concentration(fam, mode).unwrap();
        let o = oracle_concentration(fam, mode, prec()).unwrap();
        let (ok, diff) = within(main, &o);
        prop_assert!(ok, "{fam} {mode}: diff {diff:e} > abs_err {:e}", main.abs_err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_forms_match_summation(p in 0.01f64..0.99) {
        for mode in Mode::BOTH {
            let a = geometric_closed_form(p, mode).unwrap();
            let b = concentration(Family::Geometric { p }, mode).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.abs_err + b.abs_err, "geometric p={p} {mode}");
            let a = sym_geometric_closed_form(p, mode).unwrap();
            let b = concentration(Family::SymGeometric { p }, mode).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.abs_err + b.abs_err, "sym-geometric p={p} {mode}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn poisson_pmf_and_cdf(lambda in 0.001f64..700.0, k in 0u64..900) {
        let lam = BigReal::from_f64(lambda, prec());
        let (ok, diff) = within(poisson_pmf(lambda, k).unwrap(), &oracle_poisson_pmf(&lam, k).unwrap());
        prop_assert!(ok, "pmf({lambda}, {k}): diff {diff:e}");
        let (ok, diff) = within(poisson_cdf(lambda, k as i64).unwrap(), &oracle_poisson_cdf(&lam, k as i64).unwrap());
        prop_assert!(ok, "cdf({lambda}, {k}): diff {diff:e}");
    }

    #[test]
    fn skellam_pmf_values(lambda in 0.001f64..200.0, l in -40i64..40) {
        let lam = BigReal::from_f64(lambda, prec());
        let (ok, diff) = within(skellam_pmf(lambda, l).unwrap(), &oracle_skellam_pmf(&lam, l).unwrap());
        prop_assert!(ok, "skellam({lambda}, {l}): diff {diff:e}");
    }
}

#[test]
fn poisson_moments_match_brute_force() {
    for lambda in [0.1, 1.0, 2.0, 7.5, 30.0] {
        let m = moments(Family::Poisson { lambda }).unwrap();
        let lam = BigReal::from_f64(lambda, prec());
        let zero = BigReal::zero(prec());
        let raw = |r| oracle_poisson_moment(&lam, &zero, r, false).unwrap().to_f64();
        let central2 = oracle_poisson_moment(&lam, &lam, 2, false).unwrap().to_f64();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs();
        assert!(rel(m.mean, raw(1)), "mean at {lambda}");
        assert!(rel(m.variance, central2), "variance at {lambda}");
        assert!(rel(m.third_raw.unwrap(), raw(3)), "third at {lambda}");
        assert!(rel(m.fourth_raw.unwrap(), raw(4)), "fourth at {lambda}");
    }
    let third = oracle_poisson_moment(&BigReal::int(2, prec()), &BigReal::zero(prec()), 3, false).unwrap();
    assert_eq!(third.to_f64(), 22.0);
}
