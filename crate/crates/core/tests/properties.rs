use hartree_cascade::expansion::log_slope;
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::pset::build_pset;
use hartree_cascade::quadrature::{cumulative_cubic, lagrange4};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_psets_are_closed_and_below_one(gn in 5i64..=16, an in 1i64..=12) {
        // n = 6 admits γ ∈ (1, 4]; γ = gn/4, α = an/12 < γ
        let (gamma, alpha) = (Real::ratio(gn, 4), Real::ratio(an, 12));
        prop_assume!(alpha.value() < gamma.value());
        let p = ModelParams::new(6, gamma, alpha, 1.0).unwrap();
        let set = build_pset(&p);
        prop_assert!(set.exact);
        prop_assert!(set.closure_violations().is_empty());
        let e = set.exponents();
        prop_assert!(e.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(e.iter().all(|&x| (0.0..1.0).contains(&x)));
        prop_assert_eq!(set.n + 1, e.len());
        prop_assert!(set.pha_amp_resonances().is_empty());
    }

    #[test]
    fn lagrange_is_exact_on_cubics(c in proptest::array::uniform4(-3.0f64..3.0), t in -1.0f64..4.0) {
        let x = [0.0, 0.7, 1.9, 3.0];
        let p = |s: f64| c[0] + s * (c[1] + s * (c[2] + s * c[3]));
        let f = x.map(p);
        prop_assert!((lagrange4(&x, &f, t) - p(t)).abs() < 1e-10);
    }

    #[test]
    fn cumulative_cubic_integrates_cubics(c in proptest::array::uniform4(-3.0f64..3.0), k in 4usize..40) {
        let x: Vec<f64> = (0..k).map(|i| (i as f64 * 0.37).powf(1.3)).collect();
        let p = |s: f64| c[0] + s * (c[1] + s * (c[2] + s * c[3]));
        let prim = |s: f64| s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)));
        let f: Vec<f64> = x.iter().map(|&s| p(s)).collect();
        let m = cumulative_cubic(&x, &f, 0.0);
        for (xi, mi) in x.iter().zip(&m) {
            prop_assert!((mi - prim(*xi)).abs() < 1e-9 * (1.0 + prim(*xi).abs()));
        }
    }

    #[test]
    fn log_slope_recovers_power_laws(q in -4.0f64..4.0, c in 0.1f64..10.0) {
        let x: Vec<f64> = (1..9).map(|k| 1e-3 * 2f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|t| c * t.powf(q)).collect();
        prop_assert!((log_slope(&x, &y) - q).abs() < 1e-10);
    }

    #[test]
    fn real_parses_fractions(num in 1i64..50, den in 1i64..50) {
        let r: Real = format!("{num}/{den}").parse().unwrap();
        prop_assert!((r.value() - num as f64 / den as f64).abs() < 1e-15);
        prop_assert!(r.exact().is_some());
    }
}
