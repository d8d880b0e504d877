use levy_survival::expm::expm;
use levy_survival::kernel::{kernel_functions, tail_functions};
use levy_survival::levy::{levy_symbol, LevyFamily, LevyMeasureSpec, LevyTriplet};
use levy_survival::montecarlo::wilson_interval;
use levy_survival::operator::{build_grid, Domain, OperatorSet};
use levy_survival::spectral::{laplace_survival, survival_curve};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn stable() -> impl Strategy<Value = LevyTriplet> {
    (0.3f64..1.9, 0.3f64..2.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(alpha, scale, skew, gamma)| LevyTriplet::stable(alpha, scale, skew, gamma).unwrap())
}

fn tempered() -> impl Strategy<Value = LevyTriplet> {
    (0.2f64..2.0, 0.5f64..4.0, 0.5f64..4.0, 0.0f64..1.6, 0.0f64..0.5).prop_map(|(c, g, m, y, a)| {
        LevyTriplet::new(a, 0.0, LevyMeasureSpec::Family(LevyFamily::Cgmy { c, g, m, y })).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symbol_is_hermitian_with_nonnegative_real_part(t in stable(), z in 0.05f64..20.0) {
        let p = levy_symbol(&t, z).unwrap();
        let m = levy_symbol(&t, -z).unwrap();
        prop_assert!(p.re >= -1e-10 * p.norm());
        prop_assert!((p - m.conj()).norm() <= 1e-9 * p.norm().max(1.0));
    }

    #[test]
    fn tails_and_kernels_are_monotone(t in tempered(), u in 0.01f64..1.5, du in 0.01f64..1.0) {
        let tails = tail_functions(&t);
        prop_assert!(tails.mu_plus(u).unwrap() <= tails.mu_plus(u + du).unwrap() + 1e-12);
        prop_assert!(tails.mu_minus(-u - du).unwrap() <= tails.mu_minus(-u).unwrap() + 1e-12);
        let k = kernel_functions(&tails, 2.0).unwrap();
        prop_assert!(k.k_plus(u).unwrap() >= k.k_plus(u + du).unwrap() - 1e-12);
        prop_assert!(k.k_minus(-u).unwrap() >= k.k_minus(-u - du).unwrap() - 1e-12);
    }

    #[test]
    fn quasipotential_is_nonnegative_and_survival_monotone(t in stable()) {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let ops = OperatorSet::build(&t, &d, 20.0, None).unwrap();
        prop_assert!(ops.diagnostics.min_entry_ratio > -1e-8);
        prop_assert!(ops.diagnostics.residual < 1e-10);
        let times: Vec<f64> = (0..12).map(|k| k as f64 * 0.25).collect();
        let curve = survival_curve(&ops.l, &ops.grid, 0.0, &times).unwrap();
        prop_assert_eq!(curve.values[0], 1.0);
        prop_assert!(curve.values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(curve.values.iter().all(|p| (0.0..=1.0).contains(p)));
        let l0 = laplace_survival(&ops.b, &ops.grid, 0.0, 0.0).unwrap();
        let l1 = laplace_survival(&ops.b, &ops.grid, 0.0, 1.0).unwrap();
        prop_assert!(l0 > l1 && l1 > 0.0);
    }

    #[test]
    fn wilson_interval_brackets_estimate(n in 1usize..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn grid_expansion_pads_boundaries(a in -3.0f64..0.0, len in 0.5f64..2.0, gap in 0.1f64..1.0, res in 16.0f64..80.0) {
        let d = Domain::new(vec![(a, a + len), (a + len + gap, a + 2.0 * len + gap)]).unwrap();
        let g = build_grid(&d, res).unwrap();
        let ones = vec![1.0; g.unknowns()];
        let full = g.expand(&ones);
        prop_assert_eq!(full.len(), g.node_count());
        let nodes = g.nodes();
        for ((_, boundary), v) in nodes.iter().zip(&full) {
            prop_assert_eq!(*v, if *boundary { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn exponential_inverts(entries in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let m = DMatrix::from_vec(4, 4, entries);
        let product = expm(&m).unwrap() * expm(&(-&m)).unwrap();
        prop_assert!((product - DMatrix::<f64>::identity(4, 4)).amax() < 1e-9);
    }
}
