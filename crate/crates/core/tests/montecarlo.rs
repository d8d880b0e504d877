use levy_survival::levy::{levy_symbol, JumpLaw, LevyFamily, LevyMeasureSpec, LevyTriplet};
use levy_survival::montecarlo::*;
use levy_survival::operator::Domain;
use levy_survival::spectral::{SurvivalCurve, FIT_WINDOW};
use num_complex::Complex64;
use std::f64::consts::PI;

fn unit() -> Domain {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn draws(scheme: &PathScheme, dt: f64, n: usize, stream: u64) -> Vec<f64> {
    let mut rng = scheme.path_rng(stream);
    (0..n).map(|_| scheme.sample_increment(dt, &mut rng)).collect()
}

fn family(a: f64, gamma: f64, f: LevyFamily) -> LevyTriplet {
    LevyTriplet::new(a, gamma, LevyMeasureSpec::Family(f)).unwrap()
}

/// Empirical characteristic function against `exp(-dt λ(z))`.
fn check_characteristic(t: &LevyTriplet, scheme: &PathScheme, dt: f64, n: usize) {
    let x = draws(scheme, dt, n, 99);
    for z in [0.5, 1.0, 2.0] {
        let emp: Complex64 = x.iter().map(|v| Complex64::new(0.0, z * v).exp()).sum::<Complex64>() / n as f64;
        let exact = (-dt * levy_symbol(t, z).unwrap()).exp();
        assert!((emp - exact).norm() < 5.0 / (n as f64).sqrt(), "z={z} {emp} {exact}");
    }
}

#[test]
fn brownian_increment_moments() {
    let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let s = PathScheme::new(&t, 1.0, 1e-2, 5).unwrap();
    let x = draws(&s, 1.0, 1_000_000, 0);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
    assert!(mean.abs() < 4e-3 && (var - 1.0).abs() < 1e-2, "{mean} {var}");
}

#[test]
fn poisson_mean_count() {
    let t = LevyTriplet::poisson(1.0, 0.0).unwrap();
    let s = PathScheme::new(&t, 0.25, 1e-2, 5).unwrap();
    let n = 100_000;
    let mean = draws(&s, 0.25, n, 0).iter().sum::<f64>() / n as f64;
    assert!((mean - 0.25).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{mean}");
}

#[test]
fn cauchy_self_similarity() {
    let t = LevyTriplet::cauchy(1.0).unwrap();
    let s = PathScheme::new(&t, 1e-2, 1e-2, 5).unwrap();
    let n = 100_000;
    let mut one = draws(&s, 1e-2, n, 1);
    let mut two: Vec<f64> = draws(&s, 2e-2, n, 2).iter().map(|v| v / 2.0).collect();
    one.sort_by(f64::total_cmp);
    two.sort_by(f64::total_cmp);
    // two-sample Kolmogorov–Smirnov statistic
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < n {
        if one[i] <= two[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 - j as f64).abs() / n as f64);
    }
    let critical = 1.628 * (2.0 / n as f64).sqrt();
    assert!(d < critical, "{d} {critical}");
}

#[test]
fn exact_samplers_match_the_symbol() {
    let cases = [
        family(0.0, 0.3, LevyFamily::Stable { alpha: 1.5, scale: 1.0, skew: 0.5 }),
        family(0.0, -0.2, LevyFamily::Stable { alpha: 1.0, scale: 0.7, skew: 0.5 }),
        family(0.0, 0.1, LevyFamily::Stable { alpha: 0.8, scale: 1.0, skew: -0.3 }),
        family(0.5, 0.2, LevyFamily::Gamma { shape: 2.0, rate: 3.0 }),
        family(0.0, 0.0, LevyFamily::CompoundPoisson { rate: 2.0, jumps: JumpLaw::Normal { mean: 0.3, sd: 0.5 } }),
        family(0.2, 0.4, LevyFamily::CompoundPoisson { rate: 1.5, jumps: JumpLaw::Exponential { rate: 2.0 } }),
    ];
    for t in &cases {
        let s = PathScheme::new(t, 0.5, 1e-2, 3).unwrap();
        assert!(!s.is_substituted());
        check_characteristic(t, &s, 0.5, 200_000);
    }
}

#[test]
fn substitution_matches_the_symbol() {
    let cgmy = family(0.0, 0.1, LevyFamily::Cgmy { c: 1.0, g: 2.0, m: 3.0, y: 0.5 });
    let s = PathScheme::new(&cgmy, 0.5, 1e-3, 3).unwrap();
    assert!(s.is_substituted());
    check_characteristic(&cgmy, &s, 0.5, 200_000);
    let stable = LevyTriplet::stable(1.5, 1.0, 0.5, 0.0).unwrap();
    let s = PathScheme::substitution(&stable, 0.5, 1e-3, 3).unwrap();
    check_characteristic(&stable, &s, 0.5, 200_000);
}

#[test]
fn erlang_survival_within_interval() {
    let t = family(0.0, 0.0, LevyFamily::CompoundPoisson { rate: 1.0, jumps: JumpLaw::Fixed { size: 1.0 } });
    let s = PathScheme::new(&t, 1e-3, 1e-2, 17).unwrap();
    let d = Domain::interval(-0.5, 1.5).unwrap();
    let est = estimate_survival(&s, 0.0, &d, &[0.0, 0.5, 1.0], 20_000).unwrap();
    assert_eq!(est.curve.values[0], 1.0);
    let (lo, hi) = est.curve.ci.as_ref().unwrap()[2];
    let exact = 2.0 * (-1f64).exp();
    assert!(lo <= exact && exact <= hi, "{lo} {hi}");
}

#[test]
fn brownian_occupation_and_exit_time() {
    let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let s = PathScheme::new(&t, 1e-3, 1e-2, 23).unwrap();
    let d = unit();
    let bins = uniform_bins(&d, 4);
    let stats = estimate_occupation(&s, 0.0, &d, &bins, 20_000, 20.0).unwrap();
    assert!((stats.occupation[2] - 0.375).abs() <= stats.occupation_ci[2], "{:?}", stats.occupation);
    assert!((stats.mean_exit_time - 1.0).abs() <= stats.mean_exit_ci);
    let total: f64 = stats.occupation.iter().sum();
    assert!((total - stats.mean_exit_time).abs() <= 1e-12 * total);
}

#[test]
fn brownian_step_halving_stays_within_interval() {
    let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let d = unit();
    let coarse = simulate(&PathScheme::new(&t, 2e-3, 1e-2, 31).unwrap(), 0.0, &d, 20.0, 100_000, &[]).unwrap();
    let fine = simulate(&PathScheme::new(&t, 1e-3, 1e-2, 31).unwrap(), 0.0, &d, 20.0, 100_000, &[]).unwrap();
    assert!((coarse.mean_exit_time - fine.mean_exit_time).abs() < fine.mean_exit_ci);
}

#[test]
fn small_jump_cutoff_refinement() {
    let t = LevyTriplet::stable(0.8, 1.0, 0.0, 0.0).unwrap();
    let d = unit();
    let grid = [0.0, 0.25, 0.5];
    let coarse = estimate_survival(&PathScheme::substitution(&t, 1e-3, 1e-2, 41).unwrap(), 0.0, &d, &grid, 20_000).unwrap();
    let fine = estimate_survival(&PathScheme::substitution(&t, 1e-3, 1e-3, 41).unwrap(), 0.0, &d, &grid, 20_000).unwrap();
    let (lo, hi) = fine.curve.ci.as_ref().unwrap()[2];
    assert!((coarse.curve.values[2] - fine.curve.values[2]).abs() < hi - lo);
}

#[test]
fn brownian_decay_rate() {
    let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let s = PathScheme::new(&t, 1e-3, 1e-2, 47).unwrap();
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    let est = estimate_survival(&s, 0.0, &unit(), &grid, 20_000).unwrap();
    let fit = fit_decay_rate_bootstrap(&est, FIT_WINDOW, 100, 5).unwrap();
    assert!((fit.rate - PI * PI / 8.0).abs() <= 2.0 * fit.stderr, "{fit:?}");
}

#[test]
fn synthetic_curve_fit_is_exact() {
    let times: Vec<f64> = (0..80).map(|k| k as f64 * 0.05).collect();
    let curve = SurvivalCurve {
        x0: 0.0,
        values: times.iter().map(|t| (-2.0 * t).exp()).collect(),
        times,
        ci: None,
        fitted_rate: None,
    };
    let fit = fit_decay_rate(&curve, FIT_WINDOW).unwrap();
    assert!((fit.rate - 2.0).abs() < 1e-12 && fit.stderr < 1e-10);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let t = LevyTriplet::cauchy(1.0).unwrap();
    let s = PathScheme::new(&t, 1e-3, 1e-2, 53).unwrap();
    let d = unit();
    let bins = uniform_bins(&d, 5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&s, 0.0, &d, 5.0, 3_000, &bins).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.exit_times, b.exit_times);
    assert_eq!(a.occupation, b.occupation);
    assert_eq!(a.mean_exit_time.to_bits(), b.mean_exit_time.to_bits());
}
