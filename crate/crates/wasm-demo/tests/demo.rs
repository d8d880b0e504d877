use levy_survival::levy::{LevyFamily, ProcessType};
use levy_survival_wasm::{classify_process, mc_survival, spectral_survival, ProcessInput};

fn brownian() -> ProcessInput {
    ProcessInput {
        a: 1.0,
        gamma: 0.0,
        family: LevyFamily::Brownian,
    }
}

#[test]
fn parses_page_payloads() {
    let p: ProcessInput = serde_json::from_str(r#"{"a":0,"gamma":0,"family":{"name":"stable","alpha":1.0,"scale":1.0,"skew":0.0}}"#).unwrap();
    assert!(matches!(p.family, LevyFamily::Stable { alpha, .. } if alpha == 1.0));
    let c: ProcessInput = serde_json::from_str(
        r#"{"family":{"name":"compound_poisson","rate":1.0,"jumps":{"law":"normal","mean":0.0,"sd":0.5}}}"#,
    )
    .unwrap();
    assert_eq!(c.a, 0.0);
}

#[test]
fn classification_reports_type_and_symbol() {
    let c = classify_process(&brownian(), -1.0, 1.0).unwrap();
    assert_eq!(c.report.process_type, Some(ProcessType::TypeII));
    assert!(c.report.spectral_ready && c.report.symmetric);
    // λ(z) = z²/2
    assert!(c.symbol.iter().all(|s| (s.re - s.z * s.z / 2.0).abs() < 1e-12 && s.im == 0.0));
    let poisson = ProcessInput {
        a: 0.0,
        gamma: -1.0,
        family: LevyFamily::Poisson { rate: 1.0 },
    };
    let c = classify_process(&poisson, -1.0, 1.0).unwrap();
    assert_eq!(c.report.process_type, Some(ProcessType::TypeI));
    assert!(!c.report.spectral_ready);
}

#[test]
fn spectral_survival_matches_brownian_oracle() {
    let r = spectral_survival(&brownian(), -1.0, 1.0, 0.0, 100.0, 5.0).unwrap();
    let lambda1 = 8.0 / (std::f64::consts::PI * std::f64::consts::PI);
    assert!((r.lambda1 - lambda1).abs() < 1e-3 * lambda1);
    assert!((r.c1 - 4.0 / std::f64::consts::PI).abs() < 1e-3);
    assert!((r.mean_exit_time - 1.0).abs() < 1e-9);
    assert_eq!(r.times.len(), r.survival.len());
    assert_eq!(r.survival[0], 1.0);
}

#[test]
fn spectral_requests_are_bounded_and_gated() {
    assert!(spectral_survival(&brownian(), -1.0, 1.0, 0.0, 400.0, 5.0).unwrap_err().contains("too large"));
    let poisson = ProcessInput {
        a: 0.0,
        gamma: -1.0,
        family: LevyFamily::Poisson { rate: 1.0 },
    };
    assert!(spectral_survival(&poisson, -1.0, 1.0, 0.0, 50.0, 5.0).unwrap_err().contains("Type II gate"));
}

#[test]
fn monte_carlo_brackets_the_spectral_curve() {
    let spectral = spectral_survival(&brownian(), -1.0, 1.0, 0.0, 100.0, 2.0).unwrap();
    let mc = mc_survival(&brownian(), -1.0, 1.0, 0.0, 20_000, 1e-3, 9, 2.0).unwrap();
    assert_eq!(mc.times, spectral.times);
    let k = 40; // t = 1
    let (lo, hi) = mc.ci[k];
    assert!(lo <= spectral.survival[k] && spectral.survival[k] <= hi, "{lo} {hi} {}", spectral.survival[k]);
    assert!(mc_survival(&brownian(), -1.0, 1.0, 0.0, 500, 1e-3, 9, 2.0).is_err());
}
