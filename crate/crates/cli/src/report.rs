use levy_survival::montecarlo::SurvivalEstimate;
use levy_survival::operator::OperatorSet;
use levy_survival::spectral::RateFit;
use levy_survival::Result as CoreResult;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::CliError;

/// One pass/fail verdict with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference: None,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// `value ≥ -tolerance`.
    pub fn at_least_neg(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference: None,
            tolerance,
            pass: value >= -tolerance,
        }
    }

    /// `|value - reference| ≤ tolerance·|reference|`.
    pub fn relative(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference: Some(reference),
            tolerance,
            pass: (value - reference).abs() <= tolerance * reference.abs(),
        }
    }

    /// `|value - reference| ≤ tolerance` in absolute terms.
    pub fn absolute(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference: Some(reference),
            tolerance,
            pass: (value - reference).abs() <= tolerance,
        }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            reference: Some(1.0),
            tolerance: 0.0,
            pass,
        }
    }
}

/// Spectral quantities entering a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSide {
    pub problem_hash: String,
    pub lambda1: f64,
    pub c1: f64,
    /// Expected time spent in each bin before exit, from the row of `B` at `x0`.
    pub occupation: Vec<f64>,
    pub bins: Vec<(f64, f64)>,
}

/// Monte Carlo quantities entering a comparison.
#[derive(Debug, Clone, Serialize)]
pub struct McSide {
    pub problem_hash: String,
    pub estimate: SurvivalEstimate,
    pub fit: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub spectral: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    /// `|spectral - mc| / stderr`.
    pub deviation_sigma: f64,
}

/// Spectral prediction at `t ≈ 3λ₁` against the Monte Carlo estimate there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPoint {
    pub t: f64,
    pub model: f64,
    pub mc: f64,
    pub ci: (f64, f64),
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub problem_hash: String,
    pub rate_spectral: f64,
    pub rate_mc: f64,
    pub rate_stderr: f64,
    pub c1_spectral: f64,
    /// `exp(intercept)` of the Monte Carlo fit.
    pub c1_mc: f64,
    pub c1_stderr: f64,
    pub asymptotic: Option<AsymptoticPoint>,
    pub occupation: Vec<OccupationRow>,
    pub max_occupation_sigma: f64,
    pub checks: Vec<Check>,
}

const Z95: f64 = 1.959_963_984_540_054;

/// `Σ_j B(x0, j)` over interior nodes in each bin; nodes on a bin edge count half.
pub fn spectral_occupation(ops: &OperatorSet, x0: f64, bins: &[(f64, f64)]) -> CoreResult<Vec<f64>> {
    let Some(i) = ops.grid.locate(x0)? else {
        return Ok(vec![0.0; bins.len()]);
    };
    let nodes = ops.grid.interior_nodes();
    let row = ops.b.row(i);
    Ok(bins
        .iter()
        .map(|&(lo, hi)| {
            let eps = 1e-9 * (hi - lo);
            nodes
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    if (x - lo).abs() <= eps || (x - hi).abs() <= eps {
                        0.5 * row[j]
                    } else if x > lo && x < hi {
                        row[j]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// Spectral against Monte Carlo on the same problem.
pub fn compare(spectral: &SpectralSide, mc: &McSide, tol: &Tolerances) -> Result<ComparisonReport, CliError> {
    let stage_error = |message: String| CliError::Stage {
        stage: "compare".into(),
        message,
    };
    if spectral.problem_hash != mc.problem_hash {
        return Err(stage_error(format!(
            "problem mismatch: spectral {} vs Monte Carlo {}",
            spectral.problem_hash, mc.problem_hash
        )));
    }
    let fit = mc.fit.ok_or_else(|| stage_error("Monte Carlo decay-rate fit unavailable".into()))?;
    let stats = &mc.estimate.stats;
    if stats.bins != spectral.bins {
        return Err(stage_error("occupation bins differ between the two sides".into()));
    }
    let rate_spectral = 1.0 / spectral.lambda1;
    let c1_mc = fit.intercept.exp();
    let c1_stderr = c1_mc * fit.intercept_stderr;
    let occupation: Vec<OccupationRow> = spectral
        .bins
        .iter()
        .zip(&spectral.occupation)
        .zip(stats.occupation.iter().zip(&stats.occupation_ci))
        .map(|((&(lo, hi), &s), (&m, &half))| {
            let se = half / Z95;
            OccupationRow {
                bin_left: lo,
                bin_right: hi,
                spectral: s,
                mc: m,
                mc_stderr: se,
                deviation_sigma: if se > 0.0 { (s - m).abs() / se } else { f64::INFINITY },
            }
        })
        .collect();
    let max_occupation_sigma = occupation.iter().map(|r| r.deviation_sigma).fold(0.0, f64::max);
    let curve = &mc.estimate.curve;
    let target = 3.0 * spectral.lambda1;
    let asymptotic = curve.ci.as_ref().and_then(|ci| {
        let k = curve
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))?
            .0;
        let t = curve.times[k];
        if (t - target).abs() > 0.5 * target {
            return None;
        }
        let model = spectral.c1 * (-t / spectral.lambda1).exp();
        let (lo, hi) = ci[k];
        Some(AsymptoticPoint {
            t,
            model,
            mc: curve.values[k],
            ci: (lo, hi),
            inside: lo <= model && model <= hi,
        })
    });
    let mut checks = vec![
        Check::absolute("compare.rate_sigma", fit.rate, rate_spectral, tol.rate_sigma * fit.stderr),
        Check::absolute("compare.c1_sigma", c1_mc, spectral.c1, tol.c1_sigma * c1_stderr),
        Check::at_most("compare.occupation_sigma", max_occupation_sigma, tol.occupation_sigma),
    ];
    if let Some(a) = &asymptotic {
        checks.push(Check::flag("compare.asymptotic_in_ci", a.inside));
    }
    Ok(ComparisonReport {
        problem_hash: spectral.problem_hash.clone(),
        rate_spectral,
        rate_mc: fit.rate,
        rate_stderr: fit.stderr,
        c1_spectral: spectral.c1,
        c1_mc,
        c1_stderr,
        asymptotic,
        occupation,
        max_occupation_sigma,
        checks,
    })
}
