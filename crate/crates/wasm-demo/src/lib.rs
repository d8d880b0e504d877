//! Small browser-facing wrappers: classification, spectral survival and a Monte Carlo check.

use levy_survival::levy::{levy_symbol, validate_problem, LevyFamily, LevyMeasureSpec, LevyTriplet, ValidationReport};
use levy_survival::montecarlo::{estimate_survival, PathScheme};
use levy_survival::operator::{Domain, OperatorSet};
use levy_survival::spectral::{analyze_spectrum, asymptotics, survival_curve, LeadingEigenvalue};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; dense solves beyond this stall the tab.
pub const MAX_UNKNOWNS: usize = 400;
/// Path budget for the in-browser simulation.
pub const MAX_PATHS: usize = 50_000;

/// `(A, γ)` plus a named family, as sent by the page.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessInput {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub gamma: f64,
    pub family: LevyFamily,
}

impl ProcessInput {
    pub fn triplet(&self) -> Result<LevyTriplet, String> {
        LevyTriplet::new(self.a, self.gamma, LevyMeasureSpec::Family(self.family)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolPoint {
    pub z: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub description: String,
    pub report: ValidationReport,
    pub symbol: Vec<SymbolPoint>,
}

pub fn classify_process(process: &ProcessInput, a: f64, b: f64) -> Result<Classification, String> {
    let t = process.triplet()?;
    let d = Domain::interval(a, b).map_err(|e| e.to_string())?;
    let symbol = (1..=40)
        .map(|k| {
            let z = 0.25 * k as f64;
            levy_symbol(&t, z).map(|v| SymbolPoint { z, re: v.re, im: v.im })
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Classification {
        description: t.describe(),
        report: validate_problem(&t, &d),
        symbol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub rate: f64,
    pub c1: f64,
    pub mean_exit_time: f64,
    pub leading: Vec<LeadingEigenvalue>,
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
}

fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(t_max > 0.0 && t_max.is_finite()) || points < 2 {
        return Err("need t_max > 0 and at least two time points".into());
    }
    Ok((0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect())
}

pub fn spectral_survival(process: &ProcessInput, a: f64, b: f64, x0: f64, resolution: f64, t_max: f64) -> Result<SpectralResult, String> {
    let t = process.triplet()?;
    let d = Domain::interval(a, b).map_err(|e| e.to_string())?;
    let report = validate_problem(&t, &d);
    if !report.spectral_ready {
        return Err(report.messages.join("; "));
    }
    if (b - a) * resolution > MAX_UNKNOWNS as f64 {
        return Err(format!("grid too large for the browser: keep (b - a)·resolution ≤ {MAX_UNKNOWNS}"));
    }
    let ops = OperatorSet::build(&t, &d, resolution, None).map_err(|e| e.to_string())?;
    let eig = analyze_spectrum(&ops.b, 6).map_err(|e| e.to_string())?;
    let asym = asymptotics(&eig, &ops.grid, x0, None).map_err(|e| e.to_string())?;
    let times = time_grid(t_max, 81)?;
    let curve = survival_curve(&ops.l, &ops.grid, x0, &times).map_err(|e| e.to_string())?;
    let i = ops
        .grid
        .locate(x0)
        .map_err(|e| e.to_string())?
        .ok_or("x0 must be an interior grid node")?;
    Ok(SpectralResult {
        lambda1: eig.lambda1,
        rate: eig.rate(),
        c1: asym.c1,
        mean_exit_time: ops.mean_exit_times()[i],
        leading: eig.leading,
        times,
        survival: curve.values,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct McResult {
    pub n_paths: usize,
    pub mean_exit_time: f64,
    pub mean_exit_ci: f64,
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
}

pub fn mc_survival(process: &ProcessInput, a: f64, b: f64, x0: f64, n_paths: usize, dt: f64, seed: u64, t_max: f64) -> Result<McResult, String> {
    let t = process.triplet()?;
    let d = Domain::interval(a, b).map_err(|e| e.to_string())?;
    if !(1000..=MAX_PATHS).contains(&n_paths) {
        return Err(format!("paths must lie in 1000..={MAX_PATHS}"));
    }
    if !(dt >= 1e-4 && dt < t_max) {
        return Err("dt must lie in [1e-4, t_max)".into());
    }
    let scheme = PathScheme::new(&t, dt, 1e-2, seed).map_err(|e| e.to_string())?;
    let times = time_grid(t_max, 81)?;
    let est = estimate_survival(&scheme, x0, &d, &times, n_paths).map_err(|e| e.to_string())?;
    Ok(McResult {
        n_paths,
        mean_exit_time: est.stats.mean_exit_time,
        mean_exit_ci: est.stats.mean_exit_ci,
        times,
        survival: est.curve.values,
        ci: est.curve.ci.unwrap_or_default(),
    })
}

fn parse(process: &str) -> Result<ProcessInput, JsError> {
    serde_json::from_str(process).map_err(|e| JsError::new(&format!("process: {e}")))
}

fn to_json<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Process type, support, symmetry and `λ(z)` on `z ∈ (0, 10]`, as JSON.
#[wasm_bindgen]
pub fn classify(process: &str, a: f64, b: f64) -> Result<String, JsError> {
    to_json(classify_process(&parse(process)?, a, b))
}

/// Principal eigenvalue, `c₁` and the survival curve on `[0, t_max]`, as JSON.
#[wasm_bindgen]
pub fn spectral(process: &str, a: f64, b: f64, x0: f64, resolution: f64, t_max: f64) -> Result<String, JsError> {
    to_json(spectral_survival(&parse(process)?, a, b, x0, resolution, t_max))
}

/// Monte Carlo survival estimate with 95% intervals, as JSON.
#[wasm_bindgen]
pub fn simulate(process: &str, a: f64, b: f64, x0: f64, n_paths: u32, dt: f64, seed: u32, t_max: f64) -> Result<String, JsError> {
    to_json(mc_survival(&parse(process)?, a, b, x0, n_paths as usize, dt, seed as u64, t_max))
}
