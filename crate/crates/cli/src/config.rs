use std::path::Path;

use levy_survival::levy::{Atom, LevyFamily, LevyMeasureSpec, LevyTriplet};
use levy_survival::operator::{Domain, MIN_RESOLUTION};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub process: ProcessConfig,
    /// Disjoint intervals `[[a, b], ...]`.
    pub domain: Vec<[f64; 2]>,
    /// Grid points per unit length.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    /// Kernel anchor; defaults to `max(1, diameter)`.
    #[serde(default)]
    pub anchor: Option<f64>,
    /// Starting point, inside the domain.
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub time: TimeConfig,
    /// Laplace arguments `s ≥ 0`.
    #[serde(default = "default_laplace")]
    pub laplace: Vec<f64>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    /// Monte Carlo settings; the simulation stages are off when absent.
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub stages: Stages,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub reference: Option<Reference>,
}

/// `(A, γ)` plus exactly one of `family` or `atoms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub family: Option<LevyFamily>,
    #[serde(default)]
    pub atoms: Option<Vec<Atom>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub step: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_max: 10.0, step: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Number of leading eigenvalues of `B`.
    pub leading: usize,
    /// Random complex vectors for the sectoriality check.
    pub sectoriality_trials: usize,
    pub seed: u64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            leading: 10,
            sectoriality_trials: 200,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Cell width of the kernel table.
    pub h: f64,
    /// Half-width of the tabulated offset range.
    pub radius: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { h: 1e-3, radius: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Required; `--seed` overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Simulation horizon; defaults to `time.t_max`.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Jumps below this size are replaced by a Gaussian when no exact sampler exists.
    #[serde(default = "default_cutoff")]
    pub small_jump_cutoff: f64,
    /// Occupation bins per interval.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Bootstrap replicates for the decay-rate standard error; 0 keeps the least-squares error.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Stages {
    pub kernel: bool,
    pub assemble: bool,
    pub eigen: bool,
    pub survival: bool,
    pub laplace: bool,
    pub mc: bool,
    pub compare: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Self {
            kernel: true,
            assemble: true,
            eigen: true,
            survival: true,
            laplace: true,
            mc: true,
            compare: true,
        }
    }
}

/// Pass thresholds for the checks recorded in the summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Max `|K̂(z) - λ(z)/z²| / |λ(z)/z²|` over the check frequencies.
    pub symbol_residual: f64,
    /// Allowed negative excursion of `Re K̂`.
    pub symbol_positivity: f64,
    /// Max `|(-L)B - I|`.
    pub quasipotential_residual: f64,
    /// Allowed `-min B / max B`.
    pub quasipotential_negativity: f64,
    /// Disk slack relative to `λ₁`.
    pub disk_slack: f64,
    /// Imaginary parts and asymmetry of `B` for symmetric processes, relative to `λ₁`.
    pub symmetric: f64,
    /// Relative gap between the fitted spectral decay rate and `1/λ₁`.
    pub survival_rate: f64,
    /// Relative gap between the Laplace transform and the quadrature of the curve.
    pub laplace: f64,
    /// Rate agreement in Monte Carlo standard errors.
    pub rate_sigma: f64,
    /// `c₁` agreement in Monte Carlo standard errors.
    pub c1_sigma: f64,
    /// Per-bin occupation agreement in Monte Carlo standard errors.
    pub occupation_sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symbol_residual: 1e-3,
            symbol_positivity: 1e-8,
            quasipotential_residual: 1e-10,
            quasipotential_negativity: 1e-8,
            disk_slack: 1e-6,
            symmetric: 1e-8,
            survival_rate: 5e-3,
            laplace: 1e-3,
            rate_sigma: 2.0,
            c1_sigma: 2.0,
            occupation_sigma: 2.0,
        }
    }
}

/// Known values to check against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default = "default_lambda1_rel")]
    pub lambda1_rel: f64,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default = "default_c1_rel")]
    pub c1_rel: f64,
    /// `[t, p]` pairs that must fall inside the Monte Carlo 95% interval.
    #[serde(default)]
    pub mc_survival: Vec<[f64; 2]>,
}

fn default_resolution() -> f64 {
    200.0
}
fn default_laplace() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}
fn default_paths() -> usize {
    100_000
}
fn default_dt() -> f64 {
    1e-4
}
fn default_cutoff() -> f64 {
    1e-2
}
fn default_bins() -> usize {
    4
}
fn default_bootstrap() -> usize {
    200
}
fn default_lambda1_rel() -> f64 {
    1e-2
}
fn default_c1_rel() -> f64 {
    2e-2
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Validated problem ready for the pipeline.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: RunConfig,
    pub triplet: LevyTriplet,
    pub domain: Domain,
    pub t_grid: Vec<f64>,
    /// Monte Carlo seed after the command-line override.
    pub seed: Option<u64>,
    /// SHA-256 of the process, domain and starting point.
    pub hash: String,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Problem {
    pub fn new(config: RunConfig, seed_override: Option<u64>) -> Result<Self, CliError> {
        let p = &config.process;
        let measure = match (&p.family, &p.atoms) {
            (Some(f), None) => LevyMeasureSpec::Family(*f),
            (None, Some(atoms)) => LevyMeasureSpec::Atoms(atoms.clone()),
            _ => return Err(config_error("process needs exactly one of `family` or `atoms`")),
        };
        let triplet = LevyTriplet::new(p.a, p.gamma, measure).map_err(|e| config_error(e.to_string()))?;
        let domain = Domain::new(config.domain.iter().map(|[a, b]| (*a, *b)).collect()).map_err(|e| config_error(e.to_string()))?;
        if !(config.resolution >= MIN_RESOLUTION) {
            return Err(config_error(format!("resolution {} below {MIN_RESOLUTION}", config.resolution)));
        }
        if !domain.contains_open(config.x0) {
            return Err(config_error(format!("x0 = {} is not inside the domain", config.x0)));
        }
        if let Some(a) = config.anchor {
            if !(a.is_finite() && a > 0.0) {
                return Err(config_error("anchor must be positive"));
            }
        }
        let TimeConfig { t_max, step } = config.time;
        if !(step > 0.0 && t_max.is_finite() && t_max >= 4.0 * step) {
            return Err(config_error("time grid needs step > 0 and t_max ≥ 4·step"));
        }
        let n = (t_max / step).round() as usize;
        let t_grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        if config.laplace.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(config_error("laplace arguments must be finite and nonnegative"));
        }
        if !(config.kernel.h > 0.0 && config.kernel.radius > config.kernel.h) {
            return Err(config_error("kernel needs 0 < h < radius"));
        }
        if !(1..=20).contains(&config.spectrum.leading) {
            return Err(config_error("spectrum.leading must lie in 1..=20"));
        }
        let mut seed = None;
        if let Some(mc) = config.mc.as_ref().filter(|_| config.stages.mc) {
            seed = seed_override.or(mc.seed);
            if seed.is_none() {
                return Err(config_error("Monte Carlo is enabled but no seed was given (set mc.seed or --seed)"));
            }
            if mc.n_paths < 1000 {
                return Err(config_error("mc.n_paths must be at least 1000"));
            }
            if !(mc.dt > 0.0 && mc.dt < t_max) {
                return Err(config_error("mc.dt must lie in (0, t_max)"));
            }
            if mc.horizon.is_some_and(|h| !(h > mc.dt)) {
                return Err(config_error("mc.horizon must exceed mc.dt"));
            }
            if mc.bins == 0 {
                return Err(config_error("mc.bins must be positive"));
            }
        }
        let hash = problem_hash(&triplet, &domain, config.x0);
        Ok(Self {
            config,
            triplet,
            domain,
            t_grid,
            seed,
            hash,
        })
    }

    pub fn anchor(&self) -> f64 {
        self.config.anchor.unwrap_or_else(|| levy_survival::kernel::default_anchor(&self.domain))
    }
}

/// Identifies a (process, domain, start) triple; both sides of a comparison must agree on it.
pub fn problem_hash(triplet: &LevyTriplet, domain: &Domain, x0: f64) -> String {
    let mut h = Sha256::new();
    h.update(triplet.describe().as_bytes());
    for (a, b) in domain.intervals() {
        h.update(format!("|{a:e},{b:e}").as_bytes());
    }
    h.update(format!("|x0={x0:e}").as_bytes());
    hex::encode(h.finalize())
}
