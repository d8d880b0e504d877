//! Path simulation of the killed process: exit times, survival estimates with
//! Wilson intervals, decay-rate fits and occupation times.
//!
//! Every path draws from its own ChaCha8 stream (`stream = path index`), and
//! paths are reduced in fixed-size chunks in index order, so results do not
//! depend on the worker count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::levy::{levy_symbol, JumpLaw, LevyFamily, LevyMeasureSpec, LevyTriplet};
use crate::measure::Side;
use crate::operator::Domain;
use crate::spectral::{fit_log_slope, RateFit, SurvivalCurve};

const CHUNK: usize = 256;
const Z95: f64 = 1.959_963_984_540_054;

/// Tabulated inverse of one side's continuous tail above the cutoff.
#[derive(Debug, Clone)]
struct TailTable {
    radii: Vec<f64>,
    tails: Vec<f64>,
}

impl TailTable {
    fn build(side: &Side, eps: f64) -> Result<Option<Self>> {
        let atoms_above = |t: f64| -> f64 { side.atoms.iter().filter(|(r, _)| *r > t).map(|(_, m)| m).sum() };
        let continuous = |t: f64| -> Result<f64> { Ok((side.tail(t, false)? - atoms_above(t)).max(0.0)) };
        let total = continuous(eps)?;
        if total <= 0.0 {
            return Ok(None);
        }
        let mut radii = vec![eps];
        let mut tails = vec![total];
        let mut r = eps;
        while r < 1e12 {
            r *= 1.02;
            let t = continuous(r)?;
            radii.push(r);
            tails.push(t);
            if t <= 1e-14 * total {
                break;
            }
        }
        Ok(Some(Self { radii, tails }))
    }

    fn mass(&self) -> f64 {
        self.tails[0]
    }

    /// Radius with continuous tail `u · mass` for `u ∈ (0, 1]`.
    fn invert(&self, u: f64) -> f64 {
        let target = u * self.mass();
        let n = self.tails.len();
        // tails are nonincreasing: first index with tail < target
        let k = self.tails.partition_point(|&t| t >= target);
        if k >= n {
            let (r1, r2, t1, t2) = (self.radii[n - 2], self.radii[n - 1], self.tails[n - 2], self.tails[n - 1]);
            if t2 <= 0.0 || t1 <= t2 {
                return r2;
            }
            let slope = (t1 / t2).ln() / (r2 / r1).ln();
            return r2 * (t2 / target).powf(1.0 / slope);
        }
        let k = k.max(1);
        let (r1, r2, t1, t2) = (self.radii[k - 1], self.radii[k], self.tails[k - 1], self.tails[k]);
        if t2 <= 0.0 {
            return r1 + (r2 - r1) * (t1 - target) / t1;
        }
        let w = (t1 / target).ln() / (t1 / t2).ln();
        r1 * (r2 / r1).powf(w)
    }
}

#[derive(Debug, Clone)]
enum JumpSampler {
    Fixed(f64),
    Exponential(f64),
    Normal { mean: f64, sd: f64 },
    /// Atoms and tabulated continuous parts, chosen by mass.
    Mixture {
        components: Vec<Component>,
        cumulative: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
enum Component {
    Atom(f64),
    Table { table: TailTable, sign: f64 },
}

impl JumpSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            JumpSampler::Fixed(x) => *x,
            JumpSampler::Exponential(rate) => rng.sample::<f64, _>(Exp1) / rate,
            JumpSampler::Normal { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            JumpSampler::Mixture { components, cumulative } => {
                let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
                let k = cumulative.partition_point(|&c| c <= u).min(components.len() - 1);
                match &components[k] {
                    Component::Atom(x) => *x,
                    Component::Table { table, sign } => sign * table.invert(1.0 - rng.random::<f64>()),
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum IncrementLaw {
    Gaussian,
    CompoundPoisson { rate: f64, jumps: JumpSampler },
    Stable { alpha: f64, sigma: f64, beta: f64, mu: f64 },
    Gamma { shape: f64, rate: f64 },
}

/// One-step increment law of the process together with the step size.
#[derive(Debug, Clone)]
pub struct PathScheme {
    law: IncrementLaw,
    drift: f64,
    /// Variance rate of the Gaussian part, including substituted small jumps.
    diffusion: f64,
    dt: f64,
    small_jump_cutoff: f64,
    substituted: bool,
    seed: u64,
}

fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean > 30.0 {
        return rand_distr::Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0);
    }
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut n = 0;
    while u > cdf && n < 1000 {
        n += 1;
        p *= mean / n as f64;
        cdf += p;
    }
    n
}

/// Standard `S_α(1, β, 0)` variate by the Chambers–Mallows–Stuck transform.
fn standard_stable(alpha: f64, beta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 && beta == 0.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        let a = FRAC_PI_2 + beta * v;
        (a * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / a).ln()) / FRAC_PI_2
    } else {
        let t = beta * (PI * alpha / 2.0).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(0.5 / alpha);
        s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
            * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

impl PathScheme {
    /// Exact increments where the family allows, small-jump substitution otherwise.
    pub fn new(triplet: &LevyTriplet, dt: f64, small_jump_cutoff: f64, seed: u64) -> Result<Self> {
        Self::check_steps(dt, small_jump_cutoff)?;
        let a = triplet.a();
        let exact = |law, drift| {
            Ok(Self {
                law,
                drift,
                diffusion: a,
                dt,
                small_jump_cutoff,
                substituted: false,
                seed,
            })
        };
        match triplet.measure() {
            LevyMeasureSpec::Family(family) => match *family {
                LevyFamily::Brownian => exact(IncrementLaw::Gaussian, triplet.gamma()),
                LevyFamily::Poisson { rate } => exact(
                    IncrementLaw::CompoundPoisson {
                        rate,
                        jumps: JumpSampler::Fixed(1.0),
                    },
                    triplet.finite_variation_drift()?,
                ),
                LevyFamily::CompoundPoisson { rate, jumps } => {
                    let jumps = match jumps {
                        JumpLaw::Fixed { size } => JumpSampler::Fixed(size),
                        JumpLaw::Exponential { rate } => JumpSampler::Exponential(rate),
                        JumpLaw::Normal { mean, sd } => JumpSampler::Normal { mean, sd },
                    };
                    exact(IncrementLaw::CompoundPoisson { rate, jumps }, triplet.finite_variation_drift()?)
                }
                LevyFamily::Stable { alpha, scale, skew } => {
                    // location from the symbol at z = 1 so the drift convention matches
                    let im = levy_symbol(triplet, 1.0)?.im;
                    let mu = if alpha == 1.0 {
                        -im
                    } else {
                        -im - scale.powf(alpha) * skew * (PI * alpha / 2.0).tan()
                    };
                    exact(
                        IncrementLaw::Stable {
                            alpha,
                            sigma: scale,
                            beta: skew,
                            mu,
                        },
                        0.0,
                    )
                }
                LevyFamily::Gamma { shape, rate } => {
                    exact(IncrementLaw::Gamma { shape, rate }, triplet.finite_variation_drift()?)
                }
                LevyFamily::Cgmy { .. } => Self::substitution(triplet, dt, small_jump_cutoff, seed),
            },
            LevyMeasureSpec::Atoms(atoms) => {
                let rate: f64 = atoms.iter().map(|a| a.mass).sum();
                let mut cumulative = Vec::new();
                let mut acc = 0.0;
                for atom in atoms {
                    acc += atom.mass;
                    cumulative.push(acc);
                }
                let components = atoms.iter().map(|a| Component::Atom(a.position)).collect();
                exact(
                    IncrementLaw::CompoundPoisson {
                        rate,
                        jumps: JumpSampler::Mixture { components, cumulative },
                    },
                    triplet.finite_variation_drift()?,
                )
            }
            LevyMeasureSpec::Density(_) => Self::substitution(triplet, dt, small_jump_cutoff, seed),
        }
    }

    /// Jumps of size `≥ ε` as compound Poisson, smaller ones replaced by a
    /// Gaussian of variance `∫_{|x|<ε} x² ν(dx)`.
    pub fn substitution(triplet: &LevyTriplet, dt: f64, small_jump_cutoff: f64, seed: u64) -> Result<Self> {
        Self::check_steps(dt, small_jump_cutoff)?;
        let eps = small_jump_cutoff;
        if eps >= 1.0 {
            return Err(LevyError::Configuration(format!("small-jump cutoff {eps} must be below 1")));
        }
        let parts = triplet.parts();
        let mut components = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (positive, side) in [(true, &parts.plus), (false, &parts.minus)] {
            let sign = if positive { 1.0 } else { -1.0 };
            for &(r, m) in &side.atoms {
                if r >= eps {
                    acc += m;
                    cumulative.push(acc);
                    components.push(Component::Atom(sign * r));
                }
            }
            if let Some(table) = TailTable::build(side, eps)? {
                acc += table.mass();
                cumulative.push(acc);
                components.push(Component::Table { table, sign });
            }
        }
        let small = parts.small_jump_variance(eps)?;
        let drift = triplet.gamma() - parts.signed_first_moment(eps, 1.0)?;
        let law = if components.is_empty() {
            IncrementLaw::Gaussian
        } else {
            IncrementLaw::CompoundPoisson {
                rate: acc,
                jumps: JumpSampler::Mixture { components, cumulative },
            }
        };
        Ok(Self {
            law,
            drift,
            diffusion: triplet.a() + small,
            dt,
            small_jump_cutoff: eps,
            substituted: true,
            seed,
        })
    }

    fn check_steps(dt: f64, eps: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LevyError::Configuration(format!("step {dt} must be positive")));
        }
        if !(eps > 0.0) {
            return Err(LevyError::Configuration(format!("small-jump cutoff {eps} must be positive")));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn small_jump_cutoff(&self) -> f64 {
        self.small_jump_cutoff
    }

    pub fn is_substituted(&self) -> bool {
        self.substituted
    }

    /// Gaussian variance rate used for the continuous part and the bridge test.
    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Random stream of one path.
    pub fn path_rng(&self, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        rng
    }

    /// One increment over `dt`.
    pub fn sample_increment(&self, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mut x = self.drift * dt;
        if self.diffusion > 0.0 {
            x += (self.diffusion * dt).sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        match &self.law {
            IncrementLaw::Gaussian => {}
            IncrementLaw::CompoundPoisson { rate, jumps } => {
                for _ in 0..poisson_count(rate * dt, rng) {
                    x += jumps.sample(rng);
                }
            }
            IncrementLaw::Stable { alpha, sigma, beta, mu } => {
                let s = standard_stable(*alpha, *beta, rng);
                if *alpha == 1.0 {
                    let sd = sigma * dt;
                    x += sd * s + mu * dt;
                    if *beta != 0.0 {
                        x += beta * sd * sd.ln() / FRAC_PI_2;
                    }
                } else {
                    x += sigma * dt.powf(1.0 / alpha) * s + mu * dt;
                }
            }
            IncrementLaw::Gamma { shape, rate } => {
                x += rand_distr::Gamma::new(shape * dt, 1.0 / rate)
                    .map(|g| g.sample(rng))
                    .unwrap_or(0.0);
            }
        }
        x
    }
}

/// One path's exit: `time` is the first step time outside Δ, `None` when the
/// path survives the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitObservation {
    pub time: Option<f64>,
    pub steps: u64,
}

fn interval_of(domain: &Domain, x: f64) -> Option<(f64, f64)> {
    domain.intervals().iter().copied().find(|&(a, b)| a <= x && x <= b)
}

/// Probability that a Brownian bridge of variance `v` from `x` to `y` leaves `[a, b]`.
fn bridge_exit(x: f64, y: f64, a: f64, b: f64, v: f64) -> f64 {
    let lower = (-2.0 * (x - a) * (y - a) / v).exp();
    let upper = (-2.0 * (b - x) * (b - y) / v).exp();
    1.0 - (1.0 - lower) * (1.0 - upper)
}

/// Walks one path, counting steps spent in each bin (by the position at the
/// start of the step).
fn walk(
    scheme: &PathScheme,
    path: u64,
    x0: f64,
    domain: &Domain,
    max_steps: u64,
    bins: &[(f64, f64)],
    counts: &mut [u64],
) -> ExitObservation {
    let Some(mut current) = interval_of(domain, x0) else {
        return ExitObservation {
            time: Some(0.0),
            steps: 0,
        };
    };
    let mut rng = scheme.path_rng(path);
    let dt = scheme.dt;
    let v = scheme.diffusion * dt;
    let mut x = x0;
    for step in 1..=max_steps {
        if !bins.is_empty() {
            let k = bins.partition_point(|&(lo, _)| lo <= x);
            if k > 0 && x <= bins[k - 1].1 {
                counts[k - 1] += 1;
            }
        }
        let y = x + scheme.sample_increment(dt, &mut rng);
        let exited = if current.0 <= y && y <= current.1 {
            v > 0.0 && {
                let p = bridge_exit(x, y, current.0, current.1, v);
                p > 0.0 && rng.random::<f64>() < p
            }
        } else {
            match interval_of(domain, y) {
                Some(next) => {
                    current = next;
                    false
                }
                None => true,
            }
        };
        if exited {
            return ExitObservation {
                time: Some(step as f64 * dt),
                steps: step,
            };
        }
        x = y;
    }
    ExitObservation {
        time: None,
        steps: max_steps,
    }
}

/// Single exit observation for path index `path`. A start outside Δ exits at 0.
pub fn simulate_exit(scheme: &PathScheme, path: u64, x0: f64, domain: &Domain, horizon: f64) -> ExitObservation {
    let max_steps = (horizon / scheme.dt).round() as u64;
    walk(scheme, path, x0, domain, max_steps, &[], &mut [])
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitStats {
    pub n_paths: usize,
    pub horizon: f64,
    /// Exit time per path, `None` when censored at the horizon.
    pub exit_times: Vec<Option<f64>>,
    pub bins: Vec<(f64, f64)>,
    /// Mean time spent in each bin before exit.
    pub occupation: Vec<f64>,
    /// 95% half-widths of the occupation means.
    pub occupation_ci: Vec<f64>,
    /// Mean of `min(T, horizon)`; equals the summed occupation when the bins cover Δ.
    pub mean_exit_time: f64,
    pub mean_exit_ci: f64,
}

impl ExitStats {
    pub fn censored(&self) -> usize {
        self.exit_times.iter().filter(|t| t.is_none()).count()
    }

    /// Fraction of paths with `T > t`.
    pub fn survival_at(&self, t: f64) -> f64 {
        let alive = self.exit_times.iter().filter(|e| e.is_none_or(|s| s > t)).count();
        alive as f64 / self.n_paths as f64
    }
}

/// Simulates `n_paths` paths up to `horizon`, recording exit times and bin occupation.
pub fn simulate(
    scheme: &PathScheme,
    x0: f64,
    domain: &Domain,
    horizon: f64,
    n_paths: usize,
    bins: &[(f64, f64)],
) -> Result<ExitStats> {
    if n_paths == 0 {
        return Err(LevyError::Configuration("no paths requested".into()));
    }
    if !(horizon > 0.0) {
        return Err(LevyError::Configuration(format!("horizon {horizon} must be positive")));
    }
    if bins.windows(2).any(|w| w[1].0 < w[0].1) || bins.iter().any(|(lo, hi)| lo >= hi) {
        return Err(LevyError::Configuration("bins must be ordered and disjoint".into()));
    }
    let max_steps = (horizon / scheme.dt).round() as u64;
    let nb = bins.len();
    let chunks: Vec<(Vec<Option<f64>>, Vec<f64>, Vec<f64>, f64, f64)> = (0..n_paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut times = Vec::with_capacity(CHUNK);
            let mut sum = vec![0.0; nb];
            let mut sumsq = vec![0.0; nb];
            let mut counts = vec![0u64; nb];
            let (mut tsum, mut tsq) = (0.0, 0.0);
            for path in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                counts.iter_mut().for_each(|v| *v = 0);
                let obs = walk(scheme, path as u64, x0, domain, max_steps, bins, &mut counts);
                times.push(obs.time);
                // one bin count per completed step, so the sojourn is steps·dt
                let occupied = obs.steps as f64 * scheme.dt;
                tsum += occupied;
                tsq += occupied * occupied;
                for k in 0..nb {
                    let o = counts[k] as f64 * scheme.dt;
                    sum[k] += o;
                    sumsq[k] += o * o;
                }
            }
            (times, sum, sumsq, tsum, tsq)
        })
        .collect();
    let n = n_paths as f64;
    let mut exit_times = Vec::with_capacity(n_paths);
    let mut sum = vec![0.0; nb];
    let mut sumsq = vec![0.0; nb];
    let (mut tsum, mut tsq) = (0.0, 0.0);
    for (times, s, sq, ts, tq) in chunks {
        exit_times.extend(times);
        for k in 0..nb {
            sum[k] += s[k];
            sumsq[k] += sq[k];
        }
        tsum += ts;
        tsq += tq;
    }
    let half = |s: f64, sq: f64| {
        let mean = s / n;
        let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        Z95 * (var / n).sqrt()
    };
    Ok(ExitStats {
        n_paths,
        horizon,
        exit_times,
        bins: bins.to_vec(),
        occupation: sum.iter().map(|s| s / n).collect(),
        occupation_ci: sum.iter().zip(&sumsq).map(|(s, q)| half(*s, *q)).collect(),
        mean_exit_time: tsum / n,
        mean_exit_ci: half(tsum, tsq),
    })
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Survival curve with Wilson intervals built from simulated exit times.
pub fn survival_from_stats(stats: &ExitStats, x0: f64, t_grid: &[f64]) -> SurvivalCurve {
    let mut finite: Vec<f64> = stats.exit_times.iter().flatten().copied().collect();
    finite.sort_by(f64::total_cmp);
    let n = stats.n_paths;
    let mut values = Vec::with_capacity(t_grid.len());
    let mut ci = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dead = finite.partition_point(|&s| s <= t);
        let alive = n - dead;
        values.push(alive as f64 / n as f64);
        ci.push(wilson_interval(alive, n));
    }
    SurvivalCurve {
        x0,
        times: t_grid.to_vec(),
        values,
        ci: Some(ci),
        fitted_rate: None,
    }
}

/// Monte Carlo survival estimate together with the raw exit statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalEstimate {
    pub curve: SurvivalCurve,
    pub stats: ExitStats,
}

/// Empirical `P(T > t)` on `t_grid` from `n_paths` paths, horizon = last grid time.
pub fn estimate_survival(
    scheme: &PathScheme,
    x0: f64,
    domain: &Domain,
    t_grid: &[f64],
    n_paths: usize,
) -> Result<SurvivalEstimate> {
    if n_paths < 1000 {
        return Err(LevyError::Configuration(format!("{n_paths} paths, need at least 1000")));
    }
    let horizon = *t_grid
        .last()
        .ok_or_else(|| LevyError::Configuration("empty time grid".into()))?;
    let stats = simulate(scheme, x0, domain, horizon.max(scheme.dt), n_paths, &[])?;
    Ok(SurvivalEstimate {
        curve: survival_from_stats(&stats, x0, t_grid),
        stats,
    })
}

/// Weights `1 / var(log p̂)` taken from the interval widths; unit weights without intervals.
fn log_weights(curve: &SurvivalCurve) -> Option<Vec<f64>> {
    curve.ci.as_ref().map(|ci| {
        curve
            .values
            .iter()
            .zip(ci)
            .map(|(p, (lo, hi))| {
                let sd = (hi - lo) / (2.0 * Z95);
                if sd > 0.0 {
                    (p / sd).powi(2)
                } else {
                    0.0
                }
            })
            .collect()
    })
}

/// Weighted least-squares decay rate of `log p` over points with `p` in `window`.
pub fn fit_decay_rate(curve: &SurvivalCurve, window: (f64, f64)) -> Result<RateFit> {
    let w = log_weights(curve);
    fit_log_slope(&curve.times, &curve.values, w.as_deref(), window)
}

/// [`fit_decay_rate`] with the standard error replaced by a path bootstrap,
/// which accounts for the correlation between survival estimates at different times.
pub fn fit_decay_rate_bootstrap(estimate: &SurvivalEstimate, window: (f64, f64), replicates: usize, seed: u64) -> Result<RateFit> {
    let mut fit = fit_decay_rate(&estimate.curve, window)?;
    let n = estimate.stats.n_paths;
    let times = &estimate.stats.exit_times;
    let fits: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let sample = ExitStats {
                n_paths: n,
                horizon: estimate.stats.horizon,
                exit_times: (0..n).map(|_| times[rng.random_range(0..n)]).collect(),
                bins: Vec::new(),
                occupation: Vec::new(),
                occupation_ci: Vec::new(),
                mean_exit_time: 0.0,
                mean_exit_ci: 0.0,
            };
            let curve = survival_from_stats(&sample, estimate.curve.x0, &estimate.curve.times);
            fit_decay_rate(&curve, window).ok().map(|f| (f.rate, f.intercept))
        })
        .collect();
    if fits.len() < replicates / 2 || fits.len() < 2 {
        return Err(LevyError::Fit("too few bootstrap replicates produced a fit".into()));
    }
    let sd = |values: Vec<f64>| {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    };
    fit.stderr = sd(fits.iter().map(|f| f.0).collect());
    fit.intercept_stderr = sd(fits.iter().map(|f| f.1).collect());
    Ok(fit)
}

/// Mean time spent in each bin before exit; bins should partition Δ.
pub fn estimate_occupation(
    scheme: &PathScheme,
    x0: f64,
    domain: &Domain,
    bins: &[(f64, f64)],
    n_paths: usize,
    horizon: f64,
) -> Result<ExitStats> {
    simulate(scheme, x0, domain, horizon, n_paths, bins)
}

/// `count` equal bins over each interval of the domain.
pub fn uniform_bins(domain: &Domain, count: usize) -> Vec<(f64, f64)> {
    domain
        .intervals()
        .iter()
        .flat_map(|&(a, b)| {
            let w = (b - a) / count as f64;
            (0..count).map(move |k| (a + k as f64 * w, if k + 1 == count { b } else { a + (k + 1) as f64 * w }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_limits() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }

    #[test]
    fn tail_table_inverts_power_law() {
        let t = LevyTriplet::stable(0.8, 1.0, 0.0, 0.0).unwrap();
        let table = TailTable::build(&t.parts().plus, 1e-3).unwrap().unwrap();
        for u in [0.9, 0.5, 0.1, 1e-3, 1e-9] {
            let r = table.invert(u);
            let got = t.parts().plus.tail(r, false).unwrap() / table.mass();
            assert!((got / u - 1.0).abs() < 1e-3, "{u} {got}");
        }
    }

    #[test]
    fn outside_start_exits_immediately() {
        let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
        let s = PathScheme::new(&t, 1e-3, 1e-2, 1).unwrap();
        let d = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(simulate_exit(&s, 0, 3.0, &d, 1.0).time, Some(0.0));
    }

    #[test]
    fn bad_schemes_are_rejected() {
        let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
        assert!(PathScheme::new(&t, 0.0, 1e-2, 1).is_err());
        assert!(PathScheme::substitution(&t, 1e-3, 2.0, 1).is_err());
    }
}
