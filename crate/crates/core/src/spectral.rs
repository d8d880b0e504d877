//! Principal eigenpair of the quasi-potential, spectral localization checks,
//! survival curves and their Laplace transforms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::expm::expm;
use crate::operator::{Domain, Grid};

/// Iteration cap for the power iterations.
pub const MAX_POWER_ITERATIONS: usize = 100_000;
/// Relative change of successive Rayleigh quotients that ends a power iteration.
pub const RAYLEIGH_TOLERANCE: f64 = 1e-12;
/// Relative slack allowed on the disk `|z - λ₁/2| ≤ λ₁/2`.
pub const DISK_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    /// Dominant eigenvalue of `B`, in units of time.
    pub lambda1: f64,
    /// Right eigenvector on the interior nodes.
    pub g1: Vec<f64>,
    /// Left eigenvector, scaled so that `Σ g1·h1 = 1`.
    pub h1_density: Vec<f64>,
    /// `Σ g1 h1` before normalization relative to `|g1| |h1|`; zero would mean a
    /// nontrivial Jordan block at `λ₁`.
    pub index_overlap: f64,
    /// `|B g1 - λ₁ g1| / λ₁` after convergence.
    pub residual: f64,
    pub iterations: usize,
    pub leading: Vec<LeadingEigenvalue>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LeadingEigenvalue {
    pub re: f64,
    pub im: f64,
    /// `λ₁/2 - |z - λ₁/2|`; negative values lie outside the disk.
    pub disk_margin: f64,
    pub arg: f64,
}

impl EigenResult {
    pub fn rate(&self) -> f64 {
        1.0 / self.lambda1
    }

    /// Smallest disk margin over the leading eigenvalues.
    pub fn disk_margin(&self) -> f64 {
        self.leading.iter().map(|e| e.disk_margin).fold(f64::INFINITY, f64::min)
    }

    pub fn disk_contained(&self) -> bool {
        self.disk_margin() >= -DISK_SLACK * self.lambda1
    }

    pub fn max_imaginary(&self) -> f64 {
        self.leading.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    pub fn sector_angle(&self) -> f64 {
        self.leading.iter().map(|e| e.arg.abs()).fold(0.0, f64::max)
    }
}

fn power_iteration(b: &DMatrix<f64>) -> Result<(f64, DVector<f64>, usize)> {
    let n = b.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut previous = f64::NAN;
    for it in 1..=MAX_POWER_ITERATIONS {
        let w = b * &v;
        let rq = v.dot(&w);
        let norm = w.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(LevyError::DominanceFailure { iterations: it });
        }
        v = w / norm;
        if (rq - previous).abs() <= RAYLEIGH_TOLERANCE * rq.abs() {
            // one more step to bring the vector up to the converged quotient
            let w = b * &v;
            let rq = v.dot(&w);
            let v = w.normalize();
            return Ok((rq, v, it));
        }
        previous = rq;
    }
    Err(LevyError::DominanceFailure {
        iterations: MAX_POWER_ITERATIONS,
    })
}

/// `λ₁`, `g₁` and `h₁` by power iteration on `B` and `Bᵀ` from the all-ones vector.
pub fn principal_eigenpair(b: &DMatrix<f64>) -> Result<EigenResult> {
    let (lambda1, g, it_right) = power_iteration(b)?;
    let (_, h, it_left) = power_iteration(&b.transpose())?;
    if !(lambda1 > 0.0) {
        return Err(LevyError::DominanceFailure { iterations: it_right });
    }
    // fix signs so that the vectors lie in the positive cone
    let g = if g.sum() < 0.0 { -g } else { g };
    let h = if h.sum() < 0.0 { -h } else { h };
    let overlap = g.dot(&h);
    if overlap.abs() < 1e-12 {
        return Err(LevyError::DominanceFailure { iterations: it_left });
    }
    let residual = (b * &g - &g * lambda1).norm() / lambda1;
    let h = h / overlap;
    Ok(EigenResult {
        lambda1,
        g1: g.iter().cloned().collect(),
        h1_density: h.iter().cloned().collect(),
        index_overlap: overlap,
        residual,
        iterations: it_right.max(it_left),
        leading: Vec::new(),
    })
}

/// `m` eigenvalues of `B` of largest modulus by orthogonal subspace iteration,
/// sorted by decreasing modulus.
pub fn leading_spectrum(b: &DMatrix<f64>, m: usize) -> Result<Vec<Complex64>> {
    let n = b.nrows();
    if m == 0 || m > 20 {
        return Err(LevyError::InvalidParameter(format!("leading spectrum size {m} outside 1..=20")));
    }
    let m = m.min(n);
    let p = (m + 6).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = DMatrix::<f64>::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    q = q.qr().q();
    let mut previous: Vec<Complex64> = Vec::new();
    for _ in 0..20_000 {
        let z = b * &q;
        let small = q.transpose() * &z;
        let mut ritz: Vec<Complex64> = small
            .complex_eigenvalues()
            .iter()
            .map(|c| Complex64::new(c.re, c.im))
            .collect();
        ritz.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        ritz.truncate(m);
        q = z.qr().q();
        let scale = ritz.first().map(|c| c.norm()).unwrap_or(1.0);
        if previous.len() == ritz.len()
            && ritz.iter().zip(&previous).all(|(a, b)| (a - b).norm() <= 1e-11 * scale)
        {
            return Ok(ritz);
        }
        previous = ritz;
    }
    Ok(previous)
}

/// Principal eigenpair plus `m` leading eigenvalues with their disk margins.
pub fn analyze_spectrum(b: &DMatrix<f64>, m: usize) -> Result<EigenResult> {
    let mut eig = principal_eigenpair(b)?;
    let half = 0.5 * eig.lambda1;
    eig.leading = leading_spectrum(b, m)?
        .into_iter()
        .map(|z| LeadingEigenvalue {
            re: z.re,
            im: z.im,
            disk_margin: half - (z - half).norm(),
            arg: z.arg(),
        })
        .collect();
    Ok(eig)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectorialityReport {
    pub trials: usize,
    pub min_real: f64,
    /// Largest `|arg (Sf, f)|` over the sampled unit vectors.
    pub max_angle: f64,
    pub strongly_sectorial: bool,
}

/// Samples `(Sf, f)` over seeded random complex unit vectors.
pub fn sectoriality_check(s: &DMatrix<f64>, trials: usize, seed: u64) -> SectorialityReport {
    let n = s.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_real = f64::INFINITY;
    let mut max_angle: f64 = 0.0;
    for _ in 0..trials {
        let re = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
        let im = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
        let norm2 = re.norm_squared() + im.norm_squared();
        let (sre, sim) = (s * &re, s * &im);
        // f* S f with f = re + i im
        let value = Complex64::new(re.dot(&sre) + im.dot(&sim), re.dot(&sim) - im.dot(&sre)) / norm2;
        min_real = min_real.min(value.re);
        max_angle = max_angle.max(value.arg().abs());
    }
    SectorialityReport {
        trials,
        min_real,
        max_angle,
        strongly_sectorial: trials > 0 && max_angle < std::f64::consts::FRAC_PI_2 * (1.0 - 1e-3),
    }
}

/// Least-squares decay rate of `log p` over the points with `p` inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub points: usize,
}

/// Default fitting window on `p`.
pub const FIT_WINDOW: (f64, f64) = (1e-4, 1e-1);

/// Weighted least squares of `log p = intercept - rate·t` over points with
/// `p ∈ [lo, hi]`. Unit weights when `weights` is `None`.
pub fn fit_log_slope(times: &[f64], values: &[f64], weights: Option<&[f64]>, window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64, f64)> = times
        .iter()
        .zip(values)
        .enumerate()
        .filter(|(_, (_, &p))| p >= window.0 && p <= window.1 && p > 0.0 && p < 1.0)
        .map(|(i, (&t, &p))| (t, p.ln(), weights.map_or(1.0, |w| w[i])))
        .filter(|&(_, _, w)| w > 0.0 && w.is_finite())
        .collect();
    if pts.len() < 5 {
        return Err(LevyError::Fit(format!(
            "{} points inside the window [{}, {}], need 5",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let tm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let stt: f64 = pts.iter().map(|p| p.2 * (p.0 - tm).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| p.2 * (p.0 - tm) * (p.1 - ym)).sum();
    if stt <= 0.0 {
        return Err(LevyError::Fit("window holds a single time".into()));
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let rss: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    let sigma2 = rss / (pts.len() - 2) as f64;
    Ok(RateFit {
        rate: -slope,
        stderr: (sigma2 / stt).sqrt(),
        intercept,
        intercept_stderr: (sigma2 * (1.0 / sw + tm * tm / stt)).sqrt(),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalCurve {
    pub x0: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Confidence band, present for Monte Carlo estimates.
    pub ci: Option<Vec<(f64, f64)>>,
    pub fitted_rate: Option<RateFit>,
}

impl SurvivalCurve {
    /// Fits the decay rate over [`FIT_WINDOW`] and stores it.
    pub fn fit(&mut self) -> Result<RateFit> {
        let fit = fit_log_slope(&self.times, &self.values, None, FIT_WINDOW)?;
        self.fitted_rate = Some(fit);
        Ok(fit)
    }
}

fn check_times(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LevyError::InvalidParameter("time grid must be increasing and nonnegative".into()));
    }
    Ok(())
}

/// `p(t, x0) = (exp(tL) 1)(x0)` on an increasing time grid. Steps of equal length
/// reuse one exponential.
pub fn survival_curve(l: &DMatrix<f64>, grid: &Grid, x0: f64, t_grid: &[f64]) -> Result<SurvivalCurve> {
    check_times(t_grid)?;
    let index = grid.locate(x0)?;
    let Some(index) = index else {
        let values = t_grid.iter().map(|&t| if t == 0.0 { 1.0 } else { 0.0 }).collect();
        return Ok(SurvivalCurve {
            x0,
            times: t_grid.to_vec(),
            values,
            ci: None,
            fitted_rate: None,
        });
    };
    let n = l.nrows();
    let mut v = DVector::from_element(n, 1.0);
    let mut cache: Option<(f64, DMatrix<f64>)> = None;
    let mut now = 0.0;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dt = t - now;
        if dt > 0.0 {
            let reuse = matches!(&cache, Some((c, _)) if (c - dt).abs() <= 1e-12 * dt);
            if !reuse {
                cache = Some((dt, expm(&(l * dt))?));
            }
            let (_, e) = cache.as_ref().expect("cached step");
            v = e * v;
            if v.amax() > 1.0 + 1e-6 {
                return Err(LevyError::ExponentialOverflow(format!(
                    "survival exceeds one ({}) at t = {t}; the generator is not dissipative",
                    v.amax()
                )));
            }
            now = t;
        }
        values.push(v[index].clamp(0.0, 1.0));
    }
    Ok(SurvivalCurve {
        x0,
        times: t_grid.to_vec(),
        values,
        ci: None,
        fitted_rate: None,
    })
}

/// `((I + sB)^{-1} B 1)(x0)`, the Laplace transform of `p(·, x0)` at `s`.
/// At `s = 0` this is the row sum of `B`.
pub fn laplace_survival(b: &DMatrix<f64>, grid: &Grid, x0: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(LevyError::InvalidParameter(format!("Laplace argument {s} must be nonnegative")));
    }
    let Some(index) = grid.locate(x0)? else {
        return Ok(0.0);
    };
    if s == 0.0 {
        return Ok(b.row(index).sum());
    }
    let n = b.nrows();
    let rhs = b * DVector::from_element(n, 1.0);
    let system = DMatrix::<f64>::identity(n, n) + b * s;
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LevyError::Solver("I + sB is singular".into()))?;
    Ok(sol[index])
}

/// Long-time model `p(t) ≈ c₁ e^{-t/λ₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotics {
    pub rate: f64,
    pub c1: f64,
}

impl Asymptotics {
    pub fn survival(&self, t: f64) -> f64 {
        self.c1 * (-self.rate * t).exp()
    }
}

/// Rate `1/λ₁` and `c₁ = g₁(x0) Σ_{y ∈ Δ₁} h₁(y)`; `Δ₁` defaults to the whole domain.
pub fn asymptotics(eig: &EigenResult, grid: &Grid, x0: f64, subdomain: Option<&Domain>) -> Result<Asymptotics> {
    let rate = eig.rate();
    let Some(index) = grid.locate(x0)? else {
        return Ok(Asymptotics { rate, c1: 0.0 });
    };
    let mass: f64 = grid
        .interior_nodes()
        .iter()
        .zip(&eig.h1_density)
        .filter(|(x, _)| subdomain.is_none_or(|d| d.contains(**x)))
        .map(|(_, h)| h)
        .sum();
    Ok(Asymptotics {
        rate,
        c1: eig.g1[index] * mass,
    })
}

/// `∫₀^∞ e^{-st} p(t) dt` from a sampled curve: trapezoid on the grid plus the
/// exponential tail fitted to the last two points.
pub fn integrate_curve(curve: &SurvivalCurve, s: f64) -> f64 {
    let t = &curve.times;
    let f: Vec<f64> = t.iter().zip(&curve.values).map(|(t, p)| (-s * t).exp() * p).collect();
    let mut total = 0.0;
    let n = t.len();
    // composite Simpson where the grid is uniform with an even number of steps
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - (t[1] - t[0])).abs() <= 1e-9 * (t[1] - t[0]));
    if uniform && n >= 3 {
        let h = t[1] - t[0];
        let even = if (n - 1) % 2 == 0 { n } else { n - 1 };
        for k in (0..even - 2).step_by(2) {
            total += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        }
        if even < n {
            total += 0.5 * h * (f[n - 2] + f[n - 1]);
        }
    } else {
        for k in 1..n {
            total += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        }
    }
    if n >= 2 && f[n - 1] > 0.0 && f[n - 2] > f[n - 1] {
        let decay = (f[n - 2] / f[n - 1]).ln() / (t[n - 1] - t[n - 2]);
        total += f[n - 1] / decay;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyTriplet;
    use crate::operator::OperatorSet;
    use std::f64::consts::PI;

    fn brownian(res: f64) -> OperatorSet {
        let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
        OperatorSet::build(&t, &Domain::interval(-1.0, 1.0).unwrap(), res, None).unwrap()
    }

    #[test]
    fn diagonal_matrix_eigenpair() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let e = principal_eigenpair(&b).unwrap();
        assert!((e.lambda1 - 2.0).abs() < 1e-12);
        assert!(e.g1[1].abs() < 1e-6 && e.g1[0] > 0.0);
    }

    #[test]
    fn brownian_spectrum() {
        let ops = brownian(100.0);
        let eig = analyze_spectrum(&ops.b, 6).unwrap();
        assert!((eig.lambda1 - 8.0 / (PI * PI)).abs() < 1e-3);
        for (k, z) in eig.leading.iter().enumerate() {
            let ratio = z.re / eig.lambda1;
            let expected = 1.0 / ((k + 1) as f64).powi(2);
            assert!((ratio / expected - 1.0).abs() < 0.02, "{k} {ratio}");
        }
        assert!(eig.disk_contained());
        assert!(eig.max_imaginary() <= 1e-8 * eig.lambda1);
        let a = asymptotics(&eig, &ops.grid, 0.0, None).unwrap();
        assert!((a.c1 / (4.0 / PI) - 1.0).abs() < 0.02);
        assert_eq!(asymptotics(&eig, &ops.grid, 1.0, None).unwrap().c1, 0.0);
        assert!(eig.g1.iter().all(|&g| g > 0.0));
        assert!(eig.h1_density.iter().all(|&h| h >= 0.0));
    }

    #[test]
    fn subspace_iteration_matches_dense_eigenvalues() {
        let t = LevyTriplet::stable(1.5, 1.0, 0.5, 0.2).unwrap();
        let ops = OperatorSet::build(&t, &Domain::interval(-1.0, 1.0).unwrap(), 20.0, None).unwrap();
        let lead = leading_spectrum(&ops.b, 5).unwrap();
        let mut dense: Vec<Complex64> = ops
            .b
            .complex_eigenvalues()
            .iter()
            .map(|c| Complex64::new(c.re, c.im))
            .collect();
        dense.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        for (a, b) in lead.iter().zip(&dense) {
            assert!((a - b).norm() < 1e-9 * dense[0].norm(), "{a} {b}");
        }
    }

    #[test]
    fn survival_matches_heat_series() {
        let ops = brownian(100.0);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let mut curve = survival_curve(&ops.l, &ops.grid, 0.0, &times).unwrap();
        assert_eq!(curve.values[0], 1.0);
        let series: f64 = (0..200)
            .map(|j| {
                let k = (2 * j + 1) as f64;
                4.0 / (k * PI) * if j % 2 == 0 { 1.0 } else { -1.0 } * (-k * k * PI * PI / 8.0).exp()
            })
            .sum();
        assert!((curve.values[4] - series).abs() < 1e-4, "{}", curve.values[4]);
        assert!(curve.values.windows(2).all(|w| w[1] <= w[0]));
        let fit = curve.fit().unwrap();
        assert!((fit.rate / (PI * PI / 8.0) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn laplace_transform_properties() {
        let ops = brownian(100.0);
        let b0 = laplace_survival(&ops.b, &ops.grid, 0.0, 0.0).unwrap();
        assert!((b0 - 1.0).abs() < 1e-2);
        let big = laplace_survival(&ops.b, &ops.grid, 0.0, 1e6).unwrap();
        assert!(big < 1e-5 * b0);
        let times: Vec<f64> = (0..=3000).map(|k| k as f64 * 0.01).collect();
        let curve = survival_curve(&ops.l, &ops.grid, 0.0, &times).unwrap();
        for s in [0.0, 0.5, 1.0, 2.0] {
            let exact = laplace_survival(&ops.b, &ops.grid, 0.0, s).unwrap();
            let quad = integrate_curve(&curve, s);
            assert!((quad / exact - 1.0).abs() < 1e-3, "{s} {quad} {exact}");
        }
    }

    #[test]
    fn sectoriality_examples() {
        let ops = brownian(40.0);
        let r = sectoriality_check(&ops.s_mid, 50, 7);
        assert!(r.max_angle < 1e-14 && (r.min_real - 0.5).abs() < 1e-12);
        let t = LevyTriplet::cauchy(1.0).unwrap();
        let ops = OperatorSet::build(&t, &Domain::interval(-1.0, 1.0).unwrap(), 40.0, None).unwrap();
        let r = sectoriality_check(&ops.s_mid, 50, 7);
        assert!(r.max_angle <= 1e-10 && r.min_real > 0.0);
        let t = LevyTriplet::stable(1.5, 1.0, 0.5, 0.0).unwrap();
        let ops = OperatorSet::build(&t, &Domain::interval(-1.0, 1.0).unwrap(), 40.0, None).unwrap();
        let r = sectoriality_check(&ops.s_mid, 50, 7);
        assert!(r.max_angle > 0.0 && r.strongly_sectorial, "{r:?}");
    }

    #[test]
    fn fit_exact_exponential() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.05).collect();
        let p: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let f = fit_log_slope(&t, &p, None, FIT_WINDOW).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-12 && f.stderr < 1e-10);
        assert!(fit_log_slope(&t[..3], &p[..3], None, (0.0, 1.0)).is_err());
    }
}
