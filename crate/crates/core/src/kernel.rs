//! Convolution kernel of the generator.
//!
//! With `u = y - x` the generator acts as `L f = d/dx S d/dx f`, where
//! `S f(x) = (A/2) f(x) + ∫ K(y - x) f(y) dy` and
//!
//! ```text
//! K(u) = k₊(u) 1_{u>0} + k₋(u) 1_{u<0} - ((γ - Γ)/2) sign(u).
//! ```
//!
//! `k±` are tail integrals anchored at `a`, and `Γ` collects the drift that the
//! anchoring moves out of the jump part. Changing the anchor shifts `K` by a
//! constant, which the outer derivatives annihilate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{LevyError, Result};
use crate::levy::{levy_symbol, LevyTriplet};
use crate::measure::{MeasureParts, Side, TailDecay};
use crate::operator::Domain;
use crate::quad::{self, Tolerance};

/// `μ₋(x) = ν((-∞, x])` for `x < 0` and `μ₊(x) = -ν((x, ∞))` for `x > 0`.
#[derive(Debug, Clone)]
pub struct TailFunctions {
    parts: MeasureParts,
    gamma: f64,
    a: f64,
}

impl TailFunctions {
    pub fn mu_minus(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            return Err(LevyError::InvalidParameter(format!("mu_minus needs x < 0, got {x}")));
        }
        self.parts.minus.tail(-x, true)
    }

    pub fn mu_plus(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(LevyError::InvalidParameter(format!("mu_plus needs x > 0, got {x}")));
        }
        Ok(-self.parts.plus.tail(x, false)?)
    }
}

pub fn tail_functions(triplet: &LevyTriplet) -> TailFunctions {
    TailFunctions {
        parts: triplet.parts().clone(),
        gamma: triplet.gamma(),
        a: triplet.a(),
    }
}

/// Anchored kernels `k±` and the drift bookkeeping that goes with them.
#[derive(Debug, Clone)]
pub struct KernelFunctions {
    tails: TailFunctions,
    anchor: f64,
    /// `ν((-∞,-1]) + ∫_1^a ν((-∞,-s]) ds`; the left derivative `k₋'(-1)` when `a = 1`.
    pub gamma1: f64,
    /// `-ν([1,∞)) - ∫_1^a ν((s,∞)) ds`; the left derivative `k₊'(1)` when `a = 1`.
    pub gamma2: f64,
    /// `Γ = γ₁ + γ₂`.
    pub big_gamma: f64,
    /// `γ - Γ`, the weight of the sign kernel `p₀(x - y) = sign(x - y)/2`.
    pub drift_coefficient: f64,
}

impl KernelFunctions {
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn tails(&self) -> &TailFunctions {
        &self.tails
    }

    /// `k₋(x) = ∫_{-a}^x μ₋(t) dt` for `x < 0`.
    pub fn k_minus(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            return Err(LevyError::InvalidParameter(format!("k_minus needs x < 0, got {x}")));
        }
        self.tails.parts.minus.kernel(-x, self.anchor)
    }

    /// `k₊(x) = -∫_x^a μ₊(t) dt` for `x > 0`.
    pub fn k_plus(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(LevyError::InvalidParameter(format!("k_plus needs x > 0, got {x}")));
        }
        self.tails.parts.plus.kernel(x, self.anchor)
    }
}

pub fn kernel_functions(tails: &TailFunctions, anchor: f64) -> Result<KernelFunctions> {
    if !(anchor > 0.0 && anchor.is_finite()) {
        return Err(LevyError::InvalidParameter(format!("anchor {anchor} must be positive")));
    }
    let parts = &tails.parts;
    let nonintegrable = |e: LevyError| LevyError::NonIntegrableKernel(e.to_string());
    let shift_minus = parts.minus.kernel(1.0, anchor).map_err(nonintegrable)?;
    let shift_plus = parts.plus.kernel(1.0, anchor).map_err(nonintegrable)?;
    let gamma1 = parts.minus.tail(1.0, true)? + shift_minus;
    let gamma2 = -parts.plus.tail(1.0, true)? - shift_plus;
    let big_gamma = gamma1 + gamma2;
    Ok(KernelFunctions {
        tails: tails.clone(),
        anchor,
        gamma1,
        gamma2,
        big_gamma,
        drift_coefficient: tails.gamma - big_gamma,
    })
}

/// Anchor at least as large as the domain diameter, which keeps `S` sectorial.
pub fn default_anchor(domain: &Domain) -> f64 {
    let (lo, hi) = domain.hull();
    (hi - lo).max(1.0)
}

/// The full convolution kernel `K(u)`, `u = y - x`, without the `A/2` identity part.
#[derive(Debug, Clone)]
pub struct UnifiedKernel {
    kernels: KernelFunctions,
}

pub fn unified_kernel(triplet: &LevyTriplet, kernels: &KernelFunctions) -> UnifiedKernel {
    debug_assert_eq!(triplet.gamma(), kernels.tails.gamma);
    UnifiedKernel {
        kernels: kernels.clone(),
    }
}

impl UnifiedKernel {
    /// Kernel built from the triplet at the given anchor.
    pub fn from_triplet(triplet: &LevyTriplet, anchor: f64) -> Result<Self> {
        let k = kernel_functions(&tail_functions(triplet), anchor)?;
        Ok(unified_kernel(triplet, &k))
    }

    pub fn kernels(&self) -> &KernelFunctions {
        &self.kernels
    }

    pub fn a(&self) -> f64 {
        self.kernels.tails.a
    }

    pub fn drift_coefficient(&self) -> f64 {
        self.kernels.drift_coefficient
    }

    fn parts(&self) -> &MeasureParts {
        &self.kernels.tails.parts
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let drift = -0.5 * self.drift_coefficient() * sign(u);
        let jump = if u > 0.0 {
            self.kernels.k_plus(u)?
        } else if u < 0.0 {
            self.kernels.k_minus(u)?
        } else {
            return Err(LevyError::InvalidParameter("kernel is not defined at u = 0".into()));
        };
        Ok(jump + drift)
    }

    /// `∫_{u1}^{u2} K(u) du`; exact for closed-form pieces, adaptive otherwise.
    pub fn cell_integral(&self, u1: f64, u2: f64) -> Result<f64> {
        if u2 < u1 {
            return Ok(-self.cell_integral(u2, u1)?);
        }
        let a = self.kernels.anchor;
        let parts = self.parts();
        let mut total = -0.5 * self.drift_coefficient() * (u2.abs() - u1.abs());
        if u2 > 0.0 {
            total += parts.plus.kernel_integral(u1.max(0.0), u2, a)?;
        }
        if u1 < 0.0 {
            total += parts.minus.kernel_integral((-u2).max(0.0), -u1, a)?;
        }
        Ok(total)
    }

    /// `P(u) = ∫_0^u K` at each point of an increasing positive sequence, for
    /// `(u, -u)`. Returns `(P(u_i), P(-u_i))`.
    fn symmetric_primitives(&self, points: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let a = self.kernels.anchor;
        let c = self.drift_coefficient();
        let plus = self.parts().plus.primitives(points, a)?;
        let minus = self.parts().minus.primitives(points, a)?;
        let pos = points.iter().zip(&plus).map(|(u, p)| p - 0.5 * c * u).collect();
        let neg = points.iter().zip(&minus).map(|(u, m)| -m - 0.5 * c * u).collect();
        Ok((pos, neg))
    }

    /// Large-`|u|` form of `k₊` and `k₋` (the latter in terms of `|u|`).
    pub fn far_field(&self) -> Result<(FarField, FarField)> {
        let a = self.kernels.anchor;
        let model = |side: &Side| -> Result<FarField> {
            if side.is_empty() {
                return Ok(FarField::default());
            }
            if let Some(p) = side.power.filter(|p| p.cutoff.is_infinite()) {
                // pure power law: k(u) = Q(a) - Q(u) exactly
                let (c, b) = (p.coeff, p.index);
                let growth = if b == 1.0 {
                    Growth::Log { coeff: c }
                } else {
                    Growth::Power {
                        coeff: c / (b * (1.0 - b)),
                        exponent: 1.0 - b,
                    }
                };
                let constant = side.kernel(1.0, a)?
                    + match growth {
                        Growth::Log { .. } => 0.0,
                        Growth::Power { coeff, .. } => coeff,
                        Growth::None => 0.0,
                    };
                return Ok(FarField { constant, growth });
            }
            let heavy = side
                .remainder
                .as_ref()
                .is_some_and(|r| matches!(r.decay, TailDecay::PowerLaw { index } if index <= 1.0));
            if heavy {
                return Ok(FarField::default());
            }
            // -∫_a^∞ T = -(∫_{[a,∞)} r ν(dr) - a ν([a,∞)))
            let constant = -(side.moment(a, f64::INFINITY, 1.0)? - a * side.tail(a, true)?);
            Ok(FarField {
                constant,
                growth: Growth::None,
            })
        };
        Ok((model(&self.parts().plus)?, model(&self.parts().minus)?))
    }
}

/// Growth law subtracted from the far field of a heavy-tailed kernel side.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum Growth {
    #[default]
    None,
    /// `-coeff·u^exponent`.
    Power { coeff: f64, exponent: f64 },
    /// `-coeff·ln u`.
    Log { coeff: f64 },
}

/// `constant + growth(|u|)` on one side of the origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FarField {
    pub constant: f64,
    pub growth: Growth,
}

impl FarField {
    /// `∫_0^v` of the model, `v ≥ 0`.
    fn primitive(&self, v: f64) -> f64 {
        let g = match self.growth {
            Growth::None => 0.0,
            Growth::Power { coeff, exponent } => -coeff * v.powf(exponent + 1.0) / (exponent + 1.0),
            Growth::Log { coeff } => {
                if v > 0.0 {
                    -coeff * (v * v.ln() - v)
                } else {
                    0.0
                }
            }
        };
        self.constant * v + g
    }

    /// `∫_0^∞ model(v) e^{i σ z v} dv` in the Abel sense, `σ = ±1`.
    fn transform(&self, z: f64, orientation: f64) -> Complex64 {
        let w = orientation * z;
        let s = w.signum();
        let i_over = Complex64::new(0.0, 1.0 / w);
        let mut total = self.constant * i_over;
        match self.growth {
            Growth::None => {}
            Growth::Power { coeff, exponent } => {
                let q = exponent + 1.0;
                let phase = Complex64::from_polar(1.0, 0.5 * PI * q * s);
                total -= coeff * gamma(q) * phase / w.abs().powf(q);
            }
            Growth::Log { coeff } => {
                let euler = 0.577_215_664_901_532_9_f64;
                let inner = Complex64::new(-euler - w.abs().ln(), 0.5 * PI * s);
                total -= coeff * i_over * inner;
            }
        }
        total
    }
}

fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Cell averages of `K` on the lattice `u_j = j h`, cells `[u_j - h/2, u_j + h/2]`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    kernel: Arc<UnifiedKernel>,
    h: f64,
    n: usize,
    /// Index `j + n` holds the average over the cell centred at `j h`.
    averages: Vec<f64>,
}

/// Tabulate `K` out to `|u| ≤ radius` with cell width `h`.
pub fn tabulate_kernel(kernel: Arc<UnifiedKernel>, h: f64, radius: f64) -> Result<KernelTable> {
    if !(h > 0.0 && radius >= h) {
        return Err(LevyError::InvalidParameter(format!("bad table spacing h = {h}, radius = {radius}")));
    }
    let n = (radius / h).ceil() as usize;
    // cell edges at (j + 1/2) h for j = 0..=n
    let edges: Vec<f64> = (0..=n).map(|j| (j as f64 + 0.5) * h).collect();
    let (pos, neg) = kernel.symmetric_primitives(&edges)?;
    let mut averages = vec![0.0; 2 * n + 1];
    // centre cell straddles 0
    averages[n] = (pos[0] - neg[0]) / h;
    for j in 1..=n {
        averages[n + j] = (pos[j] - pos[j - 1]) / h;
        averages[n - j] = (neg[j - 1] - neg[j]) / h;
    }
    if let Some(bad) = averages.iter().position(|v| !v.is_finite()) {
        return Err(LevyError::Quadrature(format!(
            "non-finite cell average at offset {}",
            (bad as f64 - n as f64) * h
        )));
    }
    Ok(KernelTable {
        kernel,
        h,
        n,
        averages,
    })
}

impl KernelTable {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        (self.n as f64 + 0.5) * self.h
    }

    pub fn kernel(&self) -> &UnifiedKernel {
        &self.kernel
    }

    pub fn a(&self) -> f64 {
        self.kernel.a()
    }

    pub fn anchor(&self) -> f64 {
        self.kernel.kernels.anchor
    }

    pub fn drift_coefficient(&self) -> f64 {
        self.kernel.drift_coefficient()
    }

    /// `(u_left, u_right, average)` rows in increasing order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.n as f64;
        self.averages.iter().enumerate().map(move |(i, v)| {
            let c = (i as f64 - n) * self.h;
            (c - 0.5 * self.h, c + 0.5 * self.h, *v)
        })
    }

    /// Offsets and averages as parallel slices.
    pub fn lattice(&self) -> (Vec<f64>, &[f64]) {
        let n = self.n as f64;
        let u = (0..self.averages.len()).map(|i| (i as f64 - n) * self.h).collect();
        (u, &self.averages)
    }

    /// `∫ K` over `[center - width/2, center + width/2]`, from the table when the
    /// cell sits on the lattice and directly otherwise.
    pub fn cell_integral(&self, center: f64, width: f64) -> Result<f64> {
        let reach = center.abs() + 0.5 * width;
        if reach > self.radius() * (1.0 + 1e-12) {
            return Err(LevyError::TableCoverage {
                offset: center,
                radius: self.radius(),
            });
        }
        let j = (center / self.h).round();
        let aligned = ((width - self.h).abs() <= 1e-12 * self.h) && ((center - j * self.h).abs() <= 1e-9 * self.h);
        if aligned {
            let idx = (j as i64 + self.n as i64) as usize;
            return Ok(self.averages[idx] * self.h);
        }
        self.kernel.cell_integral(center - 0.5 * width, center + 0.5 * width)
    }
}

/// Smooth plateau: 1 on `|u| ≤ R/2`, 0 beyond `R`, `C^∞` in between.
fn plateau(u: f64, radius: f64) -> f64 {
    let half = 0.5 * radius;
    let x = u.abs();
    if x <= half {
        return 1.0;
    }
    if x >= radius {
        return 0.0;
    }
    let s = (x - half) / half;
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (p, q) = (psi(1.0 - s), psi(s));
    p / (p + q)
}

/// Per-frequency comparison of the tabulated kernel with `λ(z)/z²`.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolCheckReport {
    pub frequencies: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `Re K̂(z)` at each frequency; must stay nonnegative.
    pub real_parts: Vec<f64>,
    pub max_residual: f64,
    /// `min_z Re K̂(z)`.
    pub positivity_margin: f64,
}

/// Minimum `R·z_min` for which the window taper resolves the lowest frequency.
pub const MIN_RADIUS_FREQUENCY: f64 = 8.0 * PI;

/// Compare the windowed transform of the table with `λ(z)/z² - A/2`.
pub fn kernel_symbol_check(triplet: &LevyTriplet, table: &KernelTable, frequencies: &[f64]) -> Result<SymbolCheckReport> {
    let radius = table.radius();
    let zmin = frequencies.iter().fold(f64::INFINITY, |m, z| m.min(z.abs()));
    if frequencies.is_empty() || zmin == 0.0 {
        return Err(LevyError::InvalidParameter("frequencies must be nonzero".into()));
    }
    if radius * zmin < MIN_RADIUS_FREQUENCY {
        return Err(LevyError::TruncationRadius {
            radius,
            detail: format!("R·z_min = {:.3} below {:.3}", radius * zmin, MIN_RADIUS_FREQUENCY),
        });
    }
    let (u, avg) = table.lattice();
    let h = table.h();
    // The far field of each side (a constant, plus a growth law for heavy
    // tails) and the drift sign term have closed-form Abel transforms; only
    // the difference goes through the window.
    let (far_plus, far_minus) = table.kernel().far_field()?;
    let c = table.drift_coefficient();
    let model = |v: f64| -> f64 {
        // ∫_0^v of the far-field kernel; the drift part integrates to -c|v|/2
        if v >= 0.0 {
            far_plus.primitive(v) - 0.5 * c * v
        } else {
            -far_minus.primitive(-v) + 0.5 * c * v
        }
    };
    let weights: Vec<f64> = u
        .iter()
        .zip(avg)
        .map(|(x, k)| {
            let far = model(x + 0.5 * h) - model(x - 0.5 * h);
            (k * h - far) * plateau(*x, radius)
        })
        .collect();
    let a = triplet.a();
    let rows: Vec<(f64, f64)> = frequencies
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            let (mut re, mut im) = (0.0, 0.0);
            for (x, w) in u.iter().zip(&weights) {
                if *w != 0.0 {
                    let (s, c) = (z * x).sin_cos();
                    re += w * c;
                    im += w * s;
                }
            }
            let half = 0.5 * z * h;
            let sinc = half.sin() / half;
            let analytic = far_plus.transform(z, 1.0) + far_minus.transform(z, -1.0) - Complex64::new(0.0, c / z);
            let transform = Complex64::new(re, im) * sinc + analytic;
            let target = levy_symbol(triplet, z)? / (z * z) - 0.5 * a;
            Ok(((transform - target).norm(), transform.re))
        })
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let real_parts: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(SymbolCheckReport {
        frequencies: frequencies.to_vec(),
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        positivity_margin: real_parts.iter().cloned().fold(f64::INFINITY, f64::min),
        residuals,
        real_parts,
    })
}

/// Twenty frequencies evenly spread over `[1, 20]`.
pub fn default_frequencies() -> Vec<f64> {
    (0..20).map(|i| 1.0 + i as f64).collect()
}

/// Qualitative kernel properties plus the symbol check, for one triplet.
#[derive(Debug, Clone, Serialize)]
pub struct KernelPropertyReport {
    /// `μ₋ ≥ 0`, `μ₊ ≤ 0`, both nondecreasing.
    pub tail_signs_monotone: bool,
    /// `μ±` vanish at infinity.
    pub tails_vanish: bool,
    /// `ε² μ(±ε) → 0` along `ε = 2^{-k}`.
    pub tail_limit: bool,
    /// `ε k(±ε) → 0` along `ε = 2^{-k}`.
    pub kernel_limit: bool,
    /// `k₋ ≥ 0` on `[-a, 0)` and `k₊ ≥ 0` on `(0, a]`, with the expected monotonicity.
    pub kernel_signs_monotone: bool,
    /// `∫_0^a |k±|` as computed adaptively and from the exact primitive.
    pub kernel_l1: (f64, f64),
    pub kernel_integrable: bool,
    pub symbol: SymbolCheckReport,
}

impl KernelPropertyReport {
    pub fn passes(&self, residual_tol: f64, positivity_tol: f64) -> bool {
        self.tail_signs_monotone
            && self.tails_vanish
            && self.tail_limit
            && self.kernel_limit
            && self.kernel_signs_monotone
            && self.kernel_integrable
            && self.symbol.max_residual <= residual_tol
            && self.symbol.positivity_margin >= -positivity_tol
    }
}

/// Values that shrink to zero: eventually nonincreasing in magnitude and well below the start.
fn tends_to_zero(values: &[f64]) -> bool {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let tail = &mags[mags.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    let first = mags.iter().cloned().fold(0.0, f64::max);
    monotone && mags[mags.len() - 1] <= 0.2 * first.max(f64::MIN_POSITIVE) + 1e-14
}

pub fn kernel_property_report(triplet: &LevyTriplet, anchor: f64, h: f64, radius: f64) -> Result<KernelPropertyReport> {
    let tails = tail_functions(triplet);
    let kernels = kernel_functions(&tails, anchor)?;
    let mut tail_signs_monotone = true;
    let mut kernel_signs_monotone = true;
    let xs: Vec<f64> = (0..121).map(|i| 10f64.powf(-4.0 + 6.0 * i as f64 / 120.0)).collect();
    let mut prev_minus = f64::INFINITY;
    let mut prev_plus = f64::NEG_INFINITY;
    for &x in &xs {
        let m = tails.mu_minus(-x)?;
        let p = tails.mu_plus(x)?;
        let slack = 1e-10 * (m.abs().max(p.abs()) + 1.0);
        // μ₋ nondecreasing toward 0 means nonincreasing in |x|
        tail_signs_monotone &= m >= 0.0 && p <= 0.0 && m <= prev_minus + slack && p >= prev_plus - slack;
        prev_minus = m;
        prev_plus = p;
    }
    let far = [1e6, 1e8];
    let tails_vanish = {
        let scale = tails.mu_minus(-1e-2)?.abs() + tails.mu_plus(1e-2)?.abs() + 1.0;
        far.iter().all(|&x| {
            let v = tails.mu_minus(-x).unwrap_or(f64::NAN).abs() + tails.mu_plus(x).unwrap_or(f64::NAN).abs();
            v <= 1e-3 * scale
        })
    };
    let mut prev_km = f64::INFINITY;
    let mut prev_kp = f64::INFINITY;
    for &x in xs.iter().filter(|&&x| x <= anchor) {
        let km = kernels.k_minus(-x)?;
        let kp = kernels.k_plus(x)?;
        let slack = 1e-10 * (km.abs().max(kp.abs()) + 1.0);
        kernel_signs_monotone &= km >= -slack && kp >= -slack && km <= prev_km + slack && kp <= prev_kp + slack;
        prev_km = km;
        prev_kp = kp;
    }
    let dyadic: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    let mut tail_seq = Vec::new();
    let mut kernel_seq = Vec::new();
    for &e in &dyadic {
        tail_seq.push(e * e * (tails.mu_minus(-e)?.abs() + tails.mu_plus(e)?.abs()));
        kernel_seq.push(e * (kernels.k_minus(-e)?.abs() + kernels.k_plus(e)?.abs()));
    }
    let tail_limit = tends_to_zero(&tail_seq);
    let kernel_limit = tends_to_zero(&kernel_seq);
    let tol = Tolerance::new(1e-12, 1e-9);
    let abs_k = |u: f64| kernels.k_plus(u).unwrap_or(f64::NAN).abs() + kernels.k_minus(-u).unwrap_or(f64::NAN).abs();
    let adaptive = quad::integrate_singular_at_left(&abs_k, 0.0, anchor, tol)?;
    let parts = triplet.parts();
    // k± ≥ 0 on (0, a], so the L1 norm is the plain integral
    let exact = parts.plus.kernel_integral(0.0, anchor, anchor)? + parts.minus.kernel_integral(0.0, anchor, anchor)?;
    let kernel_integrable = adaptive.is_finite() && (adaptive - exact).abs() <= 1e-6 * exact.abs().max(1e-12);
    let kernel = Arc::new(unified_kernel(triplet, &kernels));
    let table = tabulate_kernel(kernel, h, radius)?;
    let symbol = kernel_symbol_check(triplet, &table, &default_frequencies())?;
    Ok(KernelPropertyReport {
        tail_signs_monotone,
        tails_vanish,
        tail_limit,
        kernel_limit,
        kernel_signs_monotone,
        kernel_l1: (adaptive, exact),
        kernel_integrable,
        symbol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{JumpLaw, LevyFamily, LevyMeasureSpec};

    #[test]
    fn poisson_tails_and_kernels() {
        let p = LevyTriplet::poisson(1.0, 0.0).unwrap();
        let tails = tail_functions(&p);
        assert_eq!(tails.mu_plus(0.5).unwrap(), -1.0);
        assert_eq!(tails.mu_plus(1.5).unwrap(), 0.0);
        assert_eq!(tails.mu_minus(-0.5).unwrap(), 0.0);
        let k = kernel_functions(&tails, 1.0).unwrap();
        assert!((k.k_plus(0.25).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(k.k_plus(1.5).unwrap(), 0.0);
        assert_eq!(k.gamma2, -1.0);
        assert_eq!(k.big_gamma, -1.0);
    }

    #[test]
    fn brownian_kernels_vanish() {
        let b = LevyTriplet::brownian(1.0, 0.0).unwrap();
        let k = kernel_functions(&tail_functions(&b), 1.0).unwrap();
        assert_eq!(k.k_plus(0.3).unwrap(), 0.0);
        assert_eq!(k.k_minus(-0.3).unwrap(), 0.0);
        assert_eq!(k.big_gamma, 0.0);
        let drift = LevyTriplet::brownian(1.0, 1.0).unwrap();
        let kern = UnifiedKernel::from_triplet(&drift, 1.0).unwrap();
        assert_eq!(kern.eval(0.4).unwrap(), -0.5);
        assert_eq!(kern.eval(-0.4).unwrap(), 0.5);
    }

    #[test]
    fn cauchy_tails_and_kernels() {
        let c = LevyTriplet::cauchy(1.0).unwrap();
        let tails = tail_functions(&c);
        assert!((tails.mu_plus(1.0).unwrap() + 1.0 / PI).abs() < 1e-15);
        let k = kernel_functions(&tails, 1.0).unwrap();
        let x = (-1.0f64).exp();
        assert!((k.k_plus(x).unwrap() - 1.0 / PI).abs() < 1e-14);
        assert!((k.k_minus(-x).unwrap() - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn symmetric_stable_kernel_is_even() {
        let s = LevyTriplet::stable(1.5, 1.0, 0.0, 0.0).unwrap();
        let kern = UnifiedKernel::from_triplet(&s, 2.0).unwrap();
        for u in [0.01, 0.3, 1.7, 4.0] {
            let (p, m) = (kern.eval(u).unwrap(), kern.eval(-u).unwrap());
            assert!((p - m).abs() < 1e-12 * p.abs().max(1.0));
        }
    }

    #[test]
    fn anchor_shift_is_a_constant() {
        let t = LevyTriplet::new(
            0.0,
            0.3,
            LevyMeasureSpec::Family(LevyFamily::Cgmy {
                c: 0.5,
                g: 1.0,
                m: 3.0,
                y: 0.7,
            }),
        )
        .unwrap();
        let k1 = UnifiedKernel::from_triplet(&t, 1.0).unwrap();
        let k3 = UnifiedKernel::from_triplet(&t, 3.0).unwrap();
        let shift = k3.eval(0.5).unwrap() - k1.eval(0.5).unwrap();
        for u in [-2.5, -0.2, 0.05, 1.2, 4.0] {
            let d = k3.eval(u).unwrap() - k1.eval(u).unwrap();
            assert!((d - shift).abs() < 1e-9, "u={u}: {d} vs {shift}");
        }
    }

    #[test]
    fn table_cells_match_direct_integrals() {
        let t = LevyTriplet::new(
            0.0,
            0.0,
            LevyMeasureSpec::Family(LevyFamily::Gamma { shape: 2.0, rate: 3.0 }),
        )
        .unwrap();
        let kern = Arc::new(UnifiedKernel::from_triplet(&t, 2.0).unwrap());
        let table = tabulate_kernel(kern.clone(), 0.01, 3.0).unwrap();
        for j in [-250i64, -3, 0, 1, 17, 299] {
            let c = j as f64 * 0.01;
            let direct = kern.cell_integral(c - 0.005, c + 0.005).unwrap();
            let tab = table.cell_integral(c, 0.01).unwrap();
            assert!((direct - tab).abs() < 1e-11, "j={j}: {direct} vs {tab}");
        }
        assert!(matches!(table.cell_integral(3.2, 0.01), Err(LevyError::TableCoverage { .. })));
    }

    #[test]
    fn symbol_check_examples() {
        let b = LevyTriplet::brownian(1.0, 0.0).unwrap();
        let kern = Arc::new(UnifiedKernel::from_triplet(&b, 1.0).unwrap());
        let table = tabulate_kernel(kern, 1e-2, 50.0).unwrap();
        let r = kernel_symbol_check(&b, &table, &default_frequencies()).unwrap();
        assert!(r.max_residual < 1e-12);

        let p = LevyTriplet::poisson(1.0, 0.0).unwrap();
        let z = PI;
        let re = levy_symbol(&p, z).unwrap().re / (z * z);
        assert!((re - 0.20264).abs() < 1e-5);

        let c = LevyTriplet::cauchy(1.0).unwrap();
        let kern = Arc::new(UnifiedKernel::from_triplet(&c, 1.0).unwrap());
        let table = tabulate_kernel(kern, 1e-3, 50.0).unwrap();
        let r = kernel_symbol_check(&c, &table, &[2.0]).unwrap();
        assert!(r.max_residual < 1e-3, "{r:?}");

        assert!(matches!(
            kernel_symbol_check(&c, &table, &[0.1]),
            Err(LevyError::TruncationRadius { .. })
        ));
    }

    #[test]
    fn type_two_zoo_passes_property_suite() {
        use LevyFamily::*;
        let zoo = [
            (0.0, Stable { alpha: 0.8, scale: 1.0, skew: 0.3 }),
            (0.0, Stable { alpha: 1.0, scale: 1.0, skew: 0.0 }),
            (0.0, Stable { alpha: 1.0, scale: 0.5, skew: 0.6 }),
            (0.0, Stable { alpha: 1.5, scale: 1.0, skew: 0.0 }),
            (0.0, Stable { alpha: 1.5, scale: 1.0, skew: 0.5 }),
            (0.0, Gamma { shape: 2.0, rate: 3.0 }),
            (0.0, Cgmy { c: 1.0, g: 2.0, m: 3.0, y: 0.0 }),
            (0.0, Cgmy { c: 0.5, g: 1.0, m: 4.0, y: 1.5 }),
            (1.0, Brownian),
        ];
        for (a, f) in zoo {
            let t = LevyTriplet::new(a, 0.2, LevyMeasureSpec::Family(f)).unwrap();
            let report = kernel_property_report(&t, 2.0, 1e-3, 50.0).unwrap();
            assert!(report.passes(1e-3, 1e-8), "{f:?}: {report:?}");
        }
    }

    #[test]
    fn drifted_compound_poisson_passes_symbol_check() {
        let t = LevyTriplet::new(
            0.5,
            -0.7,
            LevyMeasureSpec::Family(LevyFamily::CompoundPoisson {
                rate: 1.5,
                jumps: JumpLaw::Normal { mean: 0.4, sd: 0.3 },
            }),
        )
        .unwrap();
        let report = kernel_property_report(&t, 2.0, 1e-3, 50.0).unwrap();
        assert!(report.passes(1e-3, 1e-8), "{report:?}");
    }
}
