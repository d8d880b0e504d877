//! One-sided pieces of a Lévy measure.
//!
//! Each half-line of ν is stored as atoms, an optional pure power law
//! `c r^{-1-β}` on `(0, cutoff]`, and a remainder density that is milder at the
//! origin. Everything the kernel code needs (tails, anchored kernels, cell
//! integrals, moments, symbol pieces) is a linear functional of ν, so it is
//! evaluated piece by piece: closed forms for atoms and power laws, adaptive
//! quadrature for the remainder.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{LevyError, Result};
use crate::quad::{self, Tolerance};

/// `c r^{-1-index}` on `(0, cutoff]`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PowerLaw {
    pub coeff: f64,
    pub index: f64,
    pub cutoff: f64,
}

/// How fast the remainder decays, used to pick integration strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDecay {
    /// Exponential (or faster) decay on the given length scale.
    Exponential { scale: f64 },
    /// Density decays like `|x|^{-1-index}`.
    PowerLaw { index: f64 },
    /// Density vanishes beyond the given radius.
    Compact { radius: f64 },
}

pub(crate) type RadialDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub(crate) struct Remainder {
    pub density: RadialDensity,
    pub decay: TailDecay,
    /// Radii where the density jumps (e.g. where a power-law piece is cut off).
    pub kinks: Vec<f64>,
}

impl fmt::Debug for Remainder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Remainder")
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

/// One half-line of ν expressed in the radial variable `r = |x| > 0`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Side {
    pub atoms: Vec<(f64, f64)>,
    pub power: Option<PowerLaw>,
    pub remainder: Option<Remainder>,
}

fn tol() -> Tolerance {
    Tolerance::new(1e-14, 1e-11)
}

impl PowerLaw {
    fn tail(&self, t: f64) -> f64 {
        let (c, b, x) = (self.coeff, self.index, self.cutoff);
        if t >= x {
            return 0.0;
        }
        if b == 0.0 {
            c * (x / t).ln()
        } else {
            (c / b) * (t.powf(-b) - x.powf(-b))
        }
    }

    /// Antiderivative of the tail, continued as a constant past the cutoff.
    fn q(&self, t: f64) -> f64 {
        let (c, b, x) = (self.coeff, self.index, self.cutoff);
        let t = t.min(x);
        if b == 0.0 {
            c * t * ((x / t).ln() + 1.0)
        } else if b == 1.0 {
            let lin = if x.is_finite() { t / x } else { 0.0 };
            c * (t.ln() - lin)
        } else {
            let xb = if x.is_finite() { x.powf(-b) } else { 0.0 };
            (c / b) * (t.powf(1.0 - b) / (1.0 - b) - xb * t)
        }
    }

    /// `∫_0^t q`, finite because `index < 2`.
    fn r(&self, t: f64) -> f64 {
        let (c, b, x) = (self.coeff, self.index, self.cutoff);
        if t <= 0.0 {
            return 0.0;
        }
        if t > x {
            return self.r(x) + self.q(x) * (t - x);
        }
        if b == 0.0 {
            c * 0.5 * t * t * ((x / t).ln() + 1.5)
        } else if b == 1.0 {
            let quad = if x.is_finite() { t * t / (2.0 * x) } else { 0.0 };
            c * (t * t.ln() - t - quad)
        } else {
            let xb = if x.is_finite() { x.powf(-b) } else { 0.0 };
            (c / b) * (t.powf(2.0 - b) / ((1.0 - b) * (2.0 - b)) - xb * 0.5 * t * t)
        }
    }

    /// `∫_{[lo,hi)} r^p ν(dr)`.
    fn moment(&self, lo: f64, hi: f64, p: f64) -> f64 {
        let hi = hi.min(self.cutoff);
        if hi <= lo {
            return 0.0;
        }
        let e = p - self.index;
        if e == 0.0 {
            self.coeff * (hi / lo).ln()
        } else {
            let lo_term = if lo == 0.0 {
                if e > 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                lo.powf(e)
            };
            self.coeff * (hi.powf(e) - lo_term) / e
        }
    }

    /// Symbol pieces `(∫(1-cos rz)ν, ∫(rz 1_{r<1} - sin rz)ν)`.
    fn symbol_parts(&self, z: f64) -> Result<(f64, f64)> {
        if z == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (c, b) = (self.coeff, self.index);
        if self.cutoff.is_infinite() {
            let az = z.abs();
            let s = z.signum();
            if b == 1.0 {
                let euler = 0.577_215_664_901_532_9_f64;
                return Ok((c * PI * az / 2.0, c * z * (euler - 1.0 + az.ln())));
            }
            let g = gamma(-b);
            let cos_part = -c * g * (PI * b / 2.0).cos() * az.powf(b);
            let sin_part = c * (z / (1.0 - b) + s * g * az.powf(b) * (PI * b / 2.0).sin());
            return Ok((cos_part, sin_part));
        }
        // finite cutoff: quadrature with the power singularity at the origin
        let x = self.cutoff;
        let f_cos = |r: f64| c * r.powf(-1.0 - b) * (2.0 * (0.5 * r * z).sin().powi(2));
        let f_sin = |r: f64| {
            let v = if r < 1.0 { x_minus_sin(r * z) } else { -(r * z).sin() };
            c * r.powf(-1.0 - b) * v
        };
        let mut breaks = vec![x.min(1.0)];
        if x > 1.0 {
            breaks.push(x);
        }
        let first = breaks[0];
        let mut cos_part = quad::integrate_singular_at_left(&f_cos, 0.0, first, tol())?;
        let mut sin_part = quad::integrate_singular_at_left(&f_sin, 0.0, first, tol())?;
        if breaks.len() == 2 {
            let pieces = period_breaks(1.0, x, z);
            cos_part += quad::integrate_pieces(&f_cos, &pieces, tol())?;
            sin_part += quad::integrate_pieces(&f_sin, &pieces, tol())?;
        }
        Ok((cos_part, sin_part))
    }
}

/// `x - sin x` without cancellation for small `x`.
pub(crate) fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        // x³/6 - x⁵/120 + ...
        let mut term = x * x2 / 6.0;
        let mut sum = 0.0;
        for k in 1..12 {
            sum += term;
            let k = k as f64;
            term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        sum
    } else {
        x - x.sin()
    }
}

fn period_breaks(a: f64, b: f64, z: f64) -> Vec<f64> {
    let period = 2.0 * PI / z.abs().max(1e-300);
    let n = (((b - a) / period).ceil() as usize).clamp(1, 100_000);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

impl Remainder {
    fn rho(&self, r: f64) -> f64 {
        (self.density)(r)
    }

    fn scale(&self) -> f64 {
        match self.decay {
            TailDecay::Exponential { scale } => scale,
            TailDecay::PowerLaw { .. } => 1.0,
            TailDecay::Compact { radius } => radius,
        }
    }

    /// `∫_t^∞ ρ`.
    fn tail(&self, t: f64) -> Result<f64> {
        let last_kink = self.kinks.iter().cloned().filter(|&k| k > t).fold(t, f64::max);
        let inner = self.weighted(|_| 1.0, t, last_kink)?;
        let t = last_kink;
        if let TailDecay::Compact { radius } = self.decay {
            return Ok(inner + self.weighted(|_| 1.0, t, radius)?);
        }
        let rho = |r: f64| self.rho(r);
        let start = t.min(self.scale());
        Ok(inner + quad::integrate_to_infinity(&rho, t, start.max(t * 0.5), tol())?)
    }

    /// `∫_lo^hi f(r) ρ(r) dr` with `lo` possibly zero.
    fn weighted<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let g = |r: f64| f(r) * self.rho(r);
        let mut breaks = vec![lo];
        // geometric breaks keep panels proportional to the distance from the origin
        let mut x = if lo == 0.0 { hi.min(self.kinks.first().cloned().unwrap_or(hi)) } else { lo };
        if lo == 0.0 {
            breaks.push(x);
        }
        while x < hi {
            x = (2.0 * x).min(hi);
            breaks.push(x);
        }
        breaks.extend(self.kinks.iter().filter(|&&k| k > lo && k < hi));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut total = 0.0;
        for (i, w) in breaks.windows(2).enumerate() {
            total += if i == 0 && lo == 0.0 {
                quad::integrate_singular_at_left(&g, 0.0, w[1], tol())?
            } else {
                quad::integrate_with_error(&g, w[0], w[1], tol())?.0
            };
        }
        Ok(total)
    }

    fn k(&self, u: f64, anchor: f64) -> Result<f64> {
        let (lo, hi) = if u < anchor { (u, anchor) } else { (anchor, u) };
        let sign = if u < anchor { 1.0 } else { -1.0 };
        let body = self.weighted(|r| r - lo, lo, hi)?;
        Ok(sign * body + (anchor - u) * self.tail(hi)?)
    }

    fn cell(&self, u1: f64, u2: f64, anchor: f64) -> Result<f64> {
        // ∫_0^u (min(r,a) - min(r,s)) ds, written per region to avoid cancellation
        let w = |u: f64, r: f64| match (r < u, r < anchor) {
            (true, true) => 0.5 * r * r,
            (true, false) => u * anchor - u * r + 0.5 * r * r,
            (false, true) => u * r - 0.5 * u * u,
            (false, false) => u * anchor - 0.5 * u * u,
        };
        let diff = |r: f64| w(u2, r) - w(u1, r);
        let start = u1.min(anchor);
        let end = u2.max(anchor);
        let mut breaks = vec![start, u1, u2, anchor, end];
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut total = 0.0;
        for pair in breaks.windows(2) {
            total += self.weighted(diff, pair[0], pair[1])?;
        }
        let constant = (u2 - u1) * anchor - 0.5 * (u2 * u2 - u1 * u1);
        Ok(total + constant * self.tail(end)?)
    }

    /// `∫_0^p k` at every point of an increasing positive sequence.
    ///
    /// Uses `R(p) = p M₁(p) - M₂(p)/2 + p² T(p)/2` with cumulative moments
    /// `M_j(p) = ∫_0^p r^j ρ`, so each step only integrates between neighbours.
    fn primitives(&self, points: &[f64], anchor: f64) -> Result<Vec<f64>> {
        let n = points.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let segments: Vec<(f64, f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let hi = points[i];
                if i == 0 {
                    let m1 = self.weighted(|r| r, 0.0, hi)?;
                    let m2 = self.weighted(|r| r * r, 0.0, hi)?;
                    return Ok((0.0, m1, m2));
                }
                let lo = points[i - 1];
                let m0 = self.weighted(|_| 1.0, lo, hi)?;
                let m1 = self.weighted(|r| r, lo, hi)?;
                let m2 = self.weighted(|r| r * r, lo, hi)?;
                Ok((m0, m1, m2))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut tails = vec![0.0; n];
        tails[n - 1] = self.tail(points[n - 1])?;
        for i in (0..n - 1).rev() {
            tails[i] = tails[i + 1] + segments[i + 1].0;
        }
        let q_anchor = self.weighted(|r| r, 0.0, anchor)? + anchor * self.tail(anchor)?;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            m1 += segments[i].1;
            m2 += segments[i].2;
            let p = points[i];
            let r = p * m1 - 0.5 * m2 + 0.5 * p * p * tails[i];
            out.push(p * q_anchor - r);
        }
        Ok(out)
    }

    fn symbol_parts(&self, z: f64) -> Result<(f64, f64)> {
        if z == 0.0 {
            return Ok((0.0, 0.0));
        }
        let f_cos = |r: f64| 2.0 * (0.5 * r * z).sin().powi(2);
        let f_sin_inner = |r: f64| x_minus_sin(r * z);
        let mut cos_part = 0.0;
        let mut sin_part = 0.0;
        // [0, 1]
        let inner_breaks = period_breaks(0.0, 1.0, z);
        let first = inner_breaks[1];
        cos_part += self.weighted(f_cos, 0.0, first)?;
        sin_part += self.weighted(f_sin_inner, 0.0, first)?;
        for w in inner_breaks[1..].windows(2) {
            cos_part += self.weighted(f_cos, w[0], w[1])?;
            sin_part += self.weighted(f_sin_inner, w[0], w[1])?;
        }
        // [1, ∞)
        match self.decay {
            TailDecay::Compact { radius } => {
                if radius > 1.0 {
                    let pieces = period_breaks(1.0, radius, z);
                    for w in pieces.windows(2) {
                        cos_part += self.weighted(f_cos, w[0], w[1])?;
                        sin_part += self.weighted(|r| -(r * z).sin(), w[0], w[1])?;
                    }
                }
            }
            TailDecay::Exponential { scale } => {
                let g_cos = |r: f64| f_cos(r) * self.rho(r);
                let g_sin = |r: f64| -(r * z).sin() * self.rho(r);
                let width = scale.min(PI / z.abs());
                cos_part += quad::integrate_to_infinity(&g_cos, 1.0, width, tol())?;
                sin_part += quad::integrate_to_infinity(&g_sin, 1.0, width, tol())?;
            }
            TailDecay::PowerLaw { .. } => {
                let rho = |r: f64| self.rho(r);
                let mass = self.tail(1.0)?;
                let (re, im) = quad::fourier_tail(&rho, 1.0, z, 200, tol())?;
                cos_part += mass - re;
                sin_part -= im;
            }
        }
        Ok((cos_part, sin_part))
    }
}

impl Side {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.power.is_none() && self.remainder.is_none()
    }

    /// ν(side ∩ {r > t}) or, with `closed`, ν(side ∩ {r ≥ t}).
    pub fn tail(&self, t: f64, closed: bool) -> Result<f64> {
        let mut total: f64 = self
            .atoms
            .iter()
            .filter(|(r, _)| if closed { *r >= t } else { *r > t })
            .map(|(_, m)| m)
            .sum();
        if let Some(p) = &self.power {
            total += p.tail(t);
        }
        if let Some(rem) = &self.remainder {
            total += rem.tail(t)?;
        }
        Ok(total)
    }

    /// Anchored kernel `∫_u^anchor T(t) dt` (signed when `u > anchor`).
    pub fn kernel(&self, u: f64, anchor: f64) -> Result<f64> {
        let mut total: f64 = self
            .atoms
            .iter()
            .map(|(r, m)| m * (anchor.min(*r) - u.min(*r)))
            .sum();
        if let Some(p) = &self.power {
            total += p.q(anchor) - p.q(u);
        }
        if let Some(rem) = &self.remainder {
            total += rem.k(u, anchor)?;
        }
        Ok(total)
    }

    /// `∫_{u1}^{u2} kernel(s) ds` for `0 <= u1 < u2`.
    pub fn kernel_integral(&self, u1: f64, u2: f64, anchor: f64) -> Result<f64> {
        if u2 <= u1 {
            return Ok(0.0);
        }
        let atom_r = |u: f64, r: f64| if u <= r { 0.5 * u * u } else { r * u - 0.5 * r * r };
        let mut total: f64 = self
            .atoms
            .iter()
            .map(|(r, m)| m * ((u2 - u1) * anchor.min(*r) - (atom_r(u2, *r) - atom_r(u1, *r))))
            .sum();
        if let Some(p) = &self.power {
            total += (u2 - u1) * p.q(anchor) - (p.r(u2) - p.r(u1));
        }
        if let Some(rem) = &self.remainder {
            total += rem.cell(u1, u2, anchor)?;
        }
        Ok(total)
    }

    /// `∫_0^p kernel` at each point of an increasing positive sequence.
    pub fn primitives(&self, points: &[f64], anchor: f64) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = points
            .iter()
            .map(|&p| {
                let atoms: f64 = self
                    .atoms
                    .iter()
                    .map(|(r, m)| {
                        let rr = if p <= *r { 0.5 * p * p } else { r * p - 0.5 * r * r };
                        m * (p * anchor.min(*r) - rr)
                    })
                    .sum();
                let power = self.power.map_or(0.0, |pl| p * pl.q(anchor) - pl.r(p));
                atoms + power
            })
            .collect();
        if let Some(rem) = &self.remainder {
            for (o, v) in out.iter_mut().zip(rem.primitives(points, anchor)?) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// `∫_{[lo,hi)} r^p ν(dr)` on this side.
    pub fn moment(&self, lo: f64, hi: f64, p: f64) -> Result<f64> {
        let mut total: f64 = self
            .atoms
            .iter()
            .filter(|(r, _)| *r >= lo && *r < hi)
            .map(|(r, m)| m * r.powf(p))
            .sum();
        if let Some(pl) = &self.power {
            total += pl.moment(lo, hi, p);
        }
        if let Some(rem) = &self.remainder {
            let upper = hi.min(match rem.decay {
                TailDecay::Compact { radius } => radius,
                _ => f64::INFINITY,
            });
            if upper.is_infinite() {
                let split = lo.max(1.0);
                total += rem.weighted(|r| r.powf(p), lo, split)?;
                let g = |r: f64| r.powf(p) * rem.rho(r);
                total += quad::integrate_to_infinity(&g, split, rem.scale(), tol())?;
            } else {
                total += rem.weighted(|r| r.powf(p), lo, upper)?;
            }
        }
        Ok(total)
    }

    /// `(∫(1-cos rz)ν(dr), ∫(rz 1_{r<1} - sin rz)ν(dr))` over this side.
    pub fn symbol_parts(&self, z: f64) -> Result<(f64, f64)> {
        let mut c = 0.0;
        let mut d = 0.0;
        for (r, m) in &self.atoms {
            c += m * 2.0 * (0.5 * r * z).sin().powi(2);
            let lin = if *r < 1.0 { r * z } else { 0.0 };
            d += m * (lin - (r * z).sin());
        }
        if let Some(p) = &self.power {
            let (pc, pd) = p.symbol_parts(z)?;
            c += pc;
            d += pd;
        }
        if let Some(rem) = &self.remainder {
            let (rc, rd) = rem.symbol_parts(z)?;
            c += rc;
            d += rd;
        }
        Ok((c, d))
    }

    /// Density of the absolutely continuous part at radius `r > 0`.
    pub fn density(&self, r: f64) -> f64 {
        let mut v = 0.0;
        if let Some(p) = &self.power {
            if r <= p.cutoff {
                v += p.coeff * r.powf(-1.0 - p.index);
            }
        }
        if let Some(rem) = &self.remainder {
            v += rem.rho(r);
        }
        v
    }
}

/// Both half-lines: `plus` holds ν on (0,∞), `minus` holds ν on (-∞,0) mirrored.
#[derive(Debug, Clone, Default)]
pub(crate) struct MeasureParts {
    pub plus: Side,
    pub minus: Side,
}

impl MeasureParts {
    pub fn side(&self, positive: bool) -> &Side {
        if positive {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// Second moment of jumps with `|x| < eps`.
    pub fn small_jump_variance(&self, eps: f64) -> Result<f64> {
        Ok(self.plus.moment(0.0, eps, 2.0)? + self.minus.moment(0.0, eps, 2.0)?)
    }

    /// `∫_{[lo,hi)} x ν(dx)` over both sides (signed first moment).
    pub fn signed_first_moment(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.plus.moment(lo, hi, 1.0)? - self.minus.moment(lo, hi, 1.0)?)
    }

    pub fn check_quadrature(&self) -> Result<()> {
        for side in [&self.plus, &self.minus] {
            if let Some(p) = side.power {
                if !(0.0..2.0).contains(&p.index) || p.coeff < 0.0 {
                    return Err(LevyError::InvalidParameter(format!(
                        "power-law index {} outside [0, 2)",
                        p.index
                    )));
                }
                if p.index == 0.0 && p.cutoff.is_infinite() {
                    return Err(LevyError::InvalidParameter(
                        "index-0 power law needs a finite cutoff".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
