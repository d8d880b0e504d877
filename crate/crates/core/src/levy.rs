//! Lévy triplets, the built-in families, and the questions asked of a triplet
//! before any discretization happens: process type, support, symmetry, symbol.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::error::{LevyError, Result};
use crate::measure::{x_minus_sin, MeasureParts, PowerLaw, RadialDensity, Remainder, Side, TailDecay};
use crate::operator::Domain;
use crate::quad::{self, Tolerance};

/// Point mass of ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// Jump-size law of a compound Poisson process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    Fixed { size: f64 },
    /// Positive jumps with density `rate·e^{-rate·x}`.
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
}

/// Named parametric families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LevyFamily {
    /// ν = 0; the Gaussian part comes from `A`.
    Brownian,
    /// Unit jumps at the given rate, ν = rate·δ₁.
    Poisson { rate: f64 },
    CompoundPoisson { rate: f64, jumps: JumpLaw },
    /// Strictly `α`-stable jumps; `scale` is σ in `σ^α|z|^α`.
    Stable { alpha: f64, scale: f64, skew: f64 },
    /// ν(dx) = shape·e^{-rate·x}/x on x > 0.
    Gamma { shape: f64, rate: f64 },
    /// Tempered stable: `C e^{-G|x|}|x|^{-1-Y}` for x < 0, `C e^{-Mx}x^{-1-Y}` for x > 0.
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
}

/// Declared behaviour of a density at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NearZero {
    /// Bounded near 0, so the measure has finite mass there.
    Finite,
    /// `f(x) ≈ coeff_± |x|^{-1-index}` as `x → 0±`, with `index ∈ [0, 2)`.
    PowerLaw {
        index: f64,
        coeff_plus: f64,
        coeff_minus: f64,
    },
}

/// A user-supplied Lévy density.
#[derive(Clone)]
pub struct DensityMeasure {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    near_zero: Option<NearZero>,
    decay: TailDecay,
    label: String,
}

impl DensityMeasure {
    pub fn new<F>(label: impl Into<String>, density: F, near_zero: Option<NearZero>, decay: TailDecay) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            density: Arc::new(density),
            near_zero,
            decay,
            label: label.into(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    pub fn near_zero(&self) -> Option<NearZero> {
        self.near_zero
    }

    pub fn decay(&self) -> TailDecay {
        self.decay
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for DensityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMeasure")
            .field("label", &self.label)
            .field("near_zero", &self.near_zero)
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum LevyMeasureSpec {
    Atoms(Vec<Atom>),
    Density(DensityMeasure),
    Family(LevyFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessType {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SupportDescriptor {
    FullLine,
    /// Support of `X_t` is `[t·rate, ∞)`.
    HalfLineUp { rate: f64 },
    /// Support of `X_t` is `(-∞, t·rate]`.
    HalfLineDown { rate: f64 },
    /// No noise at all: `X_t = t·rate`.
    Degenerate { rate: f64 },
}

/// Immutable `(A, γ, ν)` together with its decomposition into kernel-friendly pieces.
#[derive(Debug, Clone)]
pub struct LevyTriplet {
    a: f64,
    gamma: f64,
    measure: LevyMeasureSpec,
    parts: MeasureParts,
}

impl LevyTriplet {
    pub fn new(a: f64, gamma: f64, measure: LevyMeasureSpec) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(LevyError::InvalidParameter(format!("diffusion coefficient A = {a} must be >= 0")));
        }
        if !gamma.is_finite() {
            return Err(LevyError::InvalidParameter(format!("drift {gamma} is not finite")));
        }
        validate_measure(&measure)?;
        let parts = decompose(&measure);
        parts.check_quadrature()?;
        Ok(Self {
            a,
            gamma,
            measure,
            parts,
        })
    }

    pub fn brownian(a: f64, gamma: f64) -> Result<Self> {
        Self::new(a, gamma, LevyMeasureSpec::Family(LevyFamily::Brownian))
    }

    pub fn poisson(rate: f64, gamma: f64) -> Result<Self> {
        Self::new(0.0, gamma, LevyMeasureSpec::Family(LevyFamily::Poisson { rate }))
    }

    pub fn stable(alpha: f64, scale: f64, skew: f64, gamma: f64) -> Result<Self> {
        Self::new(0.0, gamma, LevyMeasureSpec::Family(LevyFamily::Stable { alpha, scale, skew }))
    }

    /// Symmetric Cauchy process with `λ(z) = scale·|z|`.
    pub fn cauchy(scale: f64) -> Result<Self> {
        Self::stable(1.0, scale, 0.0, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn measure(&self) -> &LevyMeasureSpec {
        &self.measure
    }

    pub(crate) fn parts(&self) -> &MeasureParts {
        &self.parts
    }

    pub fn family(&self) -> Option<LevyFamily> {
        match &self.measure {
            LevyMeasureSpec::Family(f) => Some(*f),
            _ => None,
        }
    }

    /// Density of the absolutely continuous part of ν at `x ≠ 0`.
    pub fn density(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.parts.plus.density(x)
        } else if x < 0.0 {
            self.parts.minus.density(-x)
        } else {
            f64::NAN
        }
    }

    /// Drift in the finite-variation representation, `γ - ∫_{|x|<1} x ν(dx)`.
    ///
    /// Only meaningful when `∫_{|x|<1} |x| ν(dx) < ∞`.
    pub fn finite_variation_drift(&self) -> Result<f64> {
        Ok(self.gamma - self.parts.signed_first_moment(0.0, 1.0)?)
    }

    /// Short canonical description, used for hashing problem setups.
    pub fn describe(&self) -> String {
        let m = match &self.measure {
            LevyMeasureSpec::Atoms(atoms) => format!("atoms{:?}", atoms),
            LevyMeasureSpec::Density(d) => format!("density({};{:?};{:?})", d.label, d.near_zero, d.decay),
            LevyMeasureSpec::Family(f) => format!("{:?}", f),
        };
        format!("A={:e};gamma={:e};{}", self.a, self.gamma, m)
    }

    /// Per-side finiteness flags `(mass near 0, first moment near 0, first moment at ∞)`.
    fn side_flags(&self, positive: bool) -> (bool, bool, bool) {
        let side = self.parts.side(positive);
        let (mass0, first0) = match side.power {
            Some(p) if p.coeff > 0.0 => (false, p.index < 1.0),
            _ => (true, true),
        };
        let first_inf = match side.power {
            Some(p) if p.cutoff.is_infinite() && p.coeff > 0.0 => p.index > 1.0,
            _ => match &side.remainder {
                Some(r) => !matches!(r.decay, TailDecay::PowerLaw { index } if index <= 1.0),
                None => true,
            },
        };
        (mass0, first0, first_inf)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LevyError::InvalidParameter(format!("{name} = {v} must be positive and finite")))
    }
}

fn validate_measure(measure: &LevyMeasureSpec) -> Result<()> {
    match measure {
        LevyMeasureSpec::Atoms(atoms) => {
            for atom in atoms {
                if atom.position == 0.0 || !atom.position.is_finite() {
                    return Err(LevyError::InvalidParameter(format!(
                        "atom position {} must be finite and nonzero",
                        atom.position
                    )));
                }
                positive("atom mass", atom.mass)?;
            }
        }
        LevyMeasureSpec::Density(d) => {
            if let Some(NearZero::PowerLaw {
                index,
                coeff_plus,
                coeff_minus,
            }) = d.near_zero
            {
                if !(0.0..2.0).contains(&index) {
                    return Err(LevyError::InvalidParameter(format!(
                        "near-zero index {index} must lie in [0, 2)"
                    )));
                }
                if coeff_plus < 0.0 || coeff_minus < 0.0 {
                    return Err(LevyError::InvalidParameter("near-zero coefficients must be >= 0".into()));
                }
            }
            for k in -6..=6 {
                let x = 10f64.powf(k as f64 / 2.0);
                for v in [d.eval(x), d.eval(-x)] {
                    if v.is_nan() || v < 0.0 {
                        return Err(LevyError::InvalidParameter(format!(
                            "density is negative or undefined near |x| = {x}"
                        )));
                    }
                }
            }
        }
        LevyMeasureSpec::Family(f) => match *f {
            LevyFamily::Brownian => {}
            LevyFamily::Poisson { rate } => positive("rate", rate)?,
            LevyFamily::CompoundPoisson { rate, jumps } => {
                positive("rate", rate)?;
                match jumps {
                    JumpLaw::Fixed { size } => {
                        if size == 0.0 || !size.is_finite() {
                            return Err(LevyError::InvalidParameter("jump size must be finite and nonzero".into()));
                        }
                    }
                    JumpLaw::Exponential { rate } => positive("jump rate", rate)?,
                    JumpLaw::Normal { mean, sd } => {
                        positive("jump sd", sd)?;
                        if !mean.is_finite() {
                            return Err(LevyError::InvalidParameter("jump mean must be finite".into()));
                        }
                    }
                }
            }
            LevyFamily::Stable { alpha, scale, skew } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(LevyError::InvalidParameter(format!("stable index {alpha} outside (0, 2)")));
                }
                positive("scale", scale)?;
                if !(-1.0..=1.0).contains(&skew) {
                    return Err(LevyError::InvalidParameter(format!("skew {skew} outside [-1, 1]")));
                }
            }
            LevyFamily::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)?;
            }
            LevyFamily::Cgmy { c, g, m, y } => {
                positive("C", c)?;
                positive("G", g)?;
                positive("M", m)?;
                if !(0.0..2.0).contains(&y) {
                    return Err(LevyError::InvalidParameter(format!("Y = {y} outside [0, 2)")));
                }
            }
        },
    }
    Ok(())
}

/// Total stable mass coefficient `C` with `ν(dx) = c_± |x|^{-1-α} dx`, `c_± = (1 ± β)C/2`.
pub(crate) fn stable_coefficient(alpha: f64, scale: f64) -> f64 {
    if alpha == 1.0 {
        2.0 * scale / PI
    } else {
        scale.powf(alpha) / (-gamma(-alpha) * (PI * alpha / 2.0).cos())
    }
}

fn atoms_side(atoms: impl Iterator<Item = (f64, f64)>) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (x, m) in atoms {
        if x > 0.0 {
            plus.push((x, m));
        } else {
            minus.push((-x, m));
        }
    }
    (plus, minus)
}

fn remainder(decay: TailDecay, kinks: Vec<f64>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Option<Remainder> {
    let density: RadialDensity = Arc::new(f);
    Some(Remainder { density, decay, kinks })
}

fn decompose(measure: &LevyMeasureSpec) -> MeasureParts {
    let mut parts = MeasureParts::default();
    match measure {
        LevyMeasureSpec::Atoms(atoms) => {
            let (p, m) = atoms_side(atoms.iter().map(|a| (a.position, a.mass)));
            parts.plus.atoms = p;
            parts.minus.atoms = m;
        }
        LevyMeasureSpec::Density(d) => {
            let (index, cp, cm) = match d.near_zero {
                Some(NearZero::PowerLaw {
                    index,
                    coeff_plus,
                    coeff_minus,
                }) => (index, coeff_plus, coeff_minus),
                _ => (0.0, 0.0, 0.0),
            };
            for (positive, coeff) in [(true, cp), (false, cm)] {
                let sign = if positive { 1.0 } else { -1.0 };
                let f = d.density.clone();
                let side = if positive { &mut parts.plus } else { &mut parts.minus };
                if coeff > 0.0 {
                    side.power = Some(PowerLaw {
                        coeff,
                        index,
                        cutoff: 1.0,
                    });
                    side.remainder = remainder(d.decay, vec![1.0], move |r: f64| {
                        let singular = if r <= 1.0 { coeff * r.powf(-1.0 - index) } else { 0.0 };
                        f(sign * r) - singular
                    });
                } else {
                    side.remainder = remainder(d.decay, Vec::new(), move |r: f64| f(sign * r));
                }
            }
        }
        LevyMeasureSpec::Family(f) => match *f {
            LevyFamily::Brownian => {}
            LevyFamily::Poisson { rate } => parts.plus.atoms.push((1.0, rate)),
            LevyFamily::CompoundPoisson { rate, jumps } => match jumps {
                JumpLaw::Fixed { size } => {
                    let (p, m) = atoms_side(std::iter::once((size, rate)));
                    parts.plus.atoms = p;
                    parts.minus.atoms = m;
                }
                JumpLaw::Exponential { rate: b } => {
                    parts.plus.remainder = remainder(TailDecay::Exponential { scale: 1.0 / b }, Vec::new(), move |r| {
                        rate * b * (-b * r).exp()
                    });
                }
                JumpLaw::Normal { mean, sd } => {
                    let scale = sd.max(mean.abs());
                    for positive in [true, false] {
                        let s = if positive { 1.0 } else { -1.0 };
                        let rem = remainder(TailDecay::Exponential { scale }, Vec::new(), move |r: f64| {
                            let u = (s * r - mean) / sd;
                            rate * (-0.5 * u * u).exp() / (sd * (2.0 * PI).sqrt())
                        });
                        if positive {
                            parts.plus.remainder = rem;
                        } else {
                            parts.minus.remainder = rem;
                        }
                    }
                }
            },
            LevyFamily::Stable { alpha, scale, skew } => {
                let c = stable_coefficient(alpha, scale);
                for (side, coeff) in [(&mut parts.plus, 0.5 * (1.0 + skew) * c), (&mut parts.minus, 0.5 * (1.0 - skew) * c)] {
                    if coeff > 0.0 {
                        side.power = Some(PowerLaw {
                            coeff,
                            index: alpha,
                            cutoff: f64::INFINITY,
                        });
                    }
                }
            }
            LevyFamily::Gamma { shape, rate } => {
                parts.plus.power = Some(PowerLaw {
                    coeff: shape,
                    index: 0.0,
                    cutoff: 1.0,
                });
                parts.plus.remainder = remainder(TailDecay::Exponential { scale: 1.0 / rate }, vec![1.0], move |r: f64| {
                    if r <= 1.0 {
                        shape * (-rate * r).exp_m1() / r
                    } else {
                        shape * (-rate * r).exp() / r
                    }
                });
            }
            LevyFamily::Cgmy { c, g, m, y } => {
                for (side, damp) in [(&mut parts.plus, m), (&mut parts.minus, g)] {
                    side.power = Some(PowerLaw {
                        coeff: c,
                        index: y,
                        cutoff: 1.0,
                    });
                    side.remainder = remainder(TailDecay::Exponential { scale: 1.0 / damp }, vec![1.0], move |r: f64| {
                        let base = c * r.powf(-1.0 - y);
                        if r <= 1.0 {
                            base * (-damp * r).exp_m1()
                        } else {
                            base * (-damp * r).exp()
                        }
                    });
                }
            }
        },
    }
    parts
}

/// Type I iff `A = 0` and ν has finite total mass.
pub fn classify_type(triplet: &LevyTriplet) -> Result<ProcessType> {
    if let LevyMeasureSpec::Density(d) = &triplet.measure {
        if d.near_zero.is_none() {
            return Err(LevyError::UnclassifiableMeasure(format!(
                "density '{}' does not declare its behaviour near 0",
                d.label
            )));
        }
    }
    if triplet.a > 0.0 {
        return Ok(ProcessType::TypeII);
    }
    let finite = triplet.side_flags(true).0 && triplet.side_flags(false).0;
    Ok(if finite { ProcessType::TypeI } else { ProcessType::TypeII })
}

/// Support of `X_t` following the A / first-moment / one-sidedness case analysis.
pub fn support_of(triplet: &LevyTriplet) -> SupportDescriptor {
    let (_, p0, pinf) = triplet.side_flags(true);
    let (_, m0, minf) = triplet.side_flags(false);
    let plus = !triplet.parts.plus.is_empty();
    let minus = !triplet.parts.minus.is_empty();
    let first_moment_finite = p0 && pinf && m0 && minf;
    if triplet.a > 0.0 || !first_moment_finite || (plus && minus) {
        return SupportDescriptor::FullLine;
    }
    // finite first moment, so the finite-variation drift exists
    let rate = triplet.finite_variation_drift().unwrap_or(triplet.gamma);
    match (plus, minus) {
        (true, false) => SupportDescriptor::HalfLineUp { rate },
        (false, true) => SupportDescriptor::HalfLineDown { rate },
        _ => SupportDescriptor::Degenerate { rate },
    }
}

/// True iff γ = 0 and ν is invariant under `x ↦ -x`.
pub fn is_symmetric(triplet: &LevyTriplet) -> bool {
    if triplet.gamma != 0.0 {
        return false;
    }
    match &triplet.measure {
        LevyMeasureSpec::Atoms(atoms) => {
            let key = |v: &Vec<(f64, f64)>| {
                let mut v = v.clone();
                v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
                v
            };
            let (p, m) = atoms_side(atoms.iter().map(|a| (a.position, a.mass)));
            let (p, m) = (key(&p), key(&m));
            p.len() == m.len()
                && p.iter().zip(&m).all(|(a, b)| {
                    (a.0 - b.0).abs() <= 1e-12 * a.0.abs() && (a.1 - b.1).abs() <= 1e-12 * a.1.abs()
                })
        }
        LevyMeasureSpec::Density(d) => {
            if let Some(NearZero::PowerLaw {
                coeff_plus, coeff_minus, ..
            }) = d.near_zero
            {
                if coeff_plus != coeff_minus {
                    return false;
                }
            }
            (0..200).all(|k| {
                let x = 10f64.powf(-4.0 + 8.0 * k as f64 / 199.0);
                let (a, b) = (d.eval(x), d.eval(-x));
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
            })
        }
        LevyMeasureSpec::Family(f) => match *f {
            LevyFamily::Brownian => true,
            LevyFamily::Poisson { .. } | LevyFamily::Gamma { .. } => false,
            LevyFamily::CompoundPoisson { jumps, .. } => matches!(jumps, JumpLaw::Normal { mean, .. } if mean == 0.0),
            LevyFamily::Stable { skew, .. } => skew == 0.0,
            LevyFamily::Cgmy { g, m, .. } => g == m,
        },
    }
}

fn diffusion_and_drift(triplet: &LevyTriplet, z: f64) -> Complex64 {
    Complex64::new(0.5 * triplet.a * z * z, -triplet.gamma * z)
}

/// Jump part `∫(1 - e^{ixz} + ixz 1_{|x|<1}) ν(dx)` assembled from the side pieces.
fn jump_symbol_from_parts(parts: &MeasureParts, z: f64) -> Result<Complex64> {
    let (cp, dp) = parts.plus.symbol_parts(z)?;
    let (cm, dm) = parts.minus.symbol_parts(z)?;
    Ok(Complex64::new(cp + cm, dp - dm))
}

fn symbol_error(z: f64, e: LevyError) -> LevyError {
    LevyError::SymbolIntegration {
        z,
        detail: e.to_string(),
    }
}

/// Lévy symbol `λ(z)`, with `E e^{izX_t} = e^{-tλ(z)}`.
///
/// Closed forms are used for atoms, stable, gamma, and exponential/normal
/// compound Poisson; CGMY and user densities go through quadrature.
pub fn levy_symbol(triplet: &LevyTriplet, z: f64) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(LevyError::InvalidParameter(format!("frequency {z} is not finite")));
    }
    let base = diffusion_and_drift(triplet, z);
    let iz = Complex64::new(0.0, z);
    let jump = match triplet.family() {
        Some(LevyFamily::Gamma { shape, rate }) => {
            shape * (Complex64::new(1.0, -z / rate)).ln() + iz * shape * (-(-rate).exp_m1()) / rate
        }
        Some(LevyFamily::CompoundPoisson {
            rate,
            jumps: JumpLaw::Exponential { rate: b },
        }) => {
            let cf = Complex64::new(b, 0.0) / Complex64::new(b, -z);
            let partial = (1.0 - (-b).exp() * (1.0 + b)) / b;
            rate * (1.0 - cf) + iz * rate * partial
        }
        Some(LevyFamily::CompoundPoisson {
            rate,
            jumps: JumpLaw::Normal { mean, sd },
        }) => {
            let cf = Complex64::new(-0.5 * sd * sd * z * z, mean * z).exp();
            let n = Normal::new(0.0, 1.0).expect("standard normal");
            let (lo, hi) = ((-1.0 - mean) / sd, (1.0 - mean) / sd);
            let partial = mean * (n.cdf(hi) - n.cdf(lo)) + sd * (n.pdf(lo) - n.pdf(hi));
            rate * (1.0 - cf) + iz * rate * partial
        }
        _ => jump_symbol_from_parts(&triplet.parts, z).map_err(|e| symbol_error(z, e))?,
    };
    Ok(base + jump)
}

/// `λ(z)` by direct quadrature of the full density, split at `|x| = 1`.
///
/// Independent of the closed forms; used to cross-check them.
pub fn symbol_by_quadrature(triplet: &LevyTriplet, z: f64) -> Result<Complex64> {
    let tol = Tolerance::new(1e-13, 1e-10);
    let mut total = diffusion_and_drift(triplet, z);
    for positive in [true, false] {
        let side = triplet.parts.side(positive);
        let sign = if positive { 1.0 } else { -1.0 };
        for (r, m) in &side.atoms {
            let lin = if *r < 1.0 { r * z } else { 0.0 };
            total += Complex64::new(m * (1.0 - (r * z).cos()), sign * m * (lin - (r * z).sin()));
        }
        if side.power.is_none() && side.remainder.is_none() {
            continue;
        }
        let rho = |r: f64| side.density(r);
        let inner_c = |r: f64| rho(r) * 2.0 * (0.5 * r * z).sin().powi(2);
        let inner_d = |r: f64| rho(r) * x_minus_sin(r * z);
        let wrap = |e| symbol_error(z, e);
        let mut c = quad::integrate_singular_at_left(&inner_c, 0.0, 1.0, tol).map_err(wrap)?;
        let mut d = quad::integrate_singular_at_left(&inner_d, 0.0, 1.0, tol).map_err(wrap)?;
        let (mass, re, im) = outer_transform(side, z, tol).map_err(wrap)?;
        c += mass - re;
        d -= im;
        total += Complex64::new(c, sign * d);
    }
    Ok(total)
}

/// `(∫_1^∞ ρ, ∫_1^∞ ρ cos(rz), ∫_1^∞ ρ sin(rz))` for the continuous part of one side.
fn outer_transform(side: &Side, z: f64, tol: Tolerance) -> Result<(f64, f64, f64)> {
    let rho = |r: f64| side.density(r);
    let power_tail = side.power.is_some_and(|p| p.cutoff.is_infinite())
        || side
            .remainder
            .as_ref()
            .is_some_and(|r| matches!(r.decay, TailDecay::PowerLaw { .. }));
    let compact = side.remainder.as_ref().and_then(|r| match r.decay {
        TailDecay::Compact { radius } => Some(radius),
        _ => None,
    });
    let scale = side
        .remainder
        .as_ref()
        .map(|r| match r.decay {
            TailDecay::Exponential { scale } => scale,
            _ => 1.0,
        })
        .unwrap_or(1.0);
    if power_tail {
        // x -> 1/x turns the slowly decaying mass integral into a finite one
        let inv = |s: f64| if s > 0.0 { rho(1.0 / s) / (s * s) } else { 0.0 };
        let mass = quad::integrate_singular_at_left(&inv, 0.0, 1.0, tol)?;
        let (re, im) = quad::fourier_tail(&rho, 1.0, z, 400, tol)?;
        return Ok((mass, re, im));
    }
    let width = if z == 0.0 { scale } else { scale.min(PI / z.abs()) };
    let upper = compact.unwrap_or(f64::INFINITY);
    let run = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
        if upper.is_finite() {
            if upper <= 1.0 {
                return Ok(0.0);
            }
            let n = ((upper - 1.0) / width).ceil().clamp(1.0, 1e5) as usize;
            let breaks: Vec<f64> = (0..=n).map(|k| 1.0 + (upper - 1.0) * k as f64 / n as f64).collect();
            quad::integrate_pieces(&g, &breaks, tol)
        } else {
            quad::integrate_to_infinity(&g, 1.0, width, tol)
        }
    };
    let mass = run(&|r| rho(r))?;
    let re = run(&|r| rho(r) * (r * z).cos())?;
    let im = run(&|r| rho(r) * (r * z).sin())?;
    Ok((mass, re, im))
}

/// Outcome of the pre-flight checks on a (triplet, domain) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub process_type: Option<ProcessType>,
    pub support: SupportDescriptor,
    pub symmetric: bool,
    pub domain_in_support: bool,
    /// Type II and Δ inside the support: the spectral pipeline may run.
    pub spectral_ready: bool,
    pub messages: Vec<String>,
}

pub fn validate_problem(triplet: &LevyTriplet, domain: &Domain) -> ValidationReport {
    let mut messages = Vec::new();
    let process_type = match classify_type(triplet) {
        Ok(t) => Some(t),
        Err(e) => {
            messages.push(e.to_string());
            None
        }
    };
    if process_type == Some(ProcessType::TypeI) {
        messages.push("Type II gate: Type I process (A = 0, finite jump measure), spectral pipeline gated off".into());
    }
    let support = support_of(triplet);
    let (lo, hi) = domain.hull();
    let domain_in_support = match support {
        SupportDescriptor::FullLine => true,
        SupportDescriptor::HalfLineUp { rate } => rate < 0.0 || lo >= 0.0,
        SupportDescriptor::HalfLineDown { rate } => rate > 0.0 || hi <= 0.0,
        SupportDescriptor::Degenerate { .. } => false,
    };
    if !domain_in_support {
        messages.push(format!("domain [{lo}, {hi}] lies outside the support {support:?}"));
    }
    let symmetric = is_symmetric(triplet);
    ValidationReport {
        process_type,
        support,
        symmetric,
        domain_in_support,
        spectral_ready: process_type == Some(ProcessType::TypeII) && domain_in_support,
        messages,
    }
}
