//! Adaptive Gauss–Kronrod quadrature and the handful of interval transforms the
//! kernel and symbol code needs: geometric panels toward an integrable endpoint
//! singularity, doubling panels toward infinity, and Fourier tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LevyError, Result};

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_932_457_617,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Default::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Single 21-point Kronrod panel; returns (integral, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration of `f` over `[a, b]` (bisect the worst panel).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate_with_error(&f, a, b, tol).map(|(v, _)| v)
}

pub fn integrate_with_error<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    if b < a {
        return integrate_with_error(f, b, a, tol).map(|(v, e)| (-v, e));
    }
    let (value, err) = gk21(f, a, b);
    if !value.is_finite() {
        return Err(LevyError::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut count = 1;
    while total_err > tol.target(total) {
        if count >= tol.max_subdivisions {
            // Accept if round-off dominates; otherwise report.
            if total_err <= 1e3 * tol.target(total) {
                break;
            }
            return Err(LevyError::Quadrature(format!(
                "no convergence on [{a}, {b}]: estimate {total:e} +/- {total_err:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            heap.push(Panel { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(LevyError::Quadrature(format!(
                "non-finite integrand near [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        count += 1;
    }
    // re-sum to shed accumulated cancellation from the running updates
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.err).sum();
    Ok((value, err))
}

/// Integrate over consecutive break points, e.g. kinks of a piecewise integrand.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += integrate_with_error(f, w[0], w[1], tol)?.0;
        }
    }
    Ok(total)
}

/// Integrate over `[a, b]` where `f` may carry an integrable power singularity at `a`.
///
/// Panels shrink geometrically toward `a`; once the panel sums settle into a
/// geometric progression the remainder is added in closed form.
pub fn integrate_singular_at_left<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let width = b - a;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut hi = width;
    let panel_tol = Tolerance {
        abs: tol.abs * 1e-3,
        ..tol
    };
    for _ in 0..1500 {
        let lo = 0.5 * hi;
        let part = integrate_with_error(f, a + lo, a + hi, panel_tol)?.0;
        total += part;
        if let Some(p) = prev {
            if p != 0.0 {
                let ratio = part / p;
                if ratio.abs() < 0.999 && ratio >= 0.0 {
                    let tail = part * ratio / (1.0 - ratio);
                    if tail.abs() <= tol.target(total) {
                        return Ok(total + tail);
                    }
                }
            } else if part == 0.0 {
                return Ok(total);
            }
        }
        if lo < f64::MIN_POSITIVE * 1e4 || a + lo == a {
            return Ok(total);
        }
        prev = Some(part);
        hi = lo;
    }
    Err(LevyError::Quadrature(format!(
        "endpoint singularity at {a} does not settle"
    )))
}

/// Integrate over `[a, +inf)` with doubling panels; `scale` sets the first panel width.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = scale.max(1e-12);
    let mut prev: Option<f64> = None;
    let panel_tol = Tolerance {
        abs: tol.abs * 1e-3,
        ..tol
    };
    for _ in 0..2000 {
        let hi = lo + width;
        let part = integrate_with_error(f, lo, hi, panel_tol)?.0;
        total += part;
        if let Some(p) = prev {
            if part == 0.0 && p == 0.0 {
                return Ok(total);
            }
            if p != 0.0 {
                let ratio = part / p;
                if (0.0..0.999).contains(&ratio) {
                    let tail = part * ratio / (1.0 - ratio);
                    if tail.abs() <= tol.target(total) {
                        return Ok(total + tail);
                    }
                }
            }
        }
        if !hi.is_finite() || hi > 1e300 {
            break;
        }
        prev = Some(part);
        lo = hi;
        width *= 2.0;
    }
    Err(LevyError::Quadrature(format!(
        "tail integral from {a} does not settle"
    )))
}

/// `∫_a^∞ g(x) e^{ixz} dx` for a smooth, monotonically decaying `g`.
///
/// Whole periods are integrated out to a cut point, and the remainder uses the
/// three-term integration-by-parts expansion with finite-difference derivatives.
pub fn fourier_tail<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    z: f64,
    periods: usize,
    tol: Tolerance,
) -> Result<(f64, f64)> {
    if z == 0.0 {
        let v = integrate_to_infinity(g, a, 1.0, tol)?;
        return Ok((v, 0.0));
    }
    let period = 2.0 * std::f64::consts::PI / z.abs();
    let mut re = 0.0;
    let mut im = 0.0;
    let mut lo = a;
    for _ in 0..periods {
        let hi = lo + period;
        re += integrate_with_error(&|x: f64| g(x) * (z * x).cos(), lo, hi, tol)?.0;
        im += integrate_with_error(&|x: f64| g(x) * (z * x).sin(), lo, hi, tol)?.0;
        lo = hi;
    }
    let x = lo;
    let step = 1e-3 * x.abs().max(1.0);
    let g0 = g(x);
    let g1 = (g(x + step) - g(x - step)) / (2.0 * step);
    let g2 = (g(x + step) - 2.0 * g0 + g(x - step)) / (step * step);
    // e^{ixz} [ i g/z - g'/z^2 - i g''/z^3 ]
    let (s, c) = (z * x).sin_cos();
    let a_re = -g1 / (z * z);
    let a_im = g0 / z - g2 / (z * z * z);
    re += c * a_re - s * a_im;
    im += s * a_re + c * a_im;
    Ok((re, im))
}
