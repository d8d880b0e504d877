//! Matrix exponential by scaling and squaring with a diagonal [8/8] Padé approximant.

use nalgebra::DMatrix;

use crate::error::{LevyError, Result};

/// Diagonal Padé coefficients `c_k = c_{k-1} (m - k + 1) / (k (2m - k + 1))`, `m = 8`.
fn pade_coefficients() -> [f64; 9] {
    let mut c = [1.0; 9];
    for k in 1..9 {
        c[k] = c[k - 1] * (9 - k) as f64 / (k * (17 - k)) as f64;
    }
    c
}

/// Agreement required between two successive scalings.
pub const EXPM_TOLERANCE: f64 = 1e-9;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

fn pade(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let x2 = x * x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let x8 = &x4 * &x4;
    let c = pade_coefficients();
    let odd = x * (&id * c[1] + &x2 * c[3] + &x4 * c[5] + &x6 * c[7]);
    let even = &id * c[0] + &x2 * c[2] + &x4 * c[4] + &x6 * c[6] + &x8 * c[8];
    let num = &even + &odd;
    let den = even - odd;
    den.lu()
        .solve(&num)
        .ok_or_else(|| LevyError::Solver("singular Padé denominator".into()))
}

fn scaled(x: &DMatrix<f64>, squarings: u32) -> Result<DMatrix<f64>> {
    let mut r = pade(&(x / 2f64.powi(squarings as i32)))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// `exp(X)`. The scaling is increased until two successive levels agree to
/// [`EXPM_TOLERANCE`] in max norm.
pub fn expm(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let norm = norm1(x);
    if !norm.is_finite() {
        return Err(LevyError::ExponentialOverflow("non-finite generator".into()));
    }
    let mut s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let mut current = scaled(x, s)?;
    for _ in 0..8 {
        let finer = scaled(x, s + 1)?;
        let diff = (&finer - &current).amax();
        if !finer.iter().all(|v| v.is_finite()) {
            return Err(LevyError::ExponentialOverflow("non-finite exponential".into()));
        }
        if diff <= EXPM_TOLERANCE * finer.amax().max(1.0) {
            return Ok(finer);
        }
        current = finer;
        s += 1;
    }
    Err(LevyError::ExponentialOverflow("scaling did not settle".into()))
}
