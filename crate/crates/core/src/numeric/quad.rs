//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10 }
    }
}

/// Integrates `f` over `[a, b]` with adaptive Simpson refinement.
///
/// The acceptance test on each panel is the classical `|S₂ − S₁| ≤ 15ε`
/// with Richardson correction; `ε` is split in half at every bisection.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = tol.abs.max(tol.rel * whole.abs());
    let v = panel(f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureFailure { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn panel<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || m <= a || m >= b {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(panel(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?
        + panel(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?)
}
