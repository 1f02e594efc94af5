//! Inversion of strictly increasing functions by bracketing and bisection.

use crate::error::{Error, Result};

pub const MAX_EXPANSIONS: usize = 1000;
const EXPANSION_FACTOR: f64 = 4.0;

/// Solves `f(x) = target` for `x > 0`, where `f` is strictly increasing on
/// `(0, ∞)`.
///
/// The bracket starts at `[target, target]` and is widened geometrically
/// (factor 4) until it straddles the target, then bisected until the width
/// is at most `rel_tol · hi`.
pub fn invert_increasing<F>(mut f: F, target: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidInput(format!("inversion target must be positive and finite, got {target}")));
    }
    let bracket_err = || Error::BracketFailure { target, expansions: MAX_EXPANSIONS };

    let x0 = target;
    let f0 = f(x0)?;
    if f0.is_nan() {
        return Err(bracket_err());
    }
    if f0 == target {
        return Ok(x0);
    }
    let (mut lo, mut hi);
    if f0 < target {
        lo = x0;
        hi = x0;
        let mut n = 0;
        loop {
            hi *= EXPANSION_FACTOR;
            n += 1;
            let v = f(hi)?;
            if v >= target {
                break;
            }
            if v.is_nan() || n >= MAX_EXPANSIONS || !hi.is_finite() {
                return Err(bracket_err());
            }
            lo = hi;
        }
    } else {
        lo = x0;
        hi = x0;
        let mut n = 0;
        loop {
            lo /= EXPANSION_FACTOR;
            n += 1;
            if lo == 0.0 {
                return Err(bracket_err());
            }
            let v = f(lo)?;
            if v < target {
                break;
            }
            if v.is_nan() || n >= MAX_EXPANSIONS {
                return Err(bracket_err());
            }
            hi = lo;
        }
    }

    for _ in 0..200 {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
