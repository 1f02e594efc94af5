//! Sampled admissibility checks for a weight φ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::log_space;

use super::phi::{PhiKind, PhiSpec, TailSign};

/// Log-spaced sample grid for validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { lo: 1e-8, hi: 1e8, n: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    pub detail: String,
}

impl ConditionCheck {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        ConditionCheck { passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub phi: String,
    pub valid: bool,
    /// φ is C¹ on (0, ∞): finite values, derivative consistent with φ.
    pub smooth: ConditionCheck,
    /// φ > 0 and (sφ)' > 0.
    pub monotone: ConditionCheck,
    /// s φ(s) runs from 0 to ∞.
    pub onto: ConditionCheck,
    /// C₁ s^r ≤ (sφ)' ≤ C₂ s^r on (0, s0).
    pub origin_growth: ConditionCheck,
    /// φ' keeps the declared sign on (s1, ∞).
    pub tail: ConditionCheck,
    pub c1: f64,
    pub c2: f64,
    /// Smallest and largest sampled values of s φ(s).
    pub sampled_range: [f64; 2],
    /// Largest sample where φ was finite.
    pub finite_up_to: f64,
}

const FD_REL_TOL: f64 = 1e-4;
const SPREAD_LIMIT: f64 = 10.0;
const ONTO_LOW: f64 = 1e-6;
const ONTO_HIGH: f64 = 1e6;
const ONTO_SLOPE: f64 = 1e-3;

/// Checks the five admissibility conditions on `grid`.
///
/// Positivity, monotonicity and the origin growth bound are fatal and come
/// back as errors; the remaining conditions are recorded in the report.
pub fn validate_phi(phi: &PhiSpec, grid: SampleGrid) -> Result<ValidationReport> {
    if !(grid.lo > 0.0 && grid.lo <= 1e-8 && grid.hi >= 1e8 && grid.n >= 1000) {
        return Err(Error::InvalidInput(format!(
            "validation grid must cover [1e-8, 1e8] with at least 1000 points, got [{}, {}] x {}",
            grid.lo, grid.hi, grid.n
        )));
    }
    let samples = log_space(grid.lo, grid.hi, grid.n);

    let mut s_vals = Vec::with_capacity(samples.len());
    let mut sphi = Vec::with_capacity(samples.len());
    let mut smooth_fail: Option<String> = None;
    for &s in &samples {
        let v = phi.phi(s)?;
        let d = phi.dphi(s)?;
        if !v.is_finite() || !d.is_finite() {
            break;
        }
        if v <= 0.0 {
            return Err(Error::NonPositivePhi { s, value: v });
        }
        let slope = v + s * d;
        if !(slope > 0.0) {
            return Err(Error::NonMonotone { s, slope });
        }
        if smooth_fail.is_none() && matches!(phi.kind, PhiKind::Custom(_)) {
            let h = 1e-5 * s;
            let (a, b) = (phi.phi(s - h)?, phi.phi(s + h)?);
            if a.is_finite() && b.is_finite() {
                let fd = (b - a) / (2.0 * h);
                if (fd - d).abs() > FD_REL_TOL * (d.abs() + v / s) {
                    smooth_fail = Some(format!(
                        "dphi_expr disagrees with the derivative of phi_expr at s = {s:e} ({d:e} vs {fd:e})"
                    ));
                }
            }
        }
        s_vals.push(s);
        sphi.push(s * v);
    }
    if s_vals.len() < 2 {
        return Err(Error::InvalidInput("φ is not finite on the sample grid".into()));
    }
    let finite_up_to = *s_vals.last().unwrap();
    let smooth = match smooth_fail {
        Some(msg) => ConditionCheck::new(false, msg),
        None => ConditionCheck::new(true, format!("φ and φ' finite on [{:e}, {:e}]", grid.lo, finite_up_to)),
    };
    let monotone = ConditionCheck::new(true, "φ > 0 and (sφ)' > 0 at every sample");

    let n = sphi.len();
    let (low, high) = (sphi[0], sphi[n - 1]);
    let slope_low = (sphi[1] / sphi[0]).ln() / (s_vals[1] / s_vals[0]).ln();
    let slope_high = (sphi[n - 1] / sphi[n - 2]).ln() / (s_vals[n - 1] / s_vals[n - 2]).ln();
    let low_ok = low <= ONTO_LOW || slope_low >= ONTO_SLOPE;
    let high_ok = high >= ONTO_HIGH || slope_high >= ONTO_SLOPE;
    let onto = ConditionCheck::new(
        low_ok && high_ok,
        format!("sφ sampled on [{low:e}, {high:e}], end log-log slopes {slope_low:.3e} and {slope_high:.3e}"),
    );

    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for &s in samples.iter().take_while(|&&s| s < phi.s0) {
        let q = phi.ds_phi(s)? / s.powf(phi.r);
        c1 = c1.min(q);
        c2 = c2.max(q);
    }
    if !(c1 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(Error::ExponentMismatch { r: phi.r, spread: f64::INFINITY });
    }
    let spread = c2 / c1;
    if spread > SPREAD_LIMIT {
        return Err(Error::ExponentMismatch { r: phi.r, spread });
    }
    let mut origin_growth =
        ConditionCheck::new(true, format!("(sφ)'/s^{} in [{c1:.4e}, {c2:.4e}] on (0, {})", phi.r, phi.s0));
    if phi.r == 0.0 {
        let s = grid.lo;
        let v = phi.phi(s)?;
        let l = phi.elasticity(s)?;
        if !(v.is_finite() && v > 0.0 && l.abs() <= 1e-2) {
            origin_growth = ConditionCheck::new(
                false,
                format!("r = 0 needs φ(0+) finite and sφ'(s) → 0; at s = {s:e}: φ = {v:e}, sφ'/φ = {l:e}"),
            );
        }
    }

    let mut tail_fail = None;
    for &s in s_vals.iter().filter(|&&s| s >= phi.s1) {
        let l = phi.elasticity(s)?;
        let bad = match phi.tail_sign {
            TailSign::Nonneg => l < -1e-12,
            TailSign::Nonpos => l > 1e-12,
        };
        if bad {
            tail_fail = Some(s);
            break;
        }
    }
    let tail = match tail_fail {
        Some(s) => ConditionCheck::new(false, format!("φ' has the wrong sign at s = {s:e}")),
        None => ConditionCheck::new(true, format!("φ' is {:?} on [{}, {:e}]", phi.tail_sign, phi.s1, finite_up_to)),
    };

    let valid = smooth.passed && onto.passed && origin_growth.passed && tail.passed;
    Ok(ValidationReport {
        phi: phi.label(),
        valid,
        smooth,
        monotone,
        onto,
        origin_growth,
        tail,
        c1,
        c2,
        sampled_range: [low, high],
        finite_up_to,
    })
}
