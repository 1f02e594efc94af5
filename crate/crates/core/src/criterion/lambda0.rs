//! The constant λ₀ = sup_s |sφ'(s)| / (2 √(φ(s) (sφ(s))')).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numeric::golden::golden_max;
use crate::numeric::log_space;
use crate::orlicz::PhiSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lambda0Config {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
    /// Values of g above this are treated as divergence.
    pub cap: f64,
    /// Outward log-log slope of g over the end decades that signals growth.
    pub slope_limit: f64,
    pub tail_decades: f64,
}

impl Default for Lambda0Config {
    fn default() -> Self {
        Lambda0Config { s_min: 1e-8, s_max: 1e8, points: 10_000, cap: 1e6, slope_limit: 0.01, tail_decades: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Divergence {
    /// g exceeded the cap at `s`.
    Cap { s: f64 },
    /// g grows towards s → 0.
    LowerTail { slope: f64 },
    /// g grows towards s → ∞.
    UpperTail { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lambda0 {
    /// `+∞` when divergent.
    #[serde(serialize_with = "crate::criterion::serialize_extended")]
    pub value: f64,
    /// Where the supremum is attained (or approached) on the search window.
    pub argmax: Option<f64>,
    pub divergence: Option<Divergence>,
}

impl Lambda0 {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Scans g on a log grid, refines the interior maximum by golden-section
/// search in `log s`, and applies the divergence policy.
pub fn lambda0(phi: &PhiSpec, cfg: &Lambda0Config) -> Result<Lambda0> {
    let grid = log_space(cfg.s_min, cfg.s_max, cfg.points.max(3));
    let mut g = Vec::with_capacity(grid.len());
    for &s in &grid {
        let v = phi.lambda0_integrand(s)?;
        if !(v <= cfg.cap) {
            return Ok(Lambda0 { value: f64::INFINITY, argmax: Some(s), divergence: Some(Divergence::Cap { s }) });
        }
        g.push(v);
    }

    let decade_span = cfg.tail_decades * std::f64::consts::LN_10;
    let outward = |i_end: usize, i_in: usize| -> f64 {
        let (a, b) = (g[i_end], g[i_in]);
        if a == 0.0 && b == 0.0 {
            return 0.0;
        }
        let dl = (grid[i_end] / grid[i_in]).ln().abs();
        (a.ln() - b.ln()) / dl
    };
    let n = grid.len();
    let step = (grid[1] / grid[0]).ln();
    let k = ((decade_span / step).round() as usize).clamp(1, n - 1);
    let low = outward(0, k);
    if low >= cfg.slope_limit {
        return Ok(Lambda0 {
            value: f64::INFINITY,
            argmax: Some(grid[0]),
            divergence: Some(Divergence::LowerTail { slope: low }),
        });
    }
    let high = outward(n - 1, n - 1 - k);
    if high >= cfg.slope_limit {
        return Ok(Lambda0 {
            value: f64::INFINITY,
            argmax: Some(grid[n - 1]),
            divergence: Some(Divergence::UpperTail { slope: high }),
        });
    }

    let mut best = 0;
    for i in 1..n {
        if g[i] > g[best] {
            best = i;
        }
    }
    let (mut s_star, mut value) = (grid[best], g[best]);
    if best > 0 && best < n - 1 {
        let f = |y: f64| phi.lambda0_integrand(y.exp()).unwrap_or(f64::NEG_INFINITY);
        let (y, v) = golden_max(f, grid[best - 1].ln(), grid[best + 1].ln(), 1e-12);
        if v > value {
            s_star = y.exp();
            value = v;
        }
    }
    Ok(Lambda0 { value, argmax: Some(s_star), divergence: None })
}
