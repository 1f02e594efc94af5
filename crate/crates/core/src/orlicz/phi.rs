//! Admissible weight functions φ and their catalog.
//!
//! Every quantity the criteria need can be written in terms of φ and the
//! elasticity `ℓ(s) = s φ'(s) / φ(s)`. Builtins supply `ℓ` in closed form so
//! that it stays finite where φ itself overflows (e.g. `exp(s^p)` at large s).

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{self, Bindings, Expr};
use crate::error::{Error, Result};
use crate::numeric::root::invert_increasing;

/// Relative tolerance used for every monotone inversion.
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSign {
    Nonneg,
    Nonpos,
}

impl TailSign {
    fn flipped(self) -> Self {
        match self {
            TailSign::Nonneg => TailSign::Nonpos,
            TailSign::Nonpos => TailSign::Nonneg,
        }
    }
}

/// The builtin catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// φ(s) = s^{p−2}, Φ(s) = s^p / p.
    Power { p: f64 },
    /// Φ(s) = s^p log(s + e): the `L^p log L` Young function.
    Zygmund { p: f64 },
    /// Φ(s) = exp(s^p) − 1.
    ExpPower { p: f64 },
    /// Φ(s) = s − arctan s.
    ArctanDef,
    /// Φ(s) = s⁴ / (s² + 1).
    Ratio4,
    /// Φ(s) = s²(s² + 2)/(s² + 1) − 2 log(s² + 1).
    RatioLog,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Power { .. } => "power",
            Builtin::Zygmund { .. } => "zygmund",
            Builtin::ExpPower { .. } => "exp_power",
            Builtin::ArctanDef => "arctan_def",
            Builtin::Ratio4 => "ratio4",
            Builtin::RatioLog => "ratio_log",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        match self {
            Builtin::Power { p } | Builtin::Zygmund { p } | Builtin::ExpPower { p } => {
                BTreeMap::from([("p".to_string(), *p)])
            }
            _ => BTreeMap::new(),
        }
    }

    fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let p = || params.get("p").copied().ok_or_else(|| Error::Config(format!("builtin `{name}` needs parameter p")));
        let b = match name {
            "power" => Builtin::Power { p: p()? },
            "zygmund" => Builtin::Zygmund { p: p()? },
            "exp_power" => Builtin::ExpPower { p: p()? },
            "arctan_def" => Builtin::ArctanDef,
            "ratio4" => Builtin::Ratio4,
            "ratio_log" => Builtin::RatioLog,
            other => return Err(Error::Config(format!("unknown builtin φ `{other}`"))),
        };
        if let Builtin::Power { p } | Builtin::Zygmund { p } | Builtin::ExpPower { p } = b {
            let min = if matches!(b, Builtin::ExpPower { .. }) { 1.0 } else { 1.0 + f64::EPSILON };
            if !(p.is_finite() && p >= min) {
                return Err(Error::Config(format!("`{name}` requires p > 1, got {p}")));
            }
        }
        Ok(b)
    }

    /// Growth exponent r of (sφ)' at the origin.
    fn default_r(&self) -> f64 {
        match *self {
            Builtin::Power { p } | Builtin::Zygmund { p } => p - 2.0,
            Builtin::ExpPower { p } => {
                if p > 1.0 {
                    p - 2.0
                } else {
                    0.0
                }
            }
            Builtin::ArctanDef => 1.0,
            Builtin::Ratio4 => 2.0,
            Builtin::RatioLog => 4.0,
        }
    }

    fn default_tail(&self) -> TailSign {
        match *self {
            Builtin::Power { p } | Builtin::Zygmund { p } => {
                if p >= 2.0 {
                    TailSign::Nonneg
                } else {
                    TailSign::Nonpos
                }
            }
            Builtin::ArctanDef => TailSign::Nonpos,
            _ => TailSign::Nonneg,
        }
    }

    fn phi(&self, s: f64) -> f64 {
        match *self {
            Builtin::Power { p } => s.powf(p - 2.0),
            Builtin::Zygmund { p } => {
                let l = (s + E).ln();
                let q = s / (s + E);
                s.powf(p - 2.0) * (p * l + q)
            }
            Builtin::ExpPower { p } => p * s.powf(p - 2.0) * s.powf(p).exp(),
            Builtin::ArctanDef => 1.0 / (s + 1.0 / s),
            Builtin::Ratio4 => {
                let w = ratio(s, 1.0);
                2.0 * w * (2.0 - w)
            }
            Builtin::RatioLog => {
                let w = ratio(s, 1.0);
                2.0 * w * w
            }
        }
    }

    fn elasticity(&self, s: f64) -> f64 {
        match *self {
            Builtin::Power { p } => p - 2.0,
            Builtin::Zygmund { p } => {
                let l = (s + E).ln();
                let q = s / (s + E);
                (p - 2.0) + (p * q + q * (1.0 - q)) / (p * l + q)
            }
            Builtin::ExpPower { p } => p - 2.0 + p * s.powf(p),
            Builtin::ArctanDef => 2.0 / (1.0 + s * s) - 1.0,
            Builtin::Ratio4 => 2.0 + 2.0 * ratio(s, 2.0) - 4.0 * ratio(s, 1.0),
            Builtin::RatioLog => 4.0 / (1.0 + s * s),
        }
    }
}

/// `s² / (s² + c)` without overflow at either end.
fn ratio(s: f64, c: f64) -> f64 {
    if s < 1.0 {
        let s2 = s * s;
        s2 / (s2 + c)
    } else {
        1.0 / (1.0 + c / (s * s))
    }
}

/// A user-supplied φ with its derivative, both in the variable `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomPhi {
    pub phi_src: String,
    pub dphi_src: String,
    phi: Expr,
    dphi: Expr,
}

impl CustomPhi {
    pub fn new(phi_src: &str, dphi_src: &str) -> Result<Self> {
        Ok(CustomPhi {
            phi_src: phi_src.to_string(),
            dphi_src: dphi_src.to_string(),
            phi: dsl::parse(phi_src)?,
            dphi: dsl::parse(dphi_src)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiKind {
    Builtin(Builtin),
    Custom(CustomPhi),
    /// ψ, where t ψ(t) is the inverse of s φ(s) for the wrapped φ.
    Conjugate(Box<PhiSpec>),
}

/// A weight function φ together with the metadata its admissibility
/// conditions refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSpec {
    pub kind: PhiKind,
    /// Growth exponent of (sφ(s))' near the origin; must exceed −1.
    pub r: f64,
    /// Upper end of the neighbourhood of 0 where the growth bound is checked.
    pub s0: f64,
    /// Start of the tail where φ' keeps a constant sign.
    pub s1: f64,
    pub tail_sign: TailSign,
}

const DEFAULT_S0: f64 = 0.5;
const DEFAULT_S1: f64 = 2.0;

impl PhiSpec {
    pub fn builtin(b: Builtin) -> Self {
        PhiSpec {
            r: b.default_r(),
            s0: DEFAULT_S0,
            s1: DEFAULT_S1,
            tail_sign: b.default_tail(),
            kind: PhiKind::Builtin(b),
        }
    }

    pub fn power(p: f64) -> Self {
        Self::builtin(Builtin::Power { p })
    }

    pub fn zygmund(p: f64) -> Self {
        Self::builtin(Builtin::Zygmund { p })
    }

    pub fn exp_power(p: f64) -> Self {
        Self::builtin(Builtin::ExpPower { p })
    }

    pub fn arctan_def() -> Self {
        Self::builtin(Builtin::ArctanDef)
    }

    pub fn ratio4() -> Self {
        Self::builtin(Builtin::Ratio4)
    }

    pub fn ratio_log() -> Self {
        Self::builtin(Builtin::RatioLog)
    }

    /// Looks a builtin up by catalog name.
    pub fn named(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        Ok(Self::builtin(Builtin::from_name(name, params)?))
    }

    pub fn custom(phi_expr: &str, dphi_expr: &str, r: f64, s0: f64, s1: f64, tail_sign: TailSign) -> Result<Self> {
        let spec = PhiSpec { kind: PhiKind::Custom(CustomPhi::new(phi_expr, dphi_expr)?), r, s0, s1, tail_sign };
        spec.check_metadata()?;
        Ok(spec)
    }

    fn check_metadata(&self) -> Result<()> {
        if !(self.r > -1.0) {
            return Err(Error::Config(format!("r must exceed -1, got {}", self.r)));
        }
        if !(self.s0 > 0.0 && self.s1 >= self.s0) {
            return Err(Error::Config(format!("need 0 < s0 <= s1, got s0 = {}, s1 = {}", self.s0, self.s1)));
        }
        Ok(())
    }

    /// The companion weight ψ (conjugate Young function), with exponent
    /// −r/(r+1) and the tail sign reversed.
    pub fn conjugate(&self) -> Result<PhiSpec> {
        let t0 = self.s_phi(self.s0)?;
        let t1 = self.s_phi(self.s1)?;
        Ok(PhiSpec {
            kind: PhiKind::Conjugate(Box::new(self.clone())),
            r: -self.r / (self.r + 1.0),
            s0: t0,
            s1: t1.max(t0),
            tail_sign: self.tail_sign.flipped(),
        })
    }

    /// Catalog name; `custom` and `conjugate(..)` otherwise.
    pub fn label(&self) -> String {
        match &self.kind {
            PhiKind::Builtin(b) => match b.params().get("p") {
                Some(p) => format!("{}(p={p})", b.name()),
                None => b.name().to_string(),
            },
            PhiKind::Custom(c) => format!("custom({})", c.phi_src),
            PhiKind::Conjugate(base) => format!("conjugate({})", base.label()),
        }
    }

    pub fn phi(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PhiKind::Builtin(b) => Ok(b.phi(s)),
            PhiKind::Custom(c) => Ok(c.phi.eval(&Bindings::default().with_s(s))?),
            PhiKind::Conjugate(base) => {
                let sigma = base.invert_s_phi(s)?;
                Ok(1.0 / base.phi(sigma)?)
            }
        }
    }

    pub fn dphi(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PhiKind::Custom(c) => Ok(c.dphi.eval(&Bindings::default().with_s(s))?),
            _ => Ok(self.phi(s)? * self.elasticity(s)? / s),
        }
    }

    /// `ℓ(s) = s φ'(s) / φ(s)`.
    pub fn elasticity(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PhiKind::Builtin(b) => Ok(b.elasticity(s)),
            PhiKind::Custom(c) => {
                let b = Bindings::default().with_s(s);
                Ok(s * c.dphi.eval(&b)? / c.phi.eval(&b)?)
            }
            PhiKind::Conjugate(base) => {
                let sigma = base.invert_s_phi(s)?;
                let l = base.elasticity(sigma)?;
                Ok(-l / (l + 1.0))
            }
        }
    }

    /// `s φ(s)`.
    pub fn s_phi(&self, s: f64) -> Result<f64> {
        Ok(s * self.phi(s)?)
    }

    /// `(s φ(s))' = φ(s) (1 + ℓ(s))`.
    pub fn ds_phi(&self, s: f64) -> Result<f64> {
        Ok(self.phi(s)? * (1.0 + self.elasticity(s)?))
    }

    /// `s √φ(s)`.
    pub fn s_sqrt_phi(&self, s: f64) -> Result<f64> {
        Ok(s * self.phi(s)?.sqrt())
    }

    /// Solves `s φ(s) = t`.
    pub fn invert_s_phi(&self, t: f64) -> Result<f64> {
        invert_increasing(|s| self.s_phi(s), t, INVERSION_TOL)
    }

    /// Solves `s √φ(s) = t`, i.e. evaluates ζ(t).
    pub fn invert_s_sqrt_phi(&self, t: f64) -> Result<f64> {
        invert_increasing(|s| self.s_sqrt_phi(s), t, INVERSION_TOL)
    }

    /// `Λ` expressed through the elasticity at `s`:
    /// `Λ(s √φ(s)) = −ℓ(s) / (ℓ(s) + 2)`.
    pub fn lambda_at_s(&self, s: f64) -> Result<f64> {
        let l = self.elasticity(s)?;
        Ok(lambda_from_elasticity(l))
    }

    /// The function whose supremum is λ₀:
    /// `|s φ'(s)| / (2 √(φ(s) (sφ(s))'))`, written as `|ℓ| / (2 √(1 + ℓ))`.
    pub fn lambda0_integrand(&self, s: f64) -> Result<f64> {
        let l = self.elasticity(s)?;
        Ok(if 1.0 + l > 0.0 { l.abs() / (2.0 * (1.0 + l).sqrt()) } else { f64::INFINITY })
    }

    pub fn to_config(&self) -> PhiConfig {
        let mut cfg = PhiConfig {
            kind: String::new(),
            params: BTreeMap::new(),
            r: Some(self.r),
            s0: Some(self.s0),
            s1: Some(self.s1),
            tail_sign: Some(self.tail_sign),
            phi_expr: None,
            dphi_expr: None,
            base: None,
        };
        match &self.kind {
            PhiKind::Builtin(b) => {
                cfg.kind = b.name().to_string();
                cfg.params = b.params();
            }
            PhiKind::Custom(c) => {
                cfg.kind = "custom".to_string();
                cfg.phi_expr = Some(c.phi_src.clone());
                cfg.dphi_expr = Some(c.dphi_src.clone());
            }
            PhiKind::Conjugate(base) => {
                cfg.kind = "conjugate".to_string();
                cfg.base = Some(Box::new(base.to_config()));
            }
        }
        cfg
    }
}

pub(crate) fn lambda_from_elasticity(l: f64) -> f64 {
    if l.is_infinite() {
        return -l.signum();
    }
    -l / (l + 2.0)
}

impl fmt::Display for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// TOML/JSON representation of a [`PhiSpec`].
///
/// ```toml
/// [phi]
/// kind = "power"
/// params = { p = 3.0 }
///
/// # or
/// [phi]
/// kind = "custom"
/// phi_expr = "s^2"
/// dphi_expr = "2*s"
/// r = 2.0
/// tail_sign = "nonneg"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_sign: Option<TailSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dphi_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<PhiConfig>>,
}

impl TryFrom<&PhiConfig> for PhiSpec {
    type Error = Error;

    fn try_from(cfg: &PhiConfig) -> Result<Self> {
        let mut spec = match cfg.kind.as_str() {
            "custom" => {
                let phi = cfg.phi_expr.as_deref().ok_or_else(|| Error::Config("custom φ needs phi_expr".into()))?;
                let dphi = cfg.dphi_expr.as_deref().ok_or_else(|| Error::Config("custom φ needs dphi_expr".into()))?;
                let r = cfg.r.ok_or_else(|| Error::Config("custom φ needs r".into()))?;
                let tail = cfg.tail_sign.ok_or_else(|| Error::Config("custom φ needs tail_sign".into()))?;
                PhiSpec::custom(phi, dphi, r, cfg.s0.unwrap_or(DEFAULT_S0), cfg.s1.unwrap_or(DEFAULT_S1), tail)?
            }
            "conjugate" => {
                let base = cfg.base.as_deref().ok_or_else(|| Error::Config("conjugate φ needs a base table".into()))?;
                PhiSpec::try_from(base)?.conjugate()?
            }
            name => PhiSpec::named(name, &cfg.params)?,
        };
        if cfg.kind != "custom" {
            if let Some(r) = cfg.r {
                spec.r = r;
            }
            if let Some(s0) = cfg.s0 {
                spec.s0 = s0;
            }
            if let Some(s1) = cfg.s1 {
                spec.s1 = s1;
            }
            if let Some(t) = cfg.tail_sign {
                spec.tail_sign = t;
            }
            spec.check_metadata()?;
        }
        Ok(spec)
    }
}

/// Parses the command-line shorthand `builtin:NAME[:key=value,...]`.
pub fn parse_phi_shorthand(text: &str) -> Result<PhiSpec> {
    let rest = text
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::Config(format!("expected `builtin:NAME[:p=VALUE]`, got `{text}`")))?;
    let (name, params_text) = match rest.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (rest, None),
    };
    let mut params = BTreeMap::new();
    if let Some(list) = params_text {
        for item in list.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Config(format!("bad parameter `{item}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("bad parameter value `{v}`")))?;
            params.insert(k.trim().to_string(), v);
        }
    }
    PhiSpec::named(name, &params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_elasticity(spec: &PhiSpec, s: f64) -> f64 {
        let h = 1e-6 * s;
        let d = (spec.phi(s + h).unwrap() - spec.phi(s - h).unwrap()) / (2.0 * h);
        s * d / spec.phi(s).unwrap()
    }

    #[test]
    fn closed_form_elasticity_matches_finite_differences() {
        let specs = [
            PhiSpec::power(3.0),
            PhiSpec::power(1.5),
            PhiSpec::zygmund(3.0),
            PhiSpec::zygmund(1.5),
            PhiSpec::exp_power(2.0),
            PhiSpec::exp_power(1.0),
            PhiSpec::arctan_def(),
            PhiSpec::ratio4(),
            PhiSpec::ratio_log(),
        ];
        for spec in &specs {
            for &s in &[0.05, 0.3, 1.0, 2.5, 7.0] {
                let exact = spec.elasticity(s).unwrap();
                let fd = fd_elasticity(spec, s);
                assert!((exact - fd).abs() < 1e-6 * (1.0 + exact.abs()), "{spec} s={s}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn builtin_weights_match_their_young_functions() {
        // φ(s) = Φ'(s)/s with Φ from the catalog, differentiated numerically.
        type Case = (PhiSpec, fn(f64) -> f64);
        let cases: [Case; 5] = [
            (PhiSpec::zygmund(3.0), |s| s.powi(3) * (s + E).ln()),
            (PhiSpec::exp_power(2.0), |s| (s * s).exp() - 1.0),
            (PhiSpec::arctan_def(), |s| s - s.atan()),
            (PhiSpec::ratio4(), |s| s.powi(4) / (s * s + 1.0)),
            (PhiSpec::ratio_log(), |s| s * s * (s * s + 2.0) / (s * s + 1.0) - 2.0 * (s * s + 1.0).ln()),
        ];
        for (spec, young) in cases {
            for &s in &[0.2, 1.0, 1.7] {
                let h = 1e-5;
                let d = (young(s + h) - young(s - h)) / (2.0 * h);
                let phi = spec.phi(s).unwrap();
                assert!((d / s - phi).abs() < 1e-7 * (1.0 + phi), "{spec} at {s}");
            }
        }
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        for spec in [PhiSpec::ratio4(), PhiSpec::ratio_log(), PhiSpec::arctan_def()] {
            for &s in &[1e-60, 1e-8, 1e8, 1e200] {
                let v = spec.phi(s).unwrap();
                assert!(v.is_finite() && v > 0.0, "{spec} at {s}: {v}");
                assert!(spec.elasticity(s).unwrap().is_finite());
            }
        }
        assert!(PhiSpec::exp_power(2.0).elasticity(1e8).unwrap().is_finite());
    }

    #[test]
    fn custom_weight_parses_and_evaluates() {
        let spec = PhiSpec::custom("s^2", "2*s", 2.0, 0.5, 2.0, TailSign::Nonneg).unwrap();
        assert_eq!(spec.phi(3.0).unwrap(), 9.0);
        assert!((spec.elasticity(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(PhiSpec::custom("s^", "1", 0.0, 0.5, 2.0, TailSign::Nonneg).is_err());
        assert!(PhiSpec::custom("1", "0", -1.0, 0.5, 2.0, TailSign::Nonneg).is_err());
    }

    #[test]
    fn shorthand_parsing() {
        assert_eq!(parse_phi_shorthand("builtin:ratio4").unwrap(), PhiSpec::ratio4());
        assert_eq!(parse_phi_shorthand("builtin:power:p=4").unwrap(), PhiSpec::power(4.0));
        assert!(parse_phi_shorthand("builtin:power").is_err());
        assert!(parse_phi_shorthand("ratio4").is_err());
        assert!(parse_phi_shorthand("builtin:nope").is_err());
        assert!(parse_phi_shorthand("builtin:power:p=0.5").is_err());
    }

    #[test]
    fn config_round_trip_through_toml() {
        for spec in [
            PhiSpec::zygmund(3.0),
            PhiSpec::ratio4(),
            PhiSpec::custom("2", "0", 0.0, 0.5, 2.0, TailSign::Nonneg).unwrap(),
            PhiSpec::power(3.0).conjugate().unwrap(),
        ] {
            let text = toml::to_string(&spec.to_config()).unwrap();
            let cfg: PhiConfig = toml::from_str(&text).unwrap();
            let back = PhiSpec::try_from(&cfg).unwrap();
            assert_eq!(back.label(), spec.label());
            assert_eq!(back.r, spec.r);
            assert_eq!(back.tail_sign, spec.tail_sign);
        }
    }

    #[test]
    fn conjugate_of_power_is_dual_power() {
        // ψ for φ = s (p = 3) is t^{-1/2}, the p' = 3/2 weight.
        let psi = PhiSpec::power(3.0).conjugate().unwrap();
        for &t in &[0.25, 1.0, 4.0, 9.0] {
            assert!((psi.phi(t).unwrap() - t.powf(-0.5)).abs() < 1e-10);
            assert!((psi.elasticity(t).unwrap() + 0.5).abs() < 1e-12);
        }
        assert!((psi.r + 0.5).abs() < 1e-15);
        assert_eq!(psi.tail_sign, TailSign::Nonpos);
    }
}
