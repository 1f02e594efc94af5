//! TOML run configuration shared by the command-line front end.
//!
//! ```toml
//! [phi]
//! kind = "ratio4"
//!
//! [matrix]
//! entries = [[{ re = 1 }, { im = "9*x1" }],
//!            [{ im = "-9*x1" }, { re = 1 }]]
//!
//! [domain]
//! lengths = [1.0, 1.0]
//! nodes = [64, 64]
//!
//! [initial]
//! re = "sin(pi*x1)*sin(pi*x2)"
//!
//! [time]
//! dt = 1e-3
//! steps = 200
//! ```

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criterion::{EntryConfig, ExprSource, MatrixField, SamplingConfig};
use crate::dsl::Bindings;
use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridField};
use crate::orlicz::{PhiConfig, PhiSpec};
use crate::pde::ProbeFamily;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixConfig>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

/// Either explicit `entries` or a named `builtin` with one parameter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<EntryConfig>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lengths: Vec<f64>,
    pub nodes: Vec<usize>,
}

/// `u₀ = re + i·im`, plus optional uniform noise in `[−1, 1]²` drawn from
/// `noise_seed` and scaled by `noise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "zero")]
    pub re: ExprSource,
    #[serde(default = "zero")]
    pub im: ExprSource,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

fn zero() -> ExprSource {
    ExprSource::Number(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// `combined`, `plane_phase`, `log_phase` or `random_bumps`.
    pub family: String,
    pub budget: usize,
    pub seed: u64,
    /// Random bumps drawn when the family includes them.
    pub count: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { family: "combined".into(), budget: 2000, seed: 0, count: 64 }
    }
}

impl ProbeConfig {
    pub fn to_family(&self) -> Result<ProbeFamily> {
        Ok(match self.family.as_str() {
            "combined" => ProbeFamily::Combined {
                families: vec![
                    ProbeFamily::log_phase(),
                    ProbeFamily::plane_phase(),
                    ProbeFamily::random_bumps(self.seed, self.count),
                ],
            },
            "plane_phase" => ProbeFamily::plane_phase(),
            "log_phase" => ProbeFamily::log_phase(),
            "random_bumps" => ProbeFamily::random_bumps(self.seed, self.count),
            other => return Err(Error::Config(format!("unknown probe family `{other}`"))),
        })
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn phi_spec(&self) -> Result<PhiSpec> {
        let cfg = self.phi.as_ref().ok_or_else(|| Error::Config("missing [phi] table".into()))?;
        PhiSpec::try_from(cfg)
    }

    pub fn matrix_field(&self) -> Result<MatrixField> {
        let m = self.matrix.as_ref().ok_or_else(|| Error::Config("missing [matrix] table".into()))?;
        let field = match (&m.entries, &m.builtin) {
            (Some(rows), None) => MatrixField::from_config(rows)?,
            (None, Some(name)) => MatrixField::builtin(name, m.dimension.unwrap_or(2), m.param)?,
            _ => return Err(Error::Config("[matrix] needs exactly one of `entries` or `builtin`".into())),
        };
        if let Some(n) = m.dimension {
            if n != field.dim() {
                return Err(Error::Config(format!("[matrix] dimension {n} but entries are {0}×{0}", field.dim())));
            }
        }
        Ok(field)
    }

    pub fn grid_domain(&self) -> Result<GridDomain> {
        let d = self.domain.as_ref().ok_or_else(|| Error::Config("missing [domain] table".into()))?;
        GridDomain::new(d.lengths.clone(), d.nodes.clone())
    }

    pub fn time(&self) -> Result<TimeConfig> {
        self.time.ok_or_else(|| Error::Config("missing [time] table".into()))
    }

    pub fn probe(&self) -> ProbeConfig {
        self.probe.clone().unwrap_or_default()
    }

    pub fn initial_field(&self, domain: &GridDomain) -> Result<GridField> {
        let init = self.initial.as_ref().ok_or_else(|| Error::Config("missing [initial] table".into()))?;
        let (re, im) = (init.re.to_expr()?, init.im.to_expr()?);
        let mut rng = ChaCha8Rng::seed_from_u64(init.noise_seed);
        GridField::try_from_fn(domain.clone(), |x| {
            let b = Bindings::at_point(x);
            let mut z = Complex64::new(re.eval(&b)?, im.eval(&b)?);
            if init.noise != 0.0 {
                z += init.noise * Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            }
            Ok(z)
        })
    }
}
