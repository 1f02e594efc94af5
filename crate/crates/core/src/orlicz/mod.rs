//! Weight functions φ, the Orlicz quantities built from them, and
//! admissibility validation.

pub mod aux;
pub mod norms;
pub mod phi;
pub mod validate;

pub use aux::AuxBundle;
pub use norms::{luxemburg_norm, orlicz_integral};
pub use phi::{parse_phi_shorthand, Builtin, PhiConfig, PhiKind, PhiSpec, TailSign};
pub use validate::{validate_phi, ConditionCheck, SampleGrid, ValidationReport};
