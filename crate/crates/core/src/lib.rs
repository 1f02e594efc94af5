//! Numerical checks of `L^Φ`-dissipativity for `E u = ∇·(A ∇u)` with complex
//! coefficient matrices.
//!
//! * [`orlicz`]: weight functions φ, Young functions, Luxemburg norms.
//! * [`criterion`]: the algebraic dissipativity criteria on the matrix `A`.
//! * [`pde`]: grid discretisation, violation probes and time evolution.
//! * [`config`]: TOML run configuration.
//! * [`dsl`]: the expression language for coefficients and custom φ.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod criterion;
pub mod dsl;
pub mod error;
pub mod grid;
pub mod numeric;
pub mod orlicz;
pub mod pde;

pub use error::{Error, Result};
pub use num_complex::Complex64;
