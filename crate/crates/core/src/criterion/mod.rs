//! Algebraic dissipativity criteria for the coefficient matrix.

pub mod check;
pub mod lambda0;
pub mod matrix;

pub use check::{
    block_form, directions, form_min_eig, form_min_eig_with_vector, necessary_real_part, sample_points, Criterion,
    CriterionReport, Margin, SamplingConfig, SubCheck, Verdict, Witness,
};
pub use lambda0::{lambda0, Divergence, Lambda0, Lambda0Config};
pub use matrix::{ComplexMatrix, EntryConfig, EntryExpr, ExprSource, MatrixField};

/// Serialises an extended real: finite values as numbers, `+∞` as `"inf"`.
pub fn serialize_extended<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}
