//! Serialization helpers for report values JSON cannot carry natively.

use serde::Serializer;

/// Finite values as numbers; infinities and NaN as the strings
/// `"inf"`, `"-inf"`, `"nan"`.
pub fn finite_or_inf<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}
