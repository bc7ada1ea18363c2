//! Rounding to a fixed number of significant digits for the text outputs.

use serde::Serializer;

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal text of `round_sig(x, digits)`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    format!("{}", round_sig(x, digits))
}

pub(crate) fn serialize_sig15<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x, 15))
}

pub(crate) fn serialize_opt_sig15<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_f64(round_sig(*v, 15)),
        None => s.serialize_none(),
    }
}
