//! Numeric text formatting shared by the CSV serializers.

/// Format a float with 17 significant digits so that parsing the text
/// recovers the exact same f64 bits. Infinity serializes as `inf`.
pub(crate) fn g17(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Inverse of [`g17`]: accepts the `inf` token and anything `f64::from_str`
/// understands.
pub(crate) fn parse_g17(s: &str) -> Option<f64> {
    if s == "inf" {
        Some(f64::INFINITY)
    } else {
        s.parse::<f64>().ok()
    }
}
