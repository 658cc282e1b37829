//! Number formatting shared by every text output.

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn sci(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else if value.is_nan() {
        "nan".to_string()
    } else if value > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for v in [0.1, 1.0 / 3.0, 5e-4, 1.064e14, f64::MIN_POSITIVE, -2.5] {
            let s = sci(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(sci(0.5), "5.0000000000000000e-1");
        assert_eq!(sci(5e-4), "5.0000000000000001e-4");
    }
}
