//! Fixed two-decimal numeric formatting shared by prompts, chain text, and
//! reports. One formatter keeps rendered numbers identical everywhere and
//! guarantees that parsing a rendered number recovers the rounded value.

/// Rounds to 2 decimals, half away from zero.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Renders with exactly 2 decimals, normalizing negative zero to "0.00".
pub fn fmt2(v: f64) -> String {
    let r = round2(v);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.2}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_two_decimals() {
        assert_eq!(fmt2(1.0), "1.00");
        assert_eq!(fmt2(-3.14159), "-3.14");
        assert_eq!(fmt2(2.675), "2.68");
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(fmt2(-0.0001), "0.00");
        assert_eq!(fmt2(-0.0), "0.00");
    }

    #[test]
    fn round_trips_through_parse() {
        for &v in &[0.0, 1.23, -45.678, 99.995, -0.004] {
            let s = fmt2(v);
            let parsed: f64 = s.parse().unwrap();
            assert_eq!(fmt2(parsed), s);
        }
    }
}
